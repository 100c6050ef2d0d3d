#pragma once

// State-feedback interconnected echo-state networks
//   x_j(k+1) = tanh(A_j x_j + A_fb_j v_j + B_j w),  v_1 = x_2,  v_2 = x_1
// with σ_max-based small-gain certification.

#include "smallgain/linalg.hpp"
#include "smallgain/systems.hpp"

#include "json.hpp"

#include <cstdint>

namespace smallgain {

struct EsnSubsystem {
    Mat A;
    Mat A_fb;
    Vec B;
    double sigma_A = 0.0;
    double sigma_fb = 0.0;
    double norm_B = 0.0;

    EsnSubsystem() = default;
    EsnSubsystem(Mat a, Mat a_fb, Vec b);

    Index size() const { return A.rows(); }
    Vec step(const Vec& x, const Vec& v, double w) const;
};

struct EsnPair {
    EsnSubsystem sub1;
    EsnSubsystem sub2;
    std::uint64_t seed = 0;
    double sigma_A_target = 0.0;
    double sigma_fb2_target = 0.0;

    void validate() const;
};

/// Entries drawn U[−1, 1], then A_1, A_2 scaled to σ_max = sigma_A and A_fb_2
/// to σ_max = sigma_fb2. A_fb_1 and the B_j stay as drawn.
EsnPair generate_esn(Index n1, Index n2, double sigma_A, double sigma_fb2, std::uint64_t seed);

/// Scales M so that σ_max(M) = target. Throws for a zero matrix.
Mat rescale_to_sigma(const Mat& m, double target);

/// lhs = Π_j σ_max(A_fb_j) / (1 − σ_max(A_j)),  rhs = 1 / (1 + λ)².
MarginReport esn_small_gain_margin(const EsnPair& pair, double lam);

/// Rescales A_fb_1 so that lhs = rhs·(1 − safety_margin).
EsnPair scale_feedback_for_small_gain(const EsnPair& pair, double lam, double safety_margin);

/// Outputs are the subsystem states; the shared scalar input w drives both.
FeedbackPair build_esn_closed_loop(const EsnPair& pair);

void to_json(nlohmann::json& j, const EsnPair& p);
EsnPair esn_pair_from_json(const nlohmann::json& j);

}  // namespace smallgain
