#pragma once

// Observer-based control of a Lur'e plant with a globally Lipschitz
// nonlinearity: the controlled-plant contraction factor, the LMI certificate
// for the observer error, and the plant/observer-error interconnection.

#include "smallgain/linalg.hpp"
#include "smallgain/systems.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace smallgain {

using Matrix8d = Eigen::Matrix<double, 8, 8>;

/// z(k+1) = A z + B_u u + B_w w + ρ G sin(H z),  y = C z.
struct LurePlant {
    Eigen::Matrix2d A;
    Eigen::Vector2d B_u;
    Eigen::Vector2d B_w;
    Eigen::RowVector2d C;
    Eigen::Vector2d G;
    Eigen::RowVector2d H;
    double rho = 0.0;

    /// The two-state benchmark plant (ρ = 0.1, A = [[1,1],[0,1.1]], ...).
    static LurePlant example();

    Eigen::Vector2d nonlinearity(const Eigen::Vector2d& z) const { return rho * G * std::sin(H.dot(z)); }
};

/// u = −K ẑ; observer correction −L (C ẑ − y).
struct ControllerDesign {
    Eigen::Vector2d L;
    Eigen::RowVector2d K;

    static ControllerDesign example();
};

struct LmiCertificate {
    Eigen::Matrix2d P = Eigen::Matrix2d::Zero();
    Eigen::Vector2d Z = Eigen::Vector2d::Zero();
    double eps = 0.0;
    double theta = 0.0;
    /// λ_max of the assembled 8×8 matrix.
    double max_eig = 0.0;
    /// P − εI ≺ 0 and P ≻ 0.
    bool p_eps_ok = false;
};

/// σ_max(A − B_u K) + ρ σ_max(G H); the controlled plant is contracting when < 1.
double compute_lambda_s(const LurePlant& plant, const Eigen::RowVector2d& K);

/// Block matrix
///   [ −θP       AᵀP−CᵀZᵀ  ερ(GH)ᵀ  AᵀP−CᵀZᵀ ]
///   [ PA−ZC     −P         0        0        ]
///   [ ερGH      0          −εI      0        ]
///   [ PA−ZC     0          0        P−εI     ]
/// Throws std::invalid_argument for asymmetric P.
Matrix8d assemble_lmi(const LurePlant& plant, const Eigen::Matrix2d& P, const Eigen::Vector2d& Z, double eps,
                      double theta);

/// Equivalent 4×4 form before the Schur-complement expansion, with
/// A_o = A − P⁻¹ZC and X = ρGH:
///   [ A_oᵀPA_o − θP + εXᵀX   A_oᵀP  ]
///   [ PA_o                   P − εI ]
Eigen::Matrix4d assemble_lmi_reduced(const LurePlant& plant, const Eigen::Matrix2d& P, const Eigen::Vector2d& Z,
                                     double eps, double theta);

/// P ≻ 0, λ_max(P − εI) < 0 and λ_max(LMI) ≤ tol. θ outside (0,1) or ε ≤ 0
/// is rejected before any eigenvalue work.
bool check_lmi(const LurePlant& plant, const LmiCertificate& cert, double tol = 1e-9);

struct LmiSearchConfig {
    int restarts = 10;
    int max_evaluations = 3000;
    /// Strictness margin for P ≻ 0 and P − εI ≺ 0 at trace(P) = 1.
    double margin = 1e-6;
    double tol = 1e-9;
    std::uint64_t seed = 1;
};

struct LmiSearchResult {
    bool feasible = false;
    /// Best point found (rescaled to the requested ε); a valid certificate iff `feasible`.
    LmiCertificate best;
    /// Objective at the best point with trace(P) = 1; ≤ 0 means strictly feasible.
    double best_objective = 0.0;
    int restarts_used = 0;
    int evaluations = 0;
};

/// Simplex search over P with Z = P L. Uses the degree-1 homogeneity of the LMI
/// in (P, Z, ε): P is normalized to unit trace and ε is searched in log scale,
/// then the point is rescaled to the requested ε. A failed search is not a
/// proof of infeasibility.
LmiSearchResult search_lmi_feasible(const LurePlant& plant, const Eigen::Vector2d& L, double theta, double eps,
                                    const LmiSearchConfig& config = {});

/// Subsystem 1: controlled plant z with loop input Δz; subsystem 2: observer
/// error Δz with loop input z. Both take the scalar disturbance w and output
/// their state.
FeedbackPair build_observer_closed_loop(const LurePlant& plant, const ControllerDesign& design);

void to_json(nlohmann::json& j, const LurePlant& p);
void from_json(const nlohmann::json& j, LurePlant& p);
void to_json(nlohmann::json& j, const ControllerDesign& d);
void from_json(const nlohmann::json& j, ControllerDesign& d);
void to_json(nlohmann::json& j, const LmiCertificate& c);

}  // namespace smallgain
