#pragma once

// Interconnected quantum reservoir computers evolving by convex mixtures of
// unitary conjugations:
//   ρ_j(k+1) = ε_w [g(w) U_w1 ρ U_w1† + (1 − g(w)) U_w2 ρ U_w2†]
//            + ε_v [g(v) U_v1 ρ U_v1† + (1 − g(v)) U_v2 ρ U_v2†] + ε_φ φ_j
//   ŷ_j(k)   = Σ_i Tr(Z_i ρ_j(k)),   v_1 = ŷ_2,  v_2 = ŷ_1

#include "smallgain/gains.hpp"
#include "smallgain/linalg.hpp"
#include "smallgain/systems.hpp"

#include "json.hpp"

#include <cstdint>
#include <random>
#include <span>

namespace smallgain {

inline constexpr int kMaxQubits = 6;
/// Lipschitz constant of the logistic function.
inline constexpr double kLogisticLipschitz = 0.25;
/// Upper bound used for ‖T_1 − T_2‖ in the induced Schatten-1 norm.
inline constexpr double kChannelDifferenceBound = 2.0;

enum class Pauli { X, Z };

/// I ⊗ … ⊗ P ⊗ … ⊗ I with P in slot `qubit` (1-based, slot 1 leftmost).
CMat pauli_on(Pauli kind, int qubit, int n_qubits);

struct DensityDefects {
    double hermitian = 0.0;
    double trace = 0.0;
    double min_eigenvalue = 0.0;
};

DensityDefects inspect_density(const CMat& rho, bool with_spectrum = true);

/// Hermitian, unit-trace, PSD matrix of size 2ⁿ. Construction validates to `tol`.
class DensityMatrix {
public:
    explicit DensityMatrix(CMat rho, double tol = 1e-10);

    /// |0…0⟩⟨0…0|
    static DensityMatrix ground(int n_qubits);
    static DensityMatrix maximally_mixed(int n_qubits);
    /// Normalized G G† with complex Gaussian G.
    static DensityMatrix random(int n_qubits, std::mt19937_64& rng);

    const CMat& matrix() const { return rho_; }
    int n_qubits() const { return n_; }

private:
    CMat rho_;
    int n_ = 0;
};

struct QrcUnitaries {
    CMat U_w1;
    CMat U_w2;
    CMat U_v1;
    CMat U_v2;
};

/// ⊗_i Z_i
CMat z_product(int n_qubits);
/// ⊗_i exp(−i θ_i X) = ⊗_i (cos θ_i I − i sin θ_i X)
CMat x_rotation_product(std::span<const double> thetas);

/// U_w1 = U_v2 = ⊗Z; U_w2 and U_v1 are X-rotation products with the given angles.
QrcUnitaries build_unitaries(int n_qubits, std::span<const double> theta_w2, std::span<const double> theta_v1);
/// Same with every angle drawn U[−π, π].
QrcUnitaries build_unitaries(int n_qubits, std::mt19937_64& rng);

struct QrcSubsystem {
    int n_qubits = 0;
    double eps_w = 0.0;
    double eps_v = 0.0;
    double eps_phi = 0.0;
    CMat phi;
    QrcUnitaries U;

    QrcSubsystem() = default;
    QrcSubsystem(int n, double eps_w, double eps_v, double eps_phi, CMat phi, QrcUnitaries U);

    Index dim() const { return Index{1} << n_qubits; }
};

struct QrcPair {
    QrcSubsystem sub1;
    QrcSubsystem sub2;
    std::uint64_t seed = 0;
};

struct QrcMixing {
    double eps_w;
    double eps_v;
    double eps_phi;
};

/// Subsystem with φ = |0…0⟩⟨0…0| and rotation angles drawn from `rng`.
QrcSubsystem make_qrc_subsystem(int n_qubits, const QrcMixing& mixing, std::mt19937_64& rng);
QrcPair make_qrc_pair(int n1, int n2, const QrcMixing& mix1, const QrcMixing& mix2, std::uint64_t seed);

double logistic(double x);

/// One step of the channel without validation.
CMat qrc_apply(const QrcSubsystem& sub, const CMat& rho, double w, double v);

/// One step, validating the result (Hermitian and trace to 1e-10, eigenvalues
/// ≥ −1e-10). Throws std::runtime_error on drift.
DensityMatrix qrc_step(const QrcSubsystem& sub, const DensityMatrix& rho, double w, double v);

/// Sum of singular values.
double schatten1(const CMat& m);

/// Tr(Z_i ρ) for i = 1..n.
Vec subsystem_features(const CMat& rho, int n_qubits);
/// [Tr(Z_i ρ_1)]_{i≤n1} followed by [Tr(Z_i ρ_2)]_{i≤n2}.
Vec readout_features(const CMat& rho1, int n1, const CMat& rho2, int n2);
double qrc_subsystem_output(const QrcSubsystem& sub, const CMat& rho);

/// lhs = 4 ε_v1 ε_v2 L_g² n1 n2 / (ε_φ1 ε_φ2),  rhs = 1 / (1 + λ)².
MarginReport qrc_small_gain_margin(const QrcPair& pair, double lam);

struct TraceBound {
    double abs_trace = 0.0;
    double bound = 0.0;
};

/// |Tr(AB)| and σ_max(A)‖B‖₁ for Hermitian A, B.
TraceBound trace_bound_check(const CMat& A, const CMat& B);

/// Real coordinates of a Hermitian matrix: diagonal real parts, then
/// (re, im) of each strictly-upper entry in row order.
Vec embed_hermitian(const CMat& m);
CMat unembed_hermitian(const Vec& x, Index dim);

/// Closed loop over embedded states; outputs are the unweighted ŷ_j. State
/// distances use the Schatten 1-norm per subsystem.
FeedbackPair build_qrc_closed_loop(const QrcPair& pair);

/// Splits a joint closed-loop state back into the two density matrices.
std::pair<CMat, CMat> split_qrc_state(const QrcPair& pair, const Vec& joint);
Vec join_qrc_state(const CMat& rho1, const CMat& rho2);

void to_json(nlohmann::json& j, const CMat& m);
void to_json(nlohmann::json& j, const QrcSubsystem& s);

}  // namespace smallgain
