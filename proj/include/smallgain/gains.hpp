#pragma once

// Comparison-function algebra (class-K / K∞ gains, geometric KL bounds) and
// the small-gain certificate checks built on it.

#include "json.hpp"

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace smallgain {

class GainExpr;

namespace gain {
struct Linear {
    double c;
};
struct PowerLaw {
    double c;
    double p;
};
struct Identity {};
struct Compose;
struct Max;
struct Sum;
struct IdentityPlus;
}  // namespace gain

/// Immutable symbolic gain function s ↦ g(s). Nodes are shared, so copies are
/// cheap and expressions may be reused as sub-terms.
class GainExpr {
public:
    using Node = std::variant<gain::Linear, gain::PowerLaw, gain::Identity, gain::Compose,
                              gain::Max, gain::Sum, gain::IdentityPlus>;

    static GainExpr linear(double c);
    static GainExpr power(double c, double p);
    static GainExpr identity();
    /// outer ∘ inner
    static GainExpr compose(GainExpr inner, GainExpr outer);
    static GainExpr max(GainExpr a, GainExpr b);
    static GainExpr sum(GainExpr a, GainExpr b);
    /// id + lam
    static GainExpr id_plus(GainExpr lam);

    const Node& node() const;

    /// Exact slope when the expression is linear in s (built only from
    /// Linear/Identity through compose/max/sum/id_plus).
    std::optional<double> linear_coefficient() const;

    std::string to_string() const;

private:
    explicit GainExpr(Node n);
    std::shared_ptr<const Node> node_;
};

namespace gain {
struct Compose {
    GainExpr inner;
    GainExpr outer;
};
struct Max {
    GainExpr a;
    GainExpr b;
};
struct Sum {
    GainExpr a;
    GainExpr b;
};
struct IdentityPlus {
    GainExpr lam;
};
}  // namespace gain

inline const GainExpr::Node& GainExpr::node() const { return *node_; }

/// β(s, k) = c·s·r^k.
struct KLBound {
    double c = 0.0;
    double r = 0.0;

    double operator()(double s, double k) const;
};

/// Result of fitting a KLBound to observed difference sequences. When the
/// fitted rate is ≥ 1 the bound is kept for reporting but `converging` is false.
struct KLFit {
    KLBound bound;
    bool converging = true;
};

struct SmallGainResult {
    bool holds = false;
    /// max over the grid of (loop composition)(s) / s; exact slope for linear gains.
    double margin = 0.0;
    /// true when decided in closed form (all-linear gains); grid evidence otherwise.
    bool exact = false;
};

/// Two sides of a closed-form small-gain inequality lhs < rhs.
struct MarginReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

double eval_gain(const GainExpr& g, double s);

/// Closed-form inverse for Linear, PowerLaw and Identity; throws
/// std::invalid_argument for every other variant.
GainExpr invert_gain(const GainExpr& g);

/// 64 log-spaced points in [1e-6, 1e6].
std::vector<double> default_gain_grid();
std::vector<double> log_grid(double lo, double hi, int n);

/// γ1 ∘ γ2 (s) < s on the grid.
SmallGainResult small_gain_holds(const GainExpr& g1, const GainExpr& g2,
                                 std::span<const double> grid);

/// (id + λ1) ∘ γ1 ∘ (id + λ2) ∘ γ2 (s) < s on the grid.
SmallGainResult strengthened_small_gain_holds(const GainExpr& g1, const GainExpr& g2,
                                              const GainExpr& lam1, const GainExpr& lam2,
                                              std::span<const double> grid);

/// max{a + λ(a), b + λ⁻¹(b)}, an upper bound for a + b.
double sum_to_max_bound(double a, double b, const GainExpr& lam);

/// Log-linear least-squares fit of a geometric KL bound. Each sequence is
/// scaled by its own first sample.
KLFit fit_kl_bound(const std::vector<std::vector<double>>& sequences);

/// Same, with an explicit initial magnitude per sequence (β's first argument).
KLFit fit_kl_bound(const std::vector<std::vector<double>>& sequences,
                   std::span<const double> initial_magnitudes);

void to_json(nlohmann::json& j, const GainExpr& g);
GainExpr gain_from_json(const nlohmann::json& j);

}  // namespace smallgain
