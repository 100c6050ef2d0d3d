#include "smallgain/gains.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace smallgain {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(what) + " must be a positive finite number");
}

// Samples below this fraction of the initial magnitude are rounding noise.
constexpr double kRelativeNoiseFloor = 1e-13;

}  // namespace

GainExpr::GainExpr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

GainExpr GainExpr::linear(double c)
{
    require_positive(c, "linear gain coefficient");
    return GainExpr(gain::Linear{c});
}

GainExpr GainExpr::power(double c, double p)
{
    require_positive(c, "power-law coefficient");
    require_positive(p, "power-law exponent");
    return GainExpr(gain::PowerLaw{c, p});
}

GainExpr GainExpr::identity() { return GainExpr(gain::Identity{}); }

GainExpr GainExpr::compose(GainExpr inner, GainExpr outer)
{
    return GainExpr(gain::Compose{std::move(inner), std::move(outer)});
}

GainExpr GainExpr::max(GainExpr a, GainExpr b) { return GainExpr(gain::Max{std::move(a), std::move(b)}); }

GainExpr GainExpr::sum(GainExpr a, GainExpr b) { return GainExpr(gain::Sum{std::move(a), std::move(b)}); }

GainExpr GainExpr::id_plus(GainExpr lam) { return GainExpr(gain::IdentityPlus{std::move(lam)}); }

std::optional<double> GainExpr::linear_coefficient() const
{
    using R = std::optional<double>;
    return std::visit(
        overloaded{
            [](const gain::Linear& g) -> R { return g.c; },
            [](const gain::PowerLaw& g) -> R {
                if (g.p == 1.0) return g.c;
                return std::nullopt;
            },
            [](const gain::Identity&) -> R { return 1.0; },
            [](const gain::Compose& g) -> R {
                auto a = g.inner.linear_coefficient();
                auto b = g.outer.linear_coefficient();
                if (a && b) return *a * *b;
                return std::nullopt;
            },
            [](const gain::Max& g) -> R {
                auto a = g.a.linear_coefficient();
                auto b = g.b.linear_coefficient();
                if (a && b) return std::max(*a, *b);
                return std::nullopt;
            },
            [](const gain::Sum& g) -> R {
                auto a = g.a.linear_coefficient();
                auto b = g.b.linear_coefficient();
                if (a && b) return *a + *b;
                return std::nullopt;
            },
            [](const gain::IdentityPlus& g) -> R {
                auto a = g.lam.linear_coefficient();
                if (a) return 1.0 + *a;
                return std::nullopt;
            },
        },
        node());
}

std::string GainExpr::to_string() const { return nlohmann::json(*this).dump(); }

double KLBound::operator()(double s, double k) const { return c * s * std::pow(r, k); }

double eval_gain(const GainExpr& g, double s)
{
    if (!(s >= 0.0)) throw std::domain_error("gain argument must be nonnegative");
    return std::visit(
        overloaded{
            [&](const gain::Linear& n) { return n.c * s; },
            [&](const gain::PowerLaw& n) { return n.c * std::pow(s, n.p); },
            [&](const gain::Identity&) { return s; },
            [&](const gain::Compose& n) { return eval_gain(n.outer, eval_gain(n.inner, s)); },
            [&](const gain::Max& n) { return std::max(eval_gain(n.a, s), eval_gain(n.b, s)); },
            [&](const gain::Sum& n) { return eval_gain(n.a, s) + eval_gain(n.b, s); },
            [&](const gain::IdentityPlus& n) { return s + eval_gain(n.lam, s); },
        },
        g.node());
}

GainExpr invert_gain(const GainExpr& g)
{
    return std::visit(
        overloaded{
            [](const gain::Linear& n) { return GainExpr::linear(1.0 / n.c); },
            [](const gain::PowerLaw& n) {
                // y = c s^p  ⇔  s = c^(-1/p) y^(1/p)
                return GainExpr::power(std::pow(n.c, -1.0 / n.p), 1.0 / n.p);
            },
            [](const gain::Identity&) { return GainExpr::identity(); },
            [&](const auto&) -> GainExpr {
                throw std::invalid_argument("gain " + g.to_string() +
                                            " has no closed-form inverse; only linear, power "
                                            "and identity gains are invertible");
            },
        },
        g.node());
}

std::vector<double> log_grid(double lo, double hi, int n)
{
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("log_grid: need 0 < lo < hi, n >= 2");
    std::vector<double> grid(n);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int i = 0; i < n; ++i) grid[i] = std::exp(a + (b - a) * i / (n - 1));
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

std::vector<double> default_gain_grid() { return log_grid(1e-6, 1e6, 64); }

namespace {

SmallGainResult check_loop(const GainExpr& loop, std::span<const double> grid)
{
    if (auto c = loop.linear_coefficient()) return {*c < 1.0, *c, true};
    if (grid.empty()) throw std::invalid_argument("small-gain grid must be nonempty");
    SmallGainResult res{true, 0.0, false};
    for (double s : grid) {
        if (!(s > 0.0)) throw std::invalid_argument("small-gain grid entries must be positive");
        const double v = eval_gain(loop, s);
        res.margin = std::max(res.margin, v / s);
        if (!(v < s)) res.holds = false;
    }
    return res;
}

}  // namespace

SmallGainResult small_gain_holds(const GainExpr& g1, const GainExpr& g2, std::span<const double> grid)
{
    return check_loop(GainExpr::compose(g2, g1), grid);
}

SmallGainResult strengthened_small_gain_holds(const GainExpr& g1, const GainExpr& g2, const GainExpr& lam1,
                                              const GainExpr& lam2, std::span<const double> grid)
{
    GainExpr loop = GainExpr::compose(g2, GainExpr::id_plus(lam2));
    loop = GainExpr::compose(loop, g1);
    loop = GainExpr::compose(loop, GainExpr::id_plus(lam1));
    return check_loop(loop, grid);
}

double sum_to_max_bound(double a, double b, const GainExpr& lam)
{
    if (!(a >= 0.0) || !(b >= 0.0)) throw std::domain_error("sum_to_max_bound: a and b must be nonnegative");
    const GainExpr inv = invert_gain(lam);
    return std::max(a + eval_gain(lam, a), b + eval_gain(inv, b));
}

KLFit fit_kl_bound(const std::vector<std::vector<double>>& sequences)
{
    std::vector<double> s0;
    s0.reserve(sequences.size());
    for (const auto& seq : sequences) s0.push_back(seq.empty() ? 0.0 : seq.front());
    return fit_kl_bound(sequences, s0);
}

KLFit fit_kl_bound(const std::vector<std::vector<double>>& sequences, std::span<const double> initial_magnitudes)
{
    if (initial_magnitudes.size() != sequences.size())
        throw std::invalid_argument("fit_kl_bound: one initial magnitude per sequence required");

    // Pooled regression of log(d_k / s0) on k.
    double n = 0, sk = 0, sy = 0, skk = 0, sky = 0;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const auto& seq = sequences[i];
        const double s0 = initial_magnitudes[i];
        const bool all_zero = std::all_of(seq.begin(), seq.end(), [](double d) { return d == 0.0; });
        if (all_zero) continue;
        if (!(s0 > 0.0)) throw std::invalid_argument("fit_kl_bound: sequence must start positive");
        for (std::size_t k = 0; k < seq.size(); ++k) {
            if (seq[k] < 0.0) throw std::invalid_argument("fit_kl_bound: negative difference");
            if (seq[k] <= kRelativeNoiseFloor * s0) continue;
            const double y = std::log(seq[k] / s0);
            const double x = static_cast<double>(k);
            n += 1;
            sk += x;
            sy += y;
            skk += x * x;
            sky += x * y;
        }
    }
    if (n == 0) return {{0.0, 0.0}, true};

    double r = 0.0;
    const double denom = n * skk - sk * sk;
    if (n < 2 || denom <= 0.0) {
        // Every informative sample sits at one k; with a single point at k = 0
        // the sequences collapsed to zero immediately afterwards.
        r = (sk == 0.0) ? 0.0 : std::exp(sy / n / (sk / n));
    } else {
        r = std::exp((n * sky - sk * sy) / denom);
    }

    double c = 0.0;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const double s0 = initial_magnitudes[i];
        for (std::size_t k = 0; k < sequences[i].size(); ++k) {
            const double d = sequences[i][k];
            if (d == 0.0) continue;
            const double base = s0 * std::pow(r, static_cast<double>(k));
            if (base > 0.0) c = std::max(c, d / base);
            else c = std::numeric_limits<double>::infinity();
        }
    }
    return {{c, r}, r < 1.0 && std::isfinite(c)};
}

void to_json(nlohmann::json& j, const GainExpr& g)
{
    using nlohmann::json;
    std::visit(overloaded{
                   [&](const gain::Linear& n) { j = json{{"linear", n.c}}; },
                   [&](const gain::PowerLaw& n) { j = json{{"power", {n.c, n.p}}}; },
                   [&](const gain::Identity&) { j = "id"; },
                   [&](const gain::Compose& n) { j = json{{"compose", {json(n.inner), json(n.outer)}}}; },
                   [&](const gain::Max& n) { j = json{{"max", {json(n.a), json(n.b)}}}; },
                   [&](const gain::Sum& n) { j = json{{"sum", {json(n.a), json(n.b)}}}; },
                   [&](const gain::IdentityPlus& n) { j = json{{"id_plus", json(n.lam)}}; },
               },
               g.node());
}

GainExpr gain_from_json(const nlohmann::json& j)
{
    if (j.is_string()) {
        if (j.get<std::string>() == "id") return GainExpr::identity();
        throw std::invalid_argument("unknown gain literal " + j.dump());
    }
    if (!j.is_object() || j.size() != 1) throw std::invalid_argument("gain must be \"id\" or a one-key object: " + j.dump());
    const std::string key = j.begin().key();
    const nlohmann::json& val = j.begin().value();
    auto fold = [&](auto make) {
        if (!val.is_array() || val.size() < 2) throw std::invalid_argument(key + " needs an array of >= 2 gains");
        GainExpr acc = gain_from_json(val[0]);
        for (std::size_t i = 1; i < val.size(); ++i) acc = make(acc, gain_from_json(val[i]));
        return acc;
    };
    if (key == "linear") return GainExpr::linear(val.get<double>());
    if (key == "power") {
        if (!val.is_array() || val.size() != 2) throw std::invalid_argument("power needs [c, p]");
        return GainExpr::power(val[0].get<double>(), val[1].get<double>());
    }
    if (key == "compose") {
        if (!val.is_array() || val.size() != 2) throw std::invalid_argument("compose needs [inner, outer]");
        return GainExpr::compose(gain_from_json(val[0]), gain_from_json(val[1]));
    }
    if (key == "max") return fold([](GainExpr a, GainExpr b) { return GainExpr::max(a, b); });
    if (key == "sum") return fold([](GainExpr a, GainExpr b) { return GainExpr::sum(a, b); });
    if (key == "id_plus") return GainExpr::id_plus(gain_from_json(val));
    throw std::invalid_argument("unknown gain kind '" + key + "'");
}

}  // namespace smallgain
