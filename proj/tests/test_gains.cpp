#include "smallgain/gains.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace smallgain;
using doctest::Approx;

TEST_CASE("eval_gain on the basic variants")
{
    CHECK(eval_gain(GainExpr::linear(0.5), 2.0) == 1.0);
    CHECK(eval_gain(GainExpr::compose(GainExpr::linear(2), GainExpr::linear(3)), 1.0) == 6.0);
    CHECK(eval_gain(GainExpr::power(2.0, 3.0), 2.0) == Approx(16.0));
    CHECK(eval_gain(GainExpr::identity(), 4.5) == 4.5);
    CHECK(eval_gain(GainExpr::max(GainExpr::linear(2), GainExpr::power(1, 2)), 3.0) == 9.0);
    CHECK(eval_gain(GainExpr::sum(GainExpr::linear(2), GainExpr::power(1, 2)), 3.0) == 15.0);
    CHECK(eval_gain(GainExpr::id_plus(GainExpr::linear(0.25)), 4.0) == 5.0);

    for (const GainExpr& g : {GainExpr::linear(3), GainExpr::power(2, 0.5), GainExpr::identity(),
                              GainExpr::id_plus(GainExpr::power(1, 3)),
                              GainExpr::max(GainExpr::linear(1), GainExpr::identity())})
        CHECK(eval_gain(g, 0.0) == 0.0);
}

TEST_CASE("compose applies inner first")
{
    // outer(inner(s)) = (2s)^2 at s = 3 is 36, not 2·9.
    const GainExpr g = GainExpr::compose(GainExpr::linear(2), GainExpr::power(1, 2));
    CHECK(eval_gain(g, 3.0) == Approx(36.0));
}

TEST_CASE("eval_gain rejects negative arguments and bad coefficients")
{
    CHECK_THROWS_AS(eval_gain(GainExpr::linear(1), -1e-9), std::domain_error);
    CHECK_THROWS_AS(GainExpr::linear(0.0), std::invalid_argument);
    CHECK_THROWS_AS(GainExpr::linear(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(GainExpr::power(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GainExpr::linear(std::nan("")), std::invalid_argument);
}

TEST_CASE("invert_gain closed forms")
{
    const auto lin = std::get<gain::Linear>(invert_gain(GainExpr::linear(2)).node());
    CHECK(lin.c == 0.5);
    const auto pw = std::get<gain::PowerLaw>(invert_gain(GainExpr::power(1, 2)).node());
    CHECK(pw.c == 1.0);
    CHECK(pw.p == 0.5);
    CHECK(std::holds_alternative<gain::Identity>(invert_gain(GainExpr::identity()).node()));

    CHECK_THROWS_AS(invert_gain(GainExpr::max(GainExpr::linear(1), GainExpr::linear(2))), std::invalid_argument);
    CHECK_THROWS_AS(invert_gain(GainExpr::sum(GainExpr::linear(1), GainExpr::linear(2))), std::invalid_argument);
    CHECK_THROWS_AS(invert_gain(GainExpr::compose(GainExpr::linear(1), GainExpr::linear(2))), std::invalid_argument);
    CHECK_THROWS_AS(invert_gain(GainExpr::id_plus(GainExpr::linear(1))), std::invalid_argument);
}

TEST_CASE("invert_gain round trip on [1e-6, 1e6]")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> lc(std::log(1e-3), std::log(1e3)), lp(std::log(0.25), std::log(4.0));
    const auto grid = log_grid(1e-6, 1e6, 64);
    for (int t = 0; t < 100; ++t) {
        const GainExpr g = t % 2 ? GainExpr::linear(std::exp(lc(rng))) : GainExpr::power(std::exp(lc(rng)), std::exp(lp(rng)));
        const GainExpr gi = invert_gain(g);
        for (double s : grid) REQUIRE(std::abs(eval_gain(gi, eval_gain(g, s)) - s) <= 1e-12 * s);
    }
}

TEST_CASE("log_grid and default grid")
{
    const auto g = default_gain_grid();
    REQUIRE(g.size() == 64);
    CHECK(g.front() == Approx(1e-6));
    CHECK(g.back() == Approx(1e6));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == Approx(g[1] / g[0]));
    CHECK_THROWS(log_grid(0.0, 1.0, 4));
    CHECK_THROWS(log_grid(1.0, 1.0, 4));
}

TEST_CASE("small_gain_holds examples")
{
    const auto grid = default_gain_grid();
    auto r = small_gain_holds(GainExpr::linear(0.5), GainExpr::linear(1.5), grid);
    CHECK(r.holds);
    CHECK(r.exact);
    CHECK(r.margin == Approx(0.75).epsilon(1e-15));

    r = small_gain_holds(GainExpr::linear(0.8), GainExpr::linear(1.5), grid);
    CHECK_FALSE(r.holds);
    CHECK(r.margin == Approx(1.2).epsilon(1e-15));

    CHECK(small_gain_holds(GainExpr::linear(0.9), GainExpr::identity(), grid).holds);

    // Linear gains ignore the grid entirely.
    const std::vector<double> one{1e3};
    CHECK(small_gain_holds(GainExpr::linear(0.5), GainExpr::linear(1.5), one).margin == Approx(0.75));

    // Nonlinear: s² composed with 0.5 s is 0.25 s², below s only for s < 4.
    r = small_gain_holds(GainExpr::power(1, 2), GainExpr::linear(0.5), log_grid(0.1, 3.9, 16));
    CHECK(r.holds);
    CHECK_FALSE(r.exact);
    CHECK_FALSE(small_gain_holds(GainExpr::power(1, 2), GainExpr::linear(0.5), grid).holds);

    CHECK_THROWS(small_gain_holds(GainExpr::power(1, 2), GainExpr::linear(1), std::vector<double>{}));
    CHECK_THROWS(small_gain_holds(GainExpr::power(1, 2), GainExpr::linear(1), std::vector<double>{0.0}));
    CHECK_NOTHROW(small_gain_holds(GainExpr::linear(1), GainExpr::linear(1), std::vector<double>{}));
}

TEST_CASE("small-gain symmetry")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> lc(std::log(1e-2), std::log(1e2));
    const auto grid = default_gain_grid();
    for (int t = 0; t < 300; ++t) {
        const GainExpr a = GainExpr::linear(std::exp(lc(rng))), b = GainExpr::linear(std::exp(lc(rng)));
        CHECK(small_gain_holds(a, b, grid).holds == small_gain_holds(b, a, grid).holds);
        const double p = std::exp(lc(rng) / 4);
        const GainExpr pa = GainExpr::power(std::exp(lc(rng) / 2), p), pb = GainExpr::power(std::exp(lc(rng) / 2), 1 / p);
        CHECK(small_gain_holds(pa, pb, grid).holds == small_gain_holds(pb, pa, grid).holds);
    }
}

TEST_CASE("strengthened small-gain condition")
{
    const auto grid = default_gain_grid();
    auto r = strengthened_small_gain_holds(GainExpr::linear(0.3), GainExpr::linear(3.3), GainExpr::linear(0.003),
                                           GainExpr::linear(0.003), grid);
    CHECK(r.holds);
    CHECK(r.exact);
    CHECK(r.margin == Approx(0.99 * 1.003 * 1.003).epsilon(1e-14));

    r = strengthened_small_gain_holds(GainExpr::linear(0.3), GainExpr::linear(3.3), GainExpr::linear(0.01),
                                      GainExpr::linear(0.01), grid);
    CHECK_FALSE(r.holds);
    CHECK(r.margin == Approx(0.99 * 1.01 * 1.01).epsilon(1e-14));

    r = strengthened_small_gain_holds(GainExpr::linear(0.1), GainExpr::linear(0.1), GainExpr::linear(1),
                                      GainExpr::linear(1), grid);
    CHECK(r.holds);
    CHECK(r.margin == Approx(0.04));
}

TEST_CASE("sum_to_max_bound examples and dominance")
{
    CHECK(sum_to_max_bound(1, 4, GainExpr::linear(1)) == 8.0);
    CHECK(sum_to_max_bound(0, 0, GainExpr::power(2, 3)) == 0.0);
    CHECK(sum_to_max_bound(3, 1, GainExpr::linear(2)) == 9.0);
    CHECK_THROWS_AS(sum_to_max_bound(1, 1, GainExpr::max(GainExpr::linear(1), GainExpr::linear(2))),
                    std::invalid_argument);
    CHECK_THROWS(sum_to_max_bound(-1, 1, GainExpr::linear(1)));

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> l(std::log(1e-6), std::log(1e6));
    for (int t = 0; t < 1000; ++t) {
        const double a = std::exp(l(rng)), b = std::exp(l(rng)), c = std::exp(l(rng) / 2);
        const GainExpr lam = t % 2 ? GainExpr::linear(c) : GainExpr::power(c, std::exp(l(rng) / 10));
        REQUIRE(sum_to_max_bound(a, b, lam) >= a + b);
    }
}

TEST_CASE("monotonicity of random expressions")
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    const std::vector<GainExpr> leaves = {GainExpr::linear(0.7), GainExpr::power(2, 0.5), GainExpr::identity(),
                                          GainExpr::power(0.3, 1.7)};
    std::vector<GainExpr> exprs = leaves;
    for (const auto& a : leaves)
        for (const auto& b : leaves) {
            exprs.push_back(GainExpr::compose(a, b));
            exprs.push_back(GainExpr::max(a, b));
            exprs.push_back(GainExpr::sum(a, b));
            exprs.push_back(GainExpr::id_plus(GainExpr::compose(b, a)));
        }
    for (const GainExpr& g : exprs) {
        double s = 0.0, prev = eval_gain(g, 0.0);
        CHECK(prev == 0.0);
        for (int i = 0; i < 30; ++i) {
            s += u(rng);
            const double cur = eval_gain(g, s);
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("linear_coefficient")
{
    CHECK(GainExpr::compose(GainExpr::linear(2), GainExpr::id_plus(GainExpr::linear(0.5))).linear_coefficient() ==
          Approx(3.0));
    CHECK(GainExpr::max(GainExpr::linear(2), GainExpr::identity()).linear_coefficient() == Approx(2.0));
    CHECK_FALSE(GainExpr::power(1, 2).linear_coefficient().has_value());
}

TEST_CASE("fit_kl_bound")
{
    auto f = fit_kl_bound({{1, 0.5, 0.25, 0.125}});
    CHECK(f.bound.r == Approx(0.5).epsilon(1e-9));
    CHECK(f.bound.c == Approx(1.0).epsilon(1e-9));
    CHECK(f.converging);

    f = fit_kl_bound({{1, 1, 1}});
    CHECK(f.bound.r == Approx(1.0));
    CHECK_FALSE(f.converging);

    f = fit_kl_bound({{0, 0, 0}});
    CHECK(f.bound.c == 0.0);
    CHECK(f.bound.r == 0.0);

    // c is the smallest amplitude covering every sample.
    f = fit_kl_bound({{2, 1.2, 0.5, 0.25}, {1, 0.4, 0.3, 0.1}});
    const std::vector<std::vector<double>> seqs = {{2, 1.2, 0.5, 0.25}, {1, 0.4, 0.3, 0.1}};
    double needed = 0.0;
    for (const auto& s : seqs)
        for (std::size_t k = 0; k < s.size(); ++k) needed = std::max(needed, s[k] / (s[0] * std::pow(f.bound.r, k)));
    CHECK(f.bound.c == Approx(needed));
    CHECK(f.bound(2.0, 0) == Approx(2.0 * f.bound.c));

    CHECK_THROWS(fit_kl_bound({{0, 1, 2}}));
}

TEST_CASE("JSON round trip")
{
    const GainExpr g = GainExpr::max(GainExpr::compose(GainExpr::linear(2), GainExpr::power(1.5, 0.5)),
                                     GainExpr::id_plus(GainExpr::identity()));
    const nlohmann::json j = g;
    const GainExpr back = gain_from_json(j);
    for (double s : {0.0, 0.3, 1.0, 7.0}) CHECK(eval_gain(back, s) == eval_gain(g, s));
    CHECK(nlohmann::json(back) == j);

    const GainExpr sum3 = gain_from_json(nlohmann::json::parse(R"({"sum": [{"linear": 1}, "id", {"power": [1, 2]}]})"));
    CHECK(eval_gain(sum3, 2.0) == Approx(8.0));
    CHECK_THROWS(gain_from_json(nlohmann::json::parse(R"({"bogus": 1})")));
    CHECK_THROWS(gain_from_json(nlohmann::json::parse(R"({"max": [{"linear": 1}]})")));
    CHECK_THROWS(gain_from_json(nlohmann::json::parse(R"({"linear": -2})")));
}
