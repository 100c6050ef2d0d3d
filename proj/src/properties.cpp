#include "smallgain/properties.hpp"

#include "smallgain/esn.hpp"
#include "smallgain/gains.hpp"
#include "smallgain/observer.hpp"
#include "smallgain/qrc.hpp"
#include "smallgain/signals.hpp"
#include "smallgain/sysid.hpp"
#include "smallgain/systems.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace smallgain {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

double log_uniform(Rng& rng, double a, double b) { return std::exp(uniform(rng, std::log(a), std::log(b))); }

Mat rmat(Rng& rng, Index r, Index c)
{
    Mat m(r, c);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -1.0, 1.0);
    return m;
}

Vec rvec(Rng& rng, Index n) { return rmat(rng, n, 1); }

int trials(const PropertyOptions& o, int base) { return std::max(1, static_cast<int>(std::lround(base * o.scale))); }

/// Accumulates a check of the form lhs ≤ rhs over many trials.
struct Tally {
    PropertyOutcome out;

    Tally(std::string suite, std::string name)
    {
        out.suite = std::move(suite);
        out.name = std::move(name);
        out.worst = -std::numeric_limits<double>::infinity();
    }

    void le(double lhs, double rhs, double rel_tol = 0.0)
    {
        ++out.trials;
        const double excess = lhs - rhs;
        out.worst = std::max(out.worst, excess);
        if (!(excess <= rel_tol * std::max(1.0, std::abs(rhs)))) ++out.failures;
    }

    void check(bool ok, double measure = 0.0)
    {
        ++out.trials;
        out.worst = std::max(out.worst, measure);
        if (!ok) ++out.failures;
    }

    PropertyOutcome done(std::string detail = {})
    {
        if (out.trials == 0) out.worst = 0.0;
        out.detail = std::move(detail);
        return out;
    }
};

GainExpr random_invertible_gain(Rng& rng)
{
    if (uniform(rng, 0, 1) < 0.5) return GainExpr::linear(log_uniform(rng, 1e-3, 1e3));
    return GainExpr::power(log_uniform(rng, 1e-2, 1e2), log_uniform(rng, 0.25, 4.0));
}

GainExpr random_gain(Rng& rng, int depth)
{
    const int pick = std::uniform_int_distribution<int>(0, depth > 0 ? 6 : 2)(rng);
    switch (pick) {
    case 0: return GainExpr::linear(log_uniform(rng, 1e-2, 1e2));
    case 1: return GainExpr::power(log_uniform(rng, 1e-2, 1e2), log_uniform(rng, 0.5, 2.0));
    case 2: return GainExpr::identity();
    case 3: return GainExpr::compose(random_gain(rng, depth - 1), random_gain(rng, depth - 1));
    case 4: return GainExpr::max(random_gain(rng, depth - 1), random_gain(rng, depth - 1));
    case 5: return GainExpr::sum(random_gain(rng, depth - 1), random_gain(rng, depth - 1));
    default: return GainExpr::id_plus(random_gain(rng, depth - 1));
    }
}

// ---------------------------------------------------------------- gains

std::vector<PropertyOutcome> gains_suite(const PropertyOptions& o)
{
    Rng rng(o.seed);
    std::vector<PropertyOutcome> out;

    Tally bound("gains", "sum_to_max_bound_dominates_sum");
    for (int t = 0; t < trials(o, 1000); ++t) {
        const double a = log_uniform(rng, 1e-6, 1e6);
        const double b = log_uniform(rng, 1e-6, 1e6);
        const GainExpr lam = random_invertible_gain(rng);
        bound.le(a + b, sum_to_max_bound(a, b, lam), 1e-15);
    }
    out.push_back(bound.done("1000 random (a, b, λ) triples"));

    Tally inv("gains", "inverse_round_trip");
    const auto grid = log_grid(1e-6, 1e6, 64);
    for (int t = 0; t < trials(o, 200); ++t) {
        const GainExpr g = random_invertible_gain(rng);
        const GainExpr gi = invert_gain(g);
        for (double s : grid) inv.le(std::abs(eval_gain(gi, eval_gain(g, s)) - s) / s, 1e-12);
    }
    out.push_back(inv.done("relative error on 64 points in [1e-6, 1e6]"));

    Tally sym("gains", "small_gain_symmetry");
    const auto dgrid = default_gain_grid();
    for (int t = 0; t < trials(o, 500); ++t) {
        GainExpr g1 = GainExpr::linear(log_uniform(rng, 1e-2, 1e2));
        GainExpr g2 = GainExpr::linear(log_uniform(rng, 1e-2, 1e2));
        if (t % 2 == 1) {
            const double p = log_uniform(rng, 0.25, 4.0);
            g1 = GainExpr::power(log_uniform(rng, 1e-1, 1e1), p);
            g2 = GainExpr::power(log_uniform(rng, 1e-1, 1e1), 1.0 / p);
        }
        sym.check(small_gain_holds(g1, g2, dgrid).holds == small_gain_holds(g2, g1, dgrid).holds);
    }
    out.push_back(sym.done("linear pairs and power laws with p1·p2 = 1"));

    Tally mono("gains", "eval_zero_and_strictly_increasing");
    for (int t = 0; t < trials(o, 300); ++t) {
        const GainExpr g = random_gain(rng, 3);
        std::vector<double> s(20);
        for (double& x : s) x = log_uniform(rng, 1e-3, 1e3);
        std::sort(s.begin(), s.end());
        bool ok = eval_gain(g, 0.0) == 0.0;
        for (std::size_t i = 1; i < s.size(); ++i)
            if (s[i] > s[i - 1]) ok = ok && eval_gain(g, s[i]) > eval_gain(g, s[i - 1]);
        mono.check(ok);
    }
    out.push_back(mono.done("random expression trees of depth ≤ 3"));
    return out;
}

// ---------------------------------------------------------------- systems

FeedbackPair scalar_linear_pair(double a1, double b1, double a2, double b2)
{
    auto make = [](std::string name, double a, double b) {
        SystemDef s;
        s.name = std::move(name);
        s.state_dim = s.loop_input_dim = s.external_input_dim = s.output_dim = 1;
        s.update = [a, b](long, const Vec& x, const Vec& v, const Vec& u) -> Vec { return a * x + b * v + u; };
        s.output = [](long, const Vec& x, const Vec&, const Vec&) -> Vec { return x; };
        return s;
    };
    FeedbackPair p;
    p.sys1 = make("s1", a1, b1);
    p.sys2 = make("s2", a2, b2);
    return p;
}

std::vector<PropertyOutcome> systems_suite(const PropertyOptions& o)
{
    Rng rng(o.seed + 1);
    std::vector<PropertyOutcome> out;

    const EsnPair esn = scale_feedback_for_small_gain(generate_esn(4, 4, 0.5, 1.65, o.seed), 0.003, 0.01);
    const FeedbackPair esn_loop = build_esn_closed_loop(esn);
    const Signal w = make_signal("uniform(-2,2)", 300, o.seed);

    Tally det("systems", "determinism");
    Tally rec("systems", "output_recompute_bit_exact");
    for (int t = 0; t < trials(o, 5); ++t) {
        const Vec x0 = esn_loop.draw_initial_state(rng);
        const Trajectory a = simulate_closed_loop(esn_loop, w, w, x0, 1, w.rows());
        const Trajectory b = simulate_closed_loop(esn_loop, w, w, x0, 1, w.rows());
        det.check(a.states == b.states && a.outputs == b.outputs);
        rec.check(recompute_outputs(esn_loop, a) == a.outputs);
    }
    out.push_back(det.done());
    out.push_back(rec.done());

    Tally order("systems", "strict_causal_order_independent");
    for (int t = 0; t < trials(o, 100); ++t) {
        const Vec x = esn_loop.draw_initial_state(rng);
        const Vec x1 = x.head(4), x2 = x.tail(4);
        const Vec u = Vec::Constant(1, uniform(rng, -2, 2));
        const auto [y1, y2] = closed_loop_outputs(esn_loop, 0, x1, x2, u, u);
        const Vec z = Vec::Zero(4);
        const Vec r1 = esn_loop.sys1.output(0, x1, z, u);
        const Vec r2 = esn_loop.sys2.output(0, x2, z, u);
        const Vec s2 = esn_loop.sys2.output(0, x2, z, u);
        const Vec s1 = esn_loop.sys1.output(0, x1, z, u);
        order.check(y1 == r1 && y2 == r2 && r1 == s1 && r2 == s2);
    }
    out.push_back(order.done("y2-then-y1 equals y1-then-y2"));

    Tally kl("systems", "kl_rate_matches_spectral_radius");
    for (int t = 0; t < trials(o, 50); ++t) {
        const double a = uniform(rng, 0.2, 0.6);
        const double b = uniform(rng, 0.05, 0.3);
        const FeedbackPair lin = scalar_linear_pair(a, b, a, b);
        const double radius = a + b;
        const Signal u = Signal::Zero(80, 1);
        std::vector<Vec> inits;
        for (int i = 0; i < 4; ++i) inits.push_back(rvec(rng, 2));
        const ConvergenceReport rep = verify_convergence(lin, u, u, inits, 80, 1.0);
        kl.le(std::abs(rep.fit.bound.r - radius), 0.02);
    }
    out.push_back(kl.done("symmetric closed-loop matrices [[a, b], [b, a]]"));
    return out;
}

// ---------------------------------------------------------------- observer

std::vector<PropertyOutcome> observer_suite(const PropertyOptions& o)
{
    Rng rng(o.seed + 2);
    std::vector<PropertyOutcome> out;
    const LurePlant plant = LurePlant::example();
    const ControllerDesign design = ControllerDesign::example();

    LmiSearchConfig sc;
    sc.seed = o.seed;
    const LmiSearchResult cert = search_lmi_feasible(plant, design.L, 0.9, 0.001, sc);

    // Half the tuples are drawn near a feasible certificate so both outcomes occur.
    Tally schur("observer", "schur_equivalence");
    int feasible = 0;
    for (int t = 0; t < trials(o, 200); ++t) {
        Eigen::Matrix2d P;
        Eigen::Vector2d Lp = design.L;
        double eps = 0.0, theta = 0.0;
        if (t % 2 == 0 && cert.feasible) {
            const double scale = log_uniform(rng, 1e-3, 0.3);
            const Eigen::Matrix2d N = rmat(rng, 2, 2);
            P = cert.best.P + scale * cert.best.P.trace() * 0.5 * (N + N.transpose());
            if (lambda_min_sym(P) <= 0.0) P = cert.best.P;
            eps = std::max(cert.best.eps, lambda_max_sym(P)) * uniform(rng, 1.0001, 1.5);
            theta = uniform(rng, 0.75, 0.999);
            Lp += scale * Eigen::Vector2d(rvec(rng, 2));
        } else {
            const Eigen::Matrix2d R = rmat(rng, 2, 2);
            P = R * R.transpose() + 0.05 * Eigen::Matrix2d::Identity();
            P /= P.trace();
            eps = lambda_max_sym(P) * uniform(rng, 1.0001, 3.0);
            theta = uniform(rng, 0.5, 0.999);
            Lp += 0.3 * Eigen::Vector2d(rvec(rng, 2));
        }
        const Eigen::Vector2d Z = P * Lp;
        const bool big = lambda_max_sym(assemble_lmi(plant, P, Z, eps, theta)) < 0.0;
        const bool small = lambda_max_sym(assemble_lmi_reduced(plant, P, Z, eps, theta)) < 0.0;
        feasible += big ? 1 : 0;
        schur.check(big == small);
    }
    out.push_back(schur.done(std::to_string(feasible) + " feasible tuples"));

    Tally lip("observer", "nonlinearity_lipschitz");
    const Eigen::Matrix2d X = plant.rho * plant.G * plant.H;
    for (int t = 0; t < trials(o, 1000); ++t) {
        const Eigen::Vector2d a = 5.0 * Eigen::Vector2d(rvec(rng, 2));
        const Eigen::Vector2d b = 5.0 * Eigen::Vector2d(rvec(rng, 2));
        lip.le((plant.nonlinearity(a) - plant.nonlinearity(b)).norm(), (X * (a - b)).norm(), 1e-14);
    }
    out.push_back(lip.done());

    Tally lyap("observer", "lyapunov_decay");
    if (cert.feasible) {
        const FeedbackPair loop = build_observer_closed_loop(plant, design);
        const Eigen::Matrix2d& P = cert.best.P;
        for (int t = 0; t < trials(o, 20); ++t) {
            const Signal w = make_signal("uniform(-1,1)", 60, o.seed + t);
            const Vec x0 = 4.0 * rvec(rng, 4);
            const Trajectory tr = simulate_closed_loop(loop, w, w, x0, 0, 60);
            const Eigen::Vector2d d0 = tr.states.row(0).tail(2).transpose();
            const double v0 = d0.dot(P * d0);
            for (Index k = 1; k < tr.size(); ++k) {
                const Eigen::Vector2d d = tr.states.row(k).tail(2).transpose();
                lyap.le(d.dot(P * d), std::pow(0.9, static_cast<double>(k)) * v0 + 1e-300, 1e-9);
            }
        }
    }
    out.push_back(lyap.done(cert.feasible ? "θ = 0.9 certificate" : "no θ = 0.9 certificate found"));

    Tally conv("observer", "lambda_s_below_one_converges");
    const double lambda_s = compute_lambda_s(plant, design.K);
    const FeedbackPair loop = build_observer_closed_loop(plant, design);
    for (int t = 0; t < trials(o, 5); ++t) {
        const Signal w = make_signal("uniform(-1,1)", 200, o.seed + 100 + t);
        std::vector<Vec> inits;
        for (int i = 0; i < 3; ++i) inits.push_back(2.0 * rvec(rng, 4));
        conv.check(lambda_s < 1.0 && verify_convergence(loop, w, w, inits, 200).converging);
    }
    out.push_back(conv.done());
    return out;
}

// ---------------------------------------------------------------- esn

std::vector<PropertyOutcome> esn_suite(const PropertyOptions& o)
{
    Rng rng(o.seed + 3);
    std::vector<PropertyOutcome> out;

    Tally con("esn", "contraction_inequality");
    for (int t = 0; t < trials(o, 10); ++t) {
        const EsnPair pair = scale_feedback_for_small_gain(generate_esn(3, 4, 0.5, 1.65, o.seed + t), 0.003, 0.01);
        const FeedbackPair loop = build_esn_closed_loop(pair);
        const Index n1 = pair.sub1.size();
        const Signal w = make_signal("uniform(-2,2)", 100, o.seed + 10 * t);
        const Signal wb = make_signal("uniform(-2,2)", 100, o.seed + 10 * t + 1);
        const Trajectory a = simulate_closed_loop(loop, w, w, loop.draw_initial_state(rng), 0, 100);
        const Trajectory b = simulate_closed_loop(loop, wb, wb, loop.draw_initial_state(rng), 0, 100);
        const Mat dx = a.states - b.states;
        for (int j = 0; j < 2; ++j) {
            const EsnSubsystem& s = j == 0 ? pair.sub1 : pair.sub2;
            const Mat own = j == 0 ? Mat(dx.leftCols(n1)) : Mat(dx.rightCols(dx.cols() - n1));
            const Mat other = j == 0 ? Mat(dx.rightCols(dx.cols() - n1)) : Mat(dx.leftCols(n1));
            double sup_v = 0.0, sup_w = 0.0;
            for (Index k = 1; k < a.size(); ++k) {
                sup_v = std::max(sup_v, other.row(k - 1).norm());
                sup_w = std::max(sup_w, std::abs(w(k - 1, 0) - wb(k - 1, 0)));
                const double bound = std::pow(s.sigma_A, static_cast<double>(k)) * own.row(0).norm() +
                                     s.sigma_fb / (1.0 - s.sigma_A) * sup_v + s.norm_B / (1.0 - s.sigma_A) * sup_w;
                con.le(own.row(k).norm(), bound, 1e-12);
            }
        }
    }
    out.push_back(con.done("pointwise along 100-step rollouts"));

    Tally cert("esn", "certificate_implies_convergence");
    for (int t = 0; t < trials(o, 10); ++t) {
        const EsnPair pair = scale_feedback_for_small_gain(generate_esn(4, 4, 0.5, 1.65, o.seed + 50 + t), 0.003, 0.01);
        const FeedbackPair loop = build_esn_closed_loop(pair);
        const Signal w = make_signal("uniform(-2,2)", 300, o.seed + 50 + t);
        std::vector<Vec> inits;
        for (int i = 0; i < 3; ++i) inits.push_back(loop.draw_initial_state(rng));
        cert.check(esn_small_gain_margin(pair, 0.003).holds && verify_convergence(loop, w, w, inits, 300).converging);
    }
    out.push_back(cert.done("10 random seeds"));
    return out;
}

// ---------------------------------------------------------------- qrc

QrcMixing random_mixing(Rng& rng)
{
    const double a = uniform(rng, 0.05, 1.0), b = uniform(rng, 0.05, 1.0), c = uniform(rng, 0.05, 1.0);
    const double s = a + b + c;
    return {a / s, b / s, 1.0 - a / s - b / s};
}

std::vector<PropertyOutcome> qrc_suite(const PropertyOptions& o)
{
    Rng rng(o.seed + 4);
    std::vector<PropertyOutcome> out;

    Tally cptp("qrc", "cptp_contraction");
    for (int t = 0; t < trials(o, 500); ++t) {
        const int n = std::uniform_int_distribution<int>(1, 3)(rng);
        const QrcMixing mix = random_mixing(rng);
        const QrcSubsystem sub = make_qrc_subsystem(n, mix, rng);
        const CMat r = DensityMatrix::random(n, rng).matrix();
        const CMat s = DensityMatrix::random(n, rng).matrix();
        const double w = uniform(rng, -3, 3), v = uniform(rng, -3, 3);
        cptp.le(schatten1(qrc_apply(sub, r, w, v) - qrc_apply(sub, s, w, v)),
                (mix.eps_w + mix.eps_v) * schatten1(r - s), 1e-12);
    }
    out.push_back(cptp.done("‖T(ρ − σ)‖₁ ≤ (ε_w + ε_v)‖ρ − σ‖₁"));

    Tally logi("qrc", "logistic_lipschitz");
    for (int t = 0; t < trials(o, 1000); ++t) {
        const double x = uniform(rng, -10, 10), y = uniform(rng, -10, 10);
        logi.le(std::abs(logistic(x) - logistic(y)), kLogisticLipschitz * std::abs(x - y), 1e-15);
    }
    out.push_back(logi.done());

    Tally bound20("qrc", "contraction_bound");
    Tally bound21("qrc", "output_bound");
    Tally phys("qrc", "physicality");
    for (int t = 0; t < trials(o, 3); ++t) {
        const int n = 3;
        const QrcPair pair = make_qrc_pair(n, n, {0.25, 0.1, 0.65}, {0.1, 0.45, 0.45}, o.seed + t);
        const FeedbackPair loop = build_qrc_closed_loop(pair);
        const Index H = 200;
        const Signal w = make_signal("uniform(-2,2)", H, o.seed + 20 * t);
        const Signal wb = make_signal("uniform(-2,2)", H, o.seed + 20 * t + 1);
        const Trajectory a = simulate_closed_loop(loop, w, w, loop.draw_initial_state(rng), 0, H);
        const Trajectory b = simulate_closed_loop(loop, wb, wb, loop.draw_initial_state(rng), 0, H);
        std::vector<double> d1(H), d2(H);
        for (Index k = 0; k < H; ++k) {
            const auto [a1, a2] = split_qrc_state(pair, a.states.row(k).transpose());
            const auto [b1, b2] = split_qrc_state(pair, b.states.row(k).transpose());
            d1[k] = schatten1(a1 - b1);
            d2[k] = schatten1(a2 - b2);
            for (const CMat* r : {&a1, &a2, &b1, &b2}) {
                const DensityDefects dd = inspect_density(*r);
                phys.check(dd.trace <= 1e-9 && dd.min_eigenvalue >= -1e-9 && dd.hermitian <= 1e-9);
            }
            bound21.le(std::abs(a.outputs(k, 0) - b.outputs(k, 0)), n * d1[k], 1e-12);
            bound21.le(std::abs(a.outputs(k, 1) - b.outputs(k, 1)), n * d2[k], 1e-12);
        }
        for (int j = 0; j < 2; ++j) {
            const QrcSubsystem& s = j == 0 ? pair.sub1 : pair.sub2;
            const std::vector<double>& d = j == 0 ? d1 : d2;
            const int other = j == 0 ? 1 : 0;
            double sup_v = 0.0, sup_w = 0.0;
            for (Index k = 1; k < H; ++k) {
                sup_v = std::max(sup_v, std::abs(a.outputs(k - 1, other) - b.outputs(k - 1, other)));
                sup_w = std::max(sup_w, std::abs(w(k - 1, 0) - wb(k - 1, 0)));
                const double bound = std::pow(s.eps_w + s.eps_v, static_cast<double>(k)) * d[0] +
                                     s.eps_v / s.eps_phi * kLogisticLipschitz * kChannelDifferenceBound * sup_v +
                                     s.eps_w / s.eps_phi * kLogisticLipschitz * kChannelDifferenceBound * sup_w;
                bound20.le(d[k], bound, 1e-12);
            }
        }
    }
    out.push_back(bound20.done("pointwise along paired 200-step rollouts"));
    out.push_back(bound21.done());
    out.push_back(phys.done());
    return out;
}

// ---------------------------------------------------------------- sysid

std::vector<PropertyOutcome> sysid_suite(const PropertyOptions& o)
{
    Rng rng(o.seed + 5);
    std::vector<PropertyOutcome> out;

    Tally ridge("sysid", "ols_residual_below_ridge_residual");
    for (int t = 0; t < trials(o, 100); ++t) {
        Mat F = rmat(rng, 60, 6);
        F.col(5).setOnes();
        const Vec y = rvec(rng, 60);
        const double r0 = (y - train_readout(F, y, 0.0).model.predict(F)).squaredNorm();
        const double r1 = (y - train_readout(F, y, log_uniform(rng, 1e-4, 1e2)).model.predict(F)).squaredNorm();
        ridge.le(r0, r1, 1e-12);
    }
    out.push_back(ridge.done());

    Tally fpe("sysid", "fpe_exceeds_mean_residual");
    for (int t = 0; t < trials(o, 1000); ++t) {
        const Index p = std::uniform_int_distribution<Index>(1, 50)(rng);
        const double S = log_uniform(rng, 1e-6, 1e3);
        fpe.check(compute_fpe(S, 1500, 500, p) > S / 1000.0);
    }
    out.push_back(fpe.done());

    DatasetConfig dc;
    dc.L = 300;
    dc.L_w = 100;
    dc.M = 4;
    dc.M1 = 3;
    dc.M_eval = 2;
    const Dataset ds = generate_lure_dataset(LurePlant::example(), ControllerDesign::example(), dc, o.seed);
    const CandidateGenerator gen = [](int n, std::uint64_t s) { return make_esn_model(n, s); };

    Tally repro("sysid", "predictions_reproducible");
    Tally order("sysid", "selection_order_invariant");
    for (int t = 0; t < trials(o, 2); ++t) {
        SelectionConfig sc;
        sc.sizes = {2, 3, 4};
        sc.N = 3;
        sc.base_seed = o.seed + t;
        const SelectionResult fwd = model_selection(gen, sc, ds);
        sc.sizes = {4, 3, 2};
        const SelectionResult rev = model_selection(gen, sc, ds);
        order.check(fwd.best.model.seed == rev.best.model.seed && fwd.best.fpe_total == rev.best.fpe_total);
        for (const IoSequence* s : ds.with_role(Role::eval)) {
            const Vec a = predict_sequence(fwd.model, fwd.readout, s->w, dc.L_w);
            const ReservoirModel again = gen(fwd.best.model.size, fwd.best.model.seed);
            const Vec b = predict_sequence(again, fwd.readout, s->w, dc.L_w);
            repro.check(a == b);
        }
    }
    out.push_back(repro.done());
    out.push_back(order.done());
    return out;
}

const std::map<std::string, std::function<std::vector<PropertyOutcome>(const PropertyOptions&)>>& registry()
{
    static const std::map<std::string, std::function<std::vector<PropertyOutcome>(const PropertyOptions&)>> r = {
        {"gains", gains_suite}, {"systems", systems_suite}, {"observer", observer_suite},
        {"esn", esn_suite},     {"qrc", qrc_suite},         {"sysid", sysid_suite},
    };
    return r;
}

}  // namespace

std::vector<std::string> property_suite_names()
{
    return {"gains", "systems", "observer", "esn", "qrc", "sysid"};
}

std::vector<PropertyOutcome> run_property_suite(const std::string& suite, const PropertyOptions& options)
{
    const auto it = registry().find(suite);
    if (it == registry().end()) throw std::invalid_argument("unknown property suite '" + suite + "'");
    return it->second(options);
}

std::vector<PropertyOutcome> run_all_property_suites(const PropertyOptions& options)
{
    std::vector<PropertyOutcome> all;
    for (const auto& name : property_suite_names()) {
        auto part = run_property_suite(name, options);
        all.insert(all.end(), part.begin(), part.end());
    }
    return all;
}

void to_json(nlohmann::json& j, const PropertyOutcome& o)
{
    j = {{"suite", o.suite},       {"name", o.name},   {"trials", o.trials},
         {"failures", o.failures}, {"worst", o.worst}, {"passed", o.passed()}};
    if (!o.detail.empty()) j["detail"] = o.detail;
}

}  // namespace smallgain
