#include "smallgain/systems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smallgain {

namespace {

bool all_finite(const Vec& v) { return v.allFinite(); }

Vec row_or_empty(const Signal& s, Index k)
{
    if (s.cols() == 0) return Vec();
    return s.row(k).transpose();
}

void check_signal(const Signal& s, Index dim, Index horizon, const char* what)
{
    if (dim == 0) return;
    if (s.cols() != dim || s.rows() < horizon) {
        std::ostringstream os;
        os << what << ": expected at least " << horizon << " rows of width " << dim << ", got " << s.rows() << "x"
           << s.cols();
        throw std::invalid_argument(os.str());
    }
}

Vec checked(Vec v, Index dim, long k, const std::string& who, const char* what)
{
    if (v.size() != dim) {
        std::ostringstream os;
        os << who << ": " << what << " returned " << v.size() << " entries, expected " << dim;
        throw std::invalid_argument(os.str());
    }
    if (!all_finite(v)) {
        std::ostringstream os;
        os << who << ": non-finite " << what << " at step " << k;
        throw SimulationError(os.str(), k);
    }
    return v;
}

Vec eval_output(const SystemDef& sys, long k, const Vec& x, const Vec& v, const Vec& u)
{
    if (sys.direct_feedthrough) return checked(sys.output(k, x, v, u), sys.output_dim, k, sys.name, "output");
    return checked(sys.output(k, x, Vec::Zero(sys.loop_input_dim), u), sys.output_dim, k, sys.name, "output");
}

}  // namespace

void FeedbackPair::validate() const
{
    for (const SystemDef* s : {&sys1, &sys2}) {
        if (!s->update || !s->output) throw std::invalid_argument("system '" + s->name + "' is missing a map");
    }
    if (sys1.loop_input_dim != sys2.output_dim || sys2.loop_input_dim != sys1.output_dim) {
        std::ostringstream os;
        os << "feedback dimensions incompatible: v1 dim " << sys1.loop_input_dim << " vs y2 dim " << sys2.output_dim
           << ", v2 dim " << sys2.loop_input_dim << " vs y1 dim " << sys1.output_dim;
        throw std::invalid_argument(os.str());
    }
    if (loop.mode == LoopMode::strict_causal && sys1.direct_feedthrough && sys2.direct_feedthrough)
        throw std::invalid_argument("strict-causal loop mode needs at least one output without feedthrough");
    if (loop.mode == LoopMode::picard && (loop.max_iters < 1 || !(loop.tol > 0.0)))
        throw std::invalid_argument("picard loop mode needs max_iters >= 1 and tol > 0");
}

Vec FeedbackPair::draw_initial_state(std::mt19937_64& rng) const
{
    if (sample_initial_state) return sample_initial_state(rng);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vec x(state_dim());
    for (Index i = 0; i < x.size(); ++i) x(i) = dist(rng);
    return x;
}

double FeedbackPair::distance(const Vec& a, const Vec& b) const
{
    if (state_distance) return state_distance(a, b);
    return (a - b).norm();
}

Trajectory Trajectory::tail(Index first) const
{
    Trajectory t;
    const Index n = size() - first;
    t.t0 = t0 + static_cast<long>(first);
    t.states = states.bottomRows(n);
    t.outputs = outputs.bottomRows(n);
    t.inputs = inputs.bottomRows(n);
    return t;
}

Trajectory simulate(const SystemDef& sys, const Signal& u, const Signal& v, const Vec& x0, long t0, Index horizon)
{
    if (!sys.update || !sys.output) throw std::invalid_argument("system '" + sys.name + "' is missing a map");
    if (x0.size() != sys.state_dim) throw std::invalid_argument("initial state has wrong dimension");
    if (horizon < 0) throw std::invalid_argument("negative horizon");
    check_signal(u, sys.external_input_dim, horizon, "external input");
    check_signal(v, sys.loop_input_dim, horizon, "loop input");

    Trajectory traj;
    traj.t0 = t0;
    traj.states.resize(horizon, sys.state_dim);
    traj.outputs.resize(horizon, sys.output_dim);
    traj.inputs.resize(horizon, sys.external_input_dim);

    Vec x = checked(x0, sys.state_dim, t0, sys.name, "initial state");
    for (Index i = 0; i < horizon; ++i) {
        const long k = t0 + static_cast<long>(i);
        const Vec uk = row_or_empty(u, i);
        const Vec vk = sys.loop_input_dim ? row_or_empty(v, i) : Vec();
        traj.states.row(i) = x.transpose();
        traj.outputs.row(i) = eval_output(sys, k, x, vk, uk).transpose();
        if (uk.size()) traj.inputs.row(i) = uk.transpose();
        if (i + 1 < horizon) x = checked(sys.update(k, x, vk, uk), sys.state_dim, k + 1, sys.name, "state");
    }
    return traj;
}

std::pair<Vec, Vec> closed_loop_outputs(const FeedbackPair& pair, long k, const Vec& x1, const Vec& x2, const Vec& u1,
                                        const Vec& u2)
{
    const SystemDef& s1 = pair.sys1;
    const SystemDef& s2 = pair.sys2;
    if (pair.loop.mode == LoopMode::strict_causal) {
        if (!s2.direct_feedthrough) {
            Vec y2 = eval_output(s2, k, x2, Vec(), u2);
            Vec y1 = eval_output(s1, k, x1, y2, u1);
            return {std::move(y1), std::move(y2)};
        }
        Vec y1 = eval_output(s1, k, x1, Vec(), u1);
        Vec y2 = eval_output(s2, k, x2, y1, u2);
        return {std::move(y1), std::move(y2)};
    }

    Vec y1 = eval_output(s1, k, x1, Vec::Zero(s1.loop_input_dim), u1);
    Vec y2 = eval_output(s2, k, x2, Vec::Zero(s2.loop_input_dim), u2);
    double residual = 0.0;
    for (int it = 0; it < pair.loop.max_iters; ++it) {
        Vec n1 = eval_output(s1, k, x1, y2, u1);
        Vec n2 = eval_output(s2, k, x2, y1, u2);
        residual = 0.0;
        if (n1.size()) residual = std::max(residual, (n1 - y1).cwiseAbs().maxCoeff());
        if (n2.size()) residual = std::max(residual, (n2 - y2).cwiseAbs().maxCoeff());
        y1 = std::move(n1);
        y2 = std::move(n2);
        if (residual <= pair.loop.tol) return {std::move(y1), std::move(y2)};
    }
    std::ostringstream os;
    os << "output fixed-point iteration did not converge at step " << k << " (residual " << residual
       << "); interconnection may be ill-posed";
    throw SimulationError(os.str(), k);
}

Trajectory simulate_closed_loop(const FeedbackPair& pair, const Signal& u1, const Signal& u2, const Vec& x0, long t0,
                                Index horizon)
{
    pair.validate();
    const SystemDef& s1 = pair.sys1;
    const SystemDef& s2 = pair.sys2;
    const Index n1 = s1.state_dim;
    const Index n2 = s2.state_dim;
    if (x0.size() != n1 + n2) throw std::invalid_argument("joint initial state has wrong dimension");
    if (horizon < 0) throw std::invalid_argument("negative horizon");
    check_signal(u1, s1.external_input_dim, horizon, "u1");
    check_signal(u2, s2.external_input_dim, horizon, "u2");

    const Index m1 = s1.external_input_dim;
    const Index m2 = s2.external_input_dim;
    Trajectory traj;
    traj.t0 = t0;
    traj.states.resize(horizon, n1 + n2);
    traj.outputs.resize(horizon, s1.output_dim + s2.output_dim);
    traj.inputs.resize(horizon, m1 + m2);

    Vec x1 = checked(x0.head(n1), n1, t0, s1.name, "initial state");
    Vec x2 = checked(x0.tail(n2), n2, t0, s2.name, "initial state");
    for (Index i = 0; i < horizon; ++i) {
        const long k = t0 + static_cast<long>(i);
        const Vec a = row_or_empty(u1, i);
        const Vec b = row_or_empty(u2, i);
        auto [y1, y2] = closed_loop_outputs(pair, k, x1, x2, a, b);

        traj.states.row(i).head(n1) = x1.transpose();
        traj.states.row(i).tail(n2) = x2.transpose();
        traj.outputs.row(i).head(s1.output_dim) = y1.transpose();
        traj.outputs.row(i).tail(s2.output_dim) = y2.transpose();
        if (m1) traj.inputs.row(i).head(m1) = a.transpose();
        if (m2) traj.inputs.row(i).tail(m2) = b.transpose();

        if (i + 1 < horizon) {
            Vec nx1 = checked(s1.update(k, x1, y2, a), n1, k + 1, s1.name, "state");
            Vec nx2 = checked(s2.update(k, x2, y1, b), n2, k + 1, s2.name, "state");
            x1 = std::move(nx1);
            x2 = std::move(nx2);
        }
    }
    return traj;
}

Mat recompute_outputs(const SystemDef& sys, const Trajectory& traj, const Signal& v)
{
    Mat out(traj.size(), sys.output_dim);
    for (Index i = 0; i < traj.size(); ++i) {
        const long k = traj.t0 + static_cast<long>(i);
        const Vec vk = sys.loop_input_dim ? row_or_empty(v, i) : Vec();
        out.row(i) = eval_output(sys, k, traj.states.row(i).transpose(), vk, traj.inputs.row(i).transpose())
                         .transpose();
    }
    return out;
}

Mat recompute_outputs(const FeedbackPair& pair, const Trajectory& traj)
{
    const Index n1 = pair.sys1.state_dim;
    const Index m1 = pair.sys1.external_input_dim;
    Mat out(traj.size(), pair.output_dim());
    for (Index i = 0; i < traj.size(); ++i) {
        const long k = traj.t0 + static_cast<long>(i);
        const Vec x = traj.states.row(i).transpose();
        const Vec u = traj.inputs.row(i).transpose();
        auto [y1, y2] = closed_loop_outputs(pair, k, x.head(n1), x.tail(pair.sys2.state_dim), u.head(m1),
                                            u.tail(pair.sys2.external_input_dim));
        out.row(i).head(y1.size()) = y1.transpose();
        out.row(i).tail(y2.size()) = y2.transpose();
    }
    return out;
}

ReferenceEstimate estimate_reference_output(const FeedbackPair& pair, const Signal& u1, const Signal& u2,
                                            Index washout, double tol, int n_trials, std::uint64_t seed)
{
    const Index horizon = std::max(u1.rows(), u2.rows());
    if (washout >= horizon) throw std::invalid_argument("washout must be shorter than the horizon");
    if (n_trials < 1) throw std::invalid_argument("need at least one trial");
    std::mt19937_64 rng(seed);

    std::vector<Trajectory> runs;
    runs.reserve(n_trials);
    for (int t = 0; t < n_trials; ++t)
        runs.push_back(simulate_closed_loop(pair, u1, u2, pair.draw_initial_state(rng), 0, horizon));

    double dev = 0.0;
    for (int a = 0; a < n_trials; ++a)
        for (int b = a + 1; b < n_trials; ++b)
            for (Index i = washout; i < horizon; ++i)
                dev = std::max(dev, (runs[a].outputs.row(i) - runs[b].outputs.row(i)).norm());
    if (!(dev <= tol)) {
        std::ostringstream os;
        os << "convergence not observed: post-washout outputs differ by " << dev << " (tolerance " << tol << ")";
        throw ConvergenceError(os.str(), dev);
    }
    return {runs.front().tail(washout), dev};
}

ConvergenceReport verify_convergence(const FeedbackPair& pair, const Signal& u1, const Signal& u2,
                                     const std::vector<Vec>& initial_states, Index horizon, double tol)
{
    if (initial_states.size() < 2) throw std::invalid_argument("verify_convergence needs >= 2 initial states");
    std::vector<Trajectory> runs;
    runs.reserve(initial_states.size());
    for (const Vec& x0 : initial_states) runs.push_back(simulate_closed_loop(pair, u1, u2, x0, 0, horizon));

    ConvergenceReport rep;
    std::vector<double> s0;
    for (int a = 0; a < static_cast<int>(runs.size()); ++a) {
        for (int b = a + 1; b < static_cast<int>(runs.size()); ++b) {
            std::vector<double> dy(horizon), dx(horizon);
            for (Index i = 0; i < horizon; ++i) {
                dy[i] = (runs[a].outputs.row(i) - runs[b].outputs.row(i)).norm();
                dx[i] = pair.distance(runs[a].states.row(i).transpose(), runs[b].states.row(i).transpose());
            }
            rep.pairs.emplace_back(a, b);
            s0.push_back(dx.empty() ? 0.0 : dx.front());
            rep.final_output_difference = std::max(rep.final_output_difference, dy.empty() ? 0.0 : dy.back());
            rep.final_state_difference = std::max(rep.final_state_difference, dx.empty() ? 0.0 : dx.back());
            rep.output_differences.push_back(std::move(dy));
            rep.state_differences.push_back(std::move(dx));
        }
    }
    rep.fit = fit_kl_bound(rep.output_differences, s0);
    rep.converging = rep.fit.converging && rep.final_output_difference < tol;
    return rep;
}

double empirical_io_gain(const FeedbackPair& pair, const Signal& u1, const Signal& u2, const Signal& u1_bar,
                         const Signal& u2_bar, const Vec& x0, Index washout)
{
    if (u1.rows() != u1_bar.rows() || u2.rows() != u2_bar.rows() || u1.cols() != u1_bar.cols() ||
        u2.cols() != u2_bar.cols())
        throw std::invalid_argument("empirical_io_gain: input pairs must have equal shapes");
    const Index horizon = std::max(u1.rows(), u2.rows());
    if (washout >= horizon) throw std::invalid_argument("washout must be shorter than the horizon");
    const Trajectory a = simulate_closed_loop(pair, u1, u2, x0, 0, horizon);
    const Trajectory b = simulate_closed_loop(pair, u1_bar, u2_bar, x0, 0, horizon);
    double sup = 0.0;
    for (Index i = washout; i < horizon; ++i) sup = std::max(sup, (a.outputs.row(i) - b.outputs.row(i)).norm());
    return sup;
}

void to_json(nlohmann::json& j, const Trajectory& t)
{
    auto rows = [](const Mat& m) {
        nlohmann::json out = nlohmann::json::array();
        for (Index i = 0; i < m.rows(); ++i) {
            std::vector<double> r(m.cols());
            for (Index c = 0; c < m.cols(); ++c) r[c] = m(i, c);
            out.push_back(r);
        }
        return out;
    };
    j = {{"t0", t.t0}, {"states", rows(t.states)}, {"outputs", rows(t.outputs)}, {"inputs", rows(t.inputs)}};
}

}  // namespace smallgain
