#pragma once

// Discrete-time state machines, their output-feedback interconnection, and
// simulation-based convergence verifiers.

#include "smallgain/gains.hpp"
#include "smallgain/linalg.hpp"

#include "json.hpp"

#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smallgain {

/// Time-indexed signal: one row per step, one column per channel.
using Signal = Mat;

/// x(k+1) = update(k, x, v, u),  y(k) = output(k, x, v, u).
/// When `direct_feedthrough` is false the output map is always called with a
/// zero loop input, so y cannot depend on v.
struct SystemDef {
    using Map = std::function<Vec(long k, const Vec& x, const Vec& v, const Vec& u)>;

    std::string name;
    Index state_dim = 0;
    Index loop_input_dim = 0;
    Index external_input_dim = 0;
    Index output_dim = 0;
    Map update;
    Map output;
    bool direct_feedthrough = false;
};

enum class LoopMode { strict_causal, picard };

struct LoopConfig {
    LoopMode mode = LoopMode::strict_causal;
    int max_iters = 100;
    double tol = 1e-12;
};

/// Two systems wired as v1 = y2, v2 = y1. The joint state is [x1; x2], the
/// joint output [y1; y2].
struct FeedbackPair {
    SystemDef sys1;
    SystemDef sys2;
    LoopConfig loop;
    /// Draws a random admissible joint initial state; uniform on [-1, 1] when unset.
    std::function<Vec(std::mt19937_64&)> sample_initial_state;
    /// Distance between joint states; Euclidean when unset.
    std::function<double(const Vec&, const Vec&)> state_distance;

    Index state_dim() const { return sys1.state_dim + sys2.state_dim; }
    Index output_dim() const { return sys1.output_dim + sys2.output_dim; }
    void validate() const;
    Vec draw_initial_state(std::mt19937_64& rng) const;
    double distance(const Vec& a, const Vec& b) const;
};

struct Trajectory {
    long t0 = 0;
    Mat states;
    Mat outputs;
    Mat inputs;

    Index size() const { return states.rows(); }
    /// Rows [first, size()) with t0 shifted accordingly.
    Trajectory tail(Index first) const;
};

class SimulationError : public std::runtime_error {
public:
    SimulationError(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double max_deviation)
        : std::runtime_error(what), max_deviation_(max_deviation)
    {
    }
    double max_deviation() const { return max_deviation_; }

private:
    double max_deviation_;
};

/// Open-loop rollout of one system. `v` may be empty when the system has no
/// loop input.
Trajectory simulate(const SystemDef& sys, const Signal& u, const Signal& v, const Vec& x0, long t0,
                    Index horizon);

/// Closed-loop rollout; inputs u1, u2 must cover the horizon.
Trajectory simulate_closed_loop(const FeedbackPair& pair, const Signal& u1, const Signal& u2, const Vec& x0,
                                long t0, Index horizon);

/// Solves the per-step output equations of the interconnection.
std::pair<Vec, Vec> closed_loop_outputs(const FeedbackPair& pair, long k, const Vec& x1, const Vec& x2,
                                        const Vec& u1, const Vec& u2);

/// Outputs recomputed from stored states/inputs (open-loop: v as used in the run).
Mat recompute_outputs(const SystemDef& sys, const Trajectory& traj, const Signal& v);
Mat recompute_outputs(const FeedbackPair& pair, const Trajectory& traj);

struct ReferenceEstimate {
    /// Post-washout segment of the first trial.
    Trajectory reference;
    double max_deviation = 0.0;
};

/// Forgetting-based estimate of the reference output: simulates `n_trials`
/// random initial states and requires their post-washout outputs to agree
/// within `tol`. Throws ConvergenceError otherwise.
ReferenceEstimate estimate_reference_output(const FeedbackPair& pair, const Signal& u1, const Signal& u2,
                                            Index washout, double tol, int n_trials, std::uint64_t seed);

struct ConvergenceReport {
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::vector<double>> output_differences;
    std::vector<std::vector<double>> state_differences;
    KLFit fit;
    double final_output_difference = 0.0;
    double final_state_difference = 0.0;
    bool converging = false;
};

/// Simulates every initial state under the same inputs and fits a KL bound to
/// the pairwise output differences.
ConvergenceReport verify_convergence(const FeedbackPair& pair, const Signal& u1, const Signal& u2,
                                     const std::vector<Vec>& initial_states, Index horizon, double tol = 1e-6);

/// sup over k ≥ washout of ‖y(k) − ȳ(k)‖ for two input pairs from the same x0.
double empirical_io_gain(const FeedbackPair& pair, const Signal& u1, const Signal& u2, const Signal& u1_bar,
                         const Signal& u2_bar, const Vec& x0, Index washout);

void to_json(nlohmann::json& j, const Trajectory& t);

}  // namespace smallgain
