#pragma once

// Black-box identification with interconnected reservoirs: data generation,
// washout, least-squares readout, FPE model selection and MSE evaluation.

#include "smallgain/esn.hpp"
#include "smallgain/observer.hpp"
#include "smallgain/qrc.hpp"
#include "smallgain/systems.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace smallgain {

enum class Role { train, select, eval };
const char* to_string(Role r);

struct IoSequence {
    Role role = Role::train;
    std::string input_spec;
    std::uint64_t seed = 0;
    Vec w;
    Vec y;
};

struct DatasetConfig {
    Index L = 1500;
    Index L_w = 500;
    int M = 10;
    int M1 = 8;
    int M_eval = 2;
    std::string train_input = "uniform(-2,2)";
    /// Eval sequence l' uses eval_inputs[l' − 1], cycling if M_eval is larger.
    std::vector<std::string> eval_inputs = {"uniform(-2,2)", "sinusoid(1,0.04,1,0.1)"};

    void validate() const;
};

struct Dataset {
    DatasetConfig config;
    std::uint64_t seed = 0;
    std::vector<IoSequence> sequences;

    std::vector<const IoSequence*> with_role(Role r) const;
};

/// Simulates `system` from a zero state (time k = 1..L, w fed to both
/// subsystems) and records y(k) = output_map · joint output.
Dataset generate_dataset(const FeedbackPair& system, const Eigen::RowVectorXd& output_map,
                         const DatasetConfig& config, std::uint64_t seed);

/// Dataset from the observer-controlled Lur'e plant with target y = C z.
Dataset generate_lure_dataset(const LurePlant& plant, const ControllerDesign& design, const DatasetConfig& config,
                              std::uint64_t seed);

/// A fixed reservoir plus its feature map; only the readout is trained.
struct ReservoirModel {
    std::string kind;
    int size = 0;
    std::uint64_t seed = 0;
    FeedbackPair loop;
    Vec initial_state;
    Index feature_count = 0;
    std::function<Vec(const Vec& joint_state)> features;
    MarginReport certificate;
    double lambda = 0.0;
    nlohmann::json parameters;

    /// Readout parameter count p (features + bias).
    Index parameter_count() const { return feature_count + 1; }
};

/// Rows k = L_w+1 … L of the features along the rollout driven by w, with a
/// trailing constant-1 column.
Mat collect_features(const ReservoirModel& model, const Vec& w, Index L_w);

struct ReadoutModel {
    Vec weights;
    double bias = 0.0;

    /// `features` includes the trailing bias column.
    Vec predict(const Mat& features) const;
};

struct TrainedReadout {
    ReadoutModel model;
    Index rank = 0;
    bool rank_deficient = false;
};

/// Least squares on [features | 1]. ridge = 0 is plain OLS (minimum-norm
/// solution via complete orthogonal decomposition when rank deficient);
/// ridge > 0 penalizes the weights but not the bias.
TrainedReadout train_readout(const Mat& features, const Vec& targets, double ridge = 0.0);

/// S/(L−L_w) · (L−L_w+p)/(L−L_w−p)
double compute_fpe(double residual_sq_sum, Index L, Index L_w, Index p);

struct ModelDescriptor {
    std::string kind;
    int size = 0;
    std::uint64_t seed = 0;
    Index p = 0;
};

struct ModelReport {
    ModelDescriptor model;
    std::vector<double> fpe_per_sequence;
    double fpe_total = 0.0;
    std::vector<double> mse_per_eval_sequence;
    MarginReport certificate;
    double lambda = 0.0;
};

using CandidateGenerator = std::function<ReservoirModel(int size, std::uint64_t seed)>;

struct SelectionConfig {
    std::vector<int> sizes;
    int N = 10;
    std::uint64_t base_seed = 1;
    double ridge = 0.0;
    int threads = 1;
};

/// Candidate seed for the i-th draw of a given size.
std::uint64_t candidate_seed(std::uint64_t base_seed, int size, int index);

struct SelectionResult {
    ModelReport best;
    ReadoutModel readout;
    ReservoirModel model;
    std::vector<ModelReport> candidates;
    bool rank_warning = false;
};

/// Trains every candidate on the train sequences, scores Σ FPE over the
/// select sequences, and returns the argmin (ties: smaller p, then smaller
/// seed). The selected report includes eval MSEs.
SelectionResult model_selection(const CandidateGenerator& generator, const SelectionConfig& config,
                                const Dataset& dataset);

/// Readout prediction for k = L_w+1 … L.
Vec predict_sequence(const ReservoirModel& model, const ReadoutModel& readout, const Vec& w, Index L_w);

std::vector<double> evaluate_mse(const ReservoirModel& model, const ReadoutModel& readout, const Dataset& dataset);

struct EsnModelConfig {
    double sigma_A = 0.5;
    double sigma_fb2 = 1.65;
    double lambda = 0.003;
    /// Chosen so the scaled loop gain is 0.99.
    double safety_margin = 1.0 - 0.99 * 1.003 * 1.003;
};

/// Equal-size ESN pair, feedback scaled to satisfy the small-gain inequality.
ReservoirModel make_esn_model(int n, std::uint64_t seed, const EsnModelConfig& config = {});

struct QrcModelConfig {
    QrcMixing mix1{0.25, 0.1, 0.65};
    QrcMixing mix2{0.1, 0.45, 0.45};
    double lambda = 0.019;
};

/// Equal-size QRC pair from reset state |0…0⟩; throws if the fixed mixing
/// weights violate the small-gain inequality for this size.
ReservoirModel make_qrc_model(int n, std::uint64_t seed, const QrcModelConfig& config = {});

void to_json(nlohmann::json& j, const ModelReport& r);
void to_json(nlohmann::json& j, const ReadoutModel& r);

/// Writes dataset/<role>_<l>.csv (k, w, y) and dataset/manifest.json.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

/// k, y, y_hat for k = L_w+1 … L.
void write_predictions_csv(const Vec& target, const Vec& prediction, Index L_w, const std::filesystem::path& path);

}  // namespace smallgain
