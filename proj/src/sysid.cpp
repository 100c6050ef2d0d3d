#include "smallgain/sysid.hpp"

#include "smallgain/signals.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace smallgain {

const char* to_string(Role r)
{
    switch (r) {
    case Role::train: return "train";
    case Role::select: return "select";
    case Role::eval: return "eval";
    }
    return "?";
}

namespace {

Role role_from(const std::string& s)
{
    if (s == "train") return Role::train;
    if (s == "select") return Role::select;
    if (s == "eval") return Role::eval;
    throw std::invalid_argument("unknown sequence role '" + s + "'");
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream)
{
    // splitmix64 step
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

void DatasetConfig::validate() const
{
    if (L_w < 0 || L_w >= L) throw std::invalid_argument("dataset: need 0 <= L_w < L");
    if (M1 < 1 || M1 >= M) throw std::invalid_argument("dataset: need 1 <= M1 < M");
    if (M_eval < 0) throw std::invalid_argument("dataset: M_eval must be nonnegative");
    if (M_eval > 0 && eval_inputs.empty()) throw std::invalid_argument("dataset: eval_inputs must be nonempty");
}

std::vector<const IoSequence*> Dataset::with_role(Role r) const
{
    std::vector<const IoSequence*> out;
    for (const auto& s : sequences)
        if (s.role == r) out.push_back(&s);
    return out;
}

Dataset generate_dataset(const FeedbackPair& system, const Eigen::RowVectorXd& output_map,
                         const DatasetConfig& config, std::uint64_t seed)
{
    config.validate();
    if (output_map.size() != system.output_dim()) throw std::invalid_argument("output map width mismatch");
    if (system.sys1.external_input_dim != 1 || system.sys2.external_input_dim != 1)
        throw std::invalid_argument("dataset generation expects a scalar input shared by both subsystems");

    Dataset ds;
    ds.config = config;
    ds.seed = seed;
    const Vec x0 = Vec::Zero(system.state_dim());
    auto add = [&](Role role, const std::string& spec, std::uint64_t s) {
        IoSequence seq;
        seq.role = role;
        seq.input_spec = spec;
        seq.seed = s;
        seq.w = make_signal(spec, config.L, s, 1);
        const Signal u = seq.w;
        const Trajectory t = simulate_closed_loop(system, u, u, x0, 1, config.L);
        seq.y = t.outputs * output_map.transpose();
        ds.sequences.push_back(std::move(seq));
    };
    for (int l = 0; l < config.M; ++l)
        add(l < config.M1 ? Role::train : Role::select, config.train_input, mix_seed(seed, l));
    for (int l = 0; l < config.M_eval; ++l)
        add(Role::eval, config.eval_inputs[l % config.eval_inputs.size()], mix_seed(seed, 1000 + l));
    return ds;
}

Dataset generate_lure_dataset(const LurePlant& plant, const ControllerDesign& design, const DatasetConfig& config,
                              std::uint64_t seed)
{
    Eigen::RowVectorXd map = Eigen::RowVectorXd::Zero(4);
    map.head(2) = plant.C;
    return generate_dataset(build_observer_closed_loop(plant, design), map, config, seed);
}

Mat collect_features(const ReservoirModel& model, const Vec& w, Index L_w)
{
    const Index L = w.size();
    if (L_w < 0 || L_w >= L) throw std::invalid_argument("collect_features: need 0 <= L_w < L");
    const Signal u = w;
    const Trajectory t = simulate_closed_loop(model.loop, u, u, model.initial_state, 1, L);
    Mat f(L - L_w, model.feature_count + 1);
    for (Index i = L_w; i < L; ++i) {
        const Vec row = model.features(t.states.row(i).transpose());
        if (row.size() != model.feature_count) throw std::logic_error("feature map width mismatch");
        f.row(i - L_w).head(model.feature_count) = row.transpose();
        f(i - L_w, model.feature_count) = 1.0;
    }
    return f;
}

Vec ReadoutModel::predict(const Mat& features) const
{
    if (features.cols() != weights.size() + 1) throw std::invalid_argument("feature matrix width mismatch");
    return features.leftCols(weights.size()) * weights + Vec::Constant(features.rows(), bias);
}

TrainedReadout train_readout(const Mat& features, const Vec& targets, double ridge)
{
    if (!(ridge >= 0.0)) throw std::invalid_argument("ridge must be nonnegative");
    if (features.rows() != targets.size()) throw std::invalid_argument("feature rows and targets differ in length");
    if (features.cols() < 1) throw std::invalid_argument("need at least the bias column");
    if (features.rows() < features.cols()) throw std::invalid_argument("fewer rows than readout parameters");

    const Index p = features.cols();
    TrainedReadout out;
    Vec theta;
    if (ridge == 0.0) {
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(features);
        out.rank = cod.rank();
        theta = cod.solve(targets);
    } else {
        Mat aug = Mat::Zero(features.rows() + p - 1, p);
        aug.topRows(features.rows()) = features;
        aug.bottomLeftCorner(p - 1, p - 1) = std::sqrt(ridge) * Mat::Identity(p - 1, p - 1);
        Vec rhs = Vec::Zero(aug.rows());
        rhs.head(targets.size()) = targets;
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(aug);
        out.rank = cod.rank();
        theta = cod.solve(rhs);
    }
    out.rank_deficient = out.rank < p;
    out.model.weights = theta.head(p - 1);
    out.model.bias = theta(p - 1);
    if (!out.model.weights.allFinite() || !std::isfinite(out.model.bias))
        throw std::runtime_error("least-squares readout produced non-finite weights");
    return out;
}

double compute_fpe(double residual_sq_sum, Index L, Index L_w, Index p)
{
    const Index n = L - L_w;
    if (p < 0) throw std::invalid_argument("parameter count must be nonnegative");
    if (n <= p) throw std::invalid_argument("FPE needs L - L_w > p");
    const double nn = static_cast<double>(n);
    const double pp = static_cast<double>(p);
    return residual_sq_sum / nn * (nn + pp) / (nn - pp);
}

std::uint64_t candidate_seed(std::uint64_t base_seed, int size, int index)
{
    return base_seed + 1000ULL * static_cast<std::uint64_t>(size) + static_cast<std::uint64_t>(index);
}

Vec predict_sequence(const ReservoirModel& model, const ReadoutModel& readout, const Vec& w, Index L_w)
{
    return readout.predict(collect_features(model, w, L_w));
}

std::vector<double> evaluate_mse(const ReservoirModel& model, const ReadoutModel& readout, const Dataset& dataset)
{
    const Index L_w = dataset.config.L_w;
    std::vector<double> out;
    for (const IoSequence* s : dataset.with_role(Role::eval)) {
        const Vec yhat = predict_sequence(model, readout, s->w, L_w);
        const Vec y = s->y.tail(yhat.size());
        out.push_back((y - yhat).squaredNorm() / static_cast<double>(yhat.size()));
    }
    return out;
}

namespace {

struct CandidateOutcome {
    ModelReport report;
    ReadoutModel readout;
    bool rank_deficient = false;
};

CandidateOutcome score_candidate(const ReservoirModel& model, const Dataset& ds, double ridge)
{
    const Index L = ds.config.L;
    const Index L_w = ds.config.L_w;
    const auto train = ds.with_role(Role::train);
    const Index rows = L - L_w;

    Mat X(rows * static_cast<Index>(train.size()), model.feature_count + 1);
    Vec y(X.rows());
    for (std::size_t l = 0; l < train.size(); ++l) {
        X.middleRows(static_cast<Index>(l) * rows, rows) = collect_features(model, train[l]->w, L_w);
        y.segment(static_cast<Index>(l) * rows, rows) = train[l]->y.tail(rows);
    }
    const TrainedReadout tr = train_readout(X, y, ridge);

    CandidateOutcome out;
    out.readout = tr.model;
    out.rank_deficient = tr.rank_deficient;
    out.report.model = {model.kind, model.size, model.seed, model.parameter_count()};
    out.report.certificate = model.certificate;
    out.report.lambda = model.lambda;
    for (const IoSequence* s : ds.with_role(Role::select)) {
        const Vec yhat = tr.model.predict(collect_features(model, s->w, L_w));
        const double S = (s->y.tail(rows) - yhat).squaredNorm();
        out.report.fpe_per_sequence.push_back(compute_fpe(S, L, L_w, model.parameter_count()));
    }
    for (double f : out.report.fpe_per_sequence) out.report.fpe_total += f;
    return out;
}

bool better(const ModelReport& a, const ModelReport& b)
{
    if (a.fpe_total != b.fpe_total) return a.fpe_total < b.fpe_total;
    if (a.model.p != b.model.p) return a.model.p < b.model.p;
    return a.model.seed < b.model.seed;
}

}  // namespace

SelectionResult model_selection(const CandidateGenerator& generator, const SelectionConfig& config,
                                const Dataset& dataset)
{
    if (config.sizes.empty() || config.N < 1) throw std::invalid_argument("model selection needs sizes and N >= 1");
    dataset.config.validate();

    std::vector<std::pair<int, std::uint64_t>> jobs;
    for (int size : config.sizes)
        for (int i = 0; i < config.N; ++i) jobs.emplace_back(size, candidate_seed(config.base_seed, size, i));

    std::vector<CandidateOutcome> outcomes(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                const ReservoirModel m = generator(jobs[j].first, jobs[j].second);
                outcomes[j] = score_candidate(m, dataset, config.ridge);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    const int threads = std::clamp(config.threads, 1, static_cast<int>(jobs.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::size_t best = 0;
    for (std::size_t j = 1; j < outcomes.size(); ++j)
        if (better(outcomes[j].report, outcomes[best].report)) best = j;

    SelectionResult res;
    for (const auto& o : outcomes) {
        res.candidates.push_back(o.report);
        res.rank_warning = res.rank_warning || o.rank_deficient;
    }
    res.model = generator(jobs[best].first, jobs[best].second);
    res.readout = outcomes[best].readout;
    res.best = outcomes[best].report;
    res.best.mse_per_eval_sequence = evaluate_mse(res.model, res.readout, dataset);
    return res;
}

ReservoirModel make_esn_model(int n, std::uint64_t seed, const EsnModelConfig& config)
{
    EsnPair pair = generate_esn(n, n, config.sigma_A, config.sigma_fb2, seed);
    pair = scale_feedback_for_small_gain(pair, config.lambda, config.safety_margin);
    ReservoirModel m;
    m.kind = "esn";
    m.size = n;
    m.seed = seed;
    m.loop = build_esn_closed_loop(pair);
    m.initial_state = Vec::Zero(2 * n);
    m.feature_count = 2 * n;
    m.features = [](const Vec& x) { return x; };
    m.certificate = esn_small_gain_margin(pair, config.lambda);
    m.lambda = config.lambda;
    if (!m.certificate.holds) throw std::logic_error("ESN candidate failed its small-gain certificate");
    m.parameters = {{"sigma_A1", pair.sub1.sigma_A},  {"sigma_A2", pair.sub2.sigma_A},
                    {"sigma_fb1", pair.sub1.sigma_fb}, {"sigma_fb2", pair.sub2.sigma_fb},
                    {"norm_B1", pair.sub1.norm_B},     {"norm_B2", pair.sub2.norm_B}};
    return m;
}

ReservoirModel make_qrc_model(int n, std::uint64_t seed, const QrcModelConfig& config)
{
    const QrcPair pair = make_qrc_pair(n, n, config.mix1, config.mix2, seed);
    ReservoirModel m;
    m.kind = "qrc";
    m.size = n;
    m.seed = seed;
    m.certificate = qrc_small_gain_margin(pair, config.lambda);
    m.lambda = config.lambda;
    if (!m.certificate.holds) {
        std::ostringstream os;
        os << "QRC mixing weights violate the small-gain inequality for n = " << n << " (lhs " << m.certificate.lhs
           << ", rhs " << m.certificate.rhs << ")";
        throw std::invalid_argument(os.str());
    }
    m.loop = build_qrc_closed_loop(pair);
    m.initial_state = join_qrc_state(pair.sub1.phi, pair.sub2.phi);
    m.feature_count = 2 * n;
    m.features = [pair](const Vec& x) {
        auto [r1, r2] = split_qrc_state(pair, x);
        return readout_features(r1, pair.sub1.n_qubits, r2, pair.sub2.n_qubits);
    };
    m.parameters = {{"sub1", pair.sub1}, {"sub2", pair.sub2}};
    return m;
}

void to_json(nlohmann::json& j, const ModelReport& r)
{
    j = {{"model", {{"kind", r.model.kind}, {"size", r.model.size}, {"seed", r.model.seed}, {"p", r.model.p}}},
         {"fpe_per_sequence", r.fpe_per_sequence},
         {"fpe_total", r.fpe_total},
         {"mse_per_eval_sequence", r.mse_per_eval_sequence},
         {"certificate", {{"lhs", r.certificate.lhs}, {"rhs", r.certificate.rhs}, {"holds", r.certificate.holds}}},
         {"lambda", r.lambda}};
}

void to_json(nlohmann::json& j, const ReadoutModel& r)
{
    j = {{"weights", std::vector<double>(r.weights.data(), r.weights.data() + r.weights.size())}, {"bias", r.bias}};
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["seed"] = dataset.seed;
    manifest["config"] = {{"L", dataset.config.L},   {"L_w", dataset.config.L_w},         {"M", dataset.config.M},
                          {"M1", dataset.config.M1}, {"M_eval", dataset.config.M_eval},
                          {"train_input", dataset.config.train_input},
                          {"eval_inputs", dataset.config.eval_inputs}};
    manifest["sequences"] = nlohmann::json::array();
    int counter[3] = {0, 0, 0};
    for (const auto& s : dataset.sequences) {
        const int idx = ++counter[static_cast<int>(s.role)];
        const std::string file = std::string(to_string(s.role)) + "_" + std::to_string(idx) + ".csv";
        std::ofstream out(dir / file);
        if (!out) throw std::runtime_error("cannot write " + (dir / file).string());
        out.precision(17);
        out << "k,w,y\n";
        for (Index i = 0; i < s.w.size(); ++i) out << i + 1 << ',' << s.w(i) << ',' << s.y(i) << '\n';
        manifest["sequences"].push_back(
            {{"file", file}, {"role", to_string(s.role)}, {"input", s.input_spec}, {"seed", s.seed}});
    }
    std::ofstream m(dir / "manifest.json");
    m << manifest.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& dir)
{
    std::ifstream in(dir / "manifest.json");
    if (!in) throw std::runtime_error("cannot open " + (dir / "manifest.json").string());
    const nlohmann::json manifest = nlohmann::json::parse(in);
    Dataset ds;
    ds.seed = manifest.at("seed").get<std::uint64_t>();
    const auto& c = manifest.at("config");
    ds.config.L = c.at("L").get<Index>();
    ds.config.L_w = c.at("L_w").get<Index>();
    ds.config.M = c.at("M").get<int>();
    ds.config.M1 = c.at("M1").get<int>();
    ds.config.M_eval = c.at("M_eval").get<int>();
    ds.config.train_input = c.at("train_input").get<std::string>();
    ds.config.eval_inputs = c.at("eval_inputs").get<std::vector<std::string>>();
    for (const auto& e : manifest.at("sequences")) {
        const Signal s = load_signal_csv(dir / e.at("file").get<std::string>());
        if (s.cols() != 3) throw std::runtime_error("dataset CSV must have columns k,w,y");
        IoSequence seq;
        seq.role = role_from(e.at("role").get<std::string>());
        seq.input_spec = e.at("input").get<std::string>();
        seq.seed = e.at("seed").get<std::uint64_t>();
        seq.w = s.col(1);
        seq.y = s.col(2);
        ds.sequences.push_back(std::move(seq));
    }
    return ds;
}

void write_predictions_csv(const Vec& target, const Vec& prediction, Index L_w, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    out << "k,y,y_hat\n";
    const Vec y = target.tail(prediction.size());
    for (Index i = 0; i < prediction.size(); ++i) out << L_w + 1 + i << ',' << y(i) << ',' << prediction(i) << '\n';
}

}  // namespace smallgain
