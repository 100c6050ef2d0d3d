#include "smallgain/experiment.hpp"

#include "smallgain/signals.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

namespace smallgain {

namespace {

std::string join(const std::vector<std::string>& v, const std::string& sep)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
    return s;
}

std::string fmt(double x, int precision = 6)
{
    std::ostringstream os;
    os << std::setprecision(precision) << x;
    return os.str();
}

/// Collects field-level problems while overlaying JSON on a config.
class Reader {
public:
    std::vector<std::string> issues;

    /// Checks `j` is an object and reports keys outside `allowed`.
    bool object(const nlohmann::json& j, const std::string& path, const std::set<std::string>& allowed)
    {
        if (!j.is_object()) {
            issues.push_back(path + ": expected an object");
            return false;
        }
        for (const auto& [key, value] : j.items())
            if (!allowed.count(key)) issues.push_back(join_path(path, key) + ": unknown field");
        return true;
    }

    template <class T>
    void get(const nlohmann::json& j, const std::string& key, T& target, const std::string& path)
    {
        if (!j.contains(key)) return;
        try {
            target = j.at(key).get<T>();
        } catch (const std::exception& e) {
            issues.push_back(join_path(path, key) + ": " + short_what(e));
        }
    }

    static std::string join_path(const std::string& path, const std::string& key)
    {
        return path.empty() ? key : path + "." + key;
    }

    static std::string short_what(const std::exception& e)
    {
        std::string w = e.what();
        const auto pos = w.find("] ");
        return pos == std::string::npos ? w : w.substr(pos + 2);
    }
};

QrcMixing mixing_from(const std::vector<double>& v)
{
    if (v.size() != 3) throw std::invalid_argument("expected [eps_w, eps_v, eps_phi]");
    return {v[0], v[1], v[2]};
}

void read_observer(Reader& r, const nlohmann::json& j, ObserverDemoConfig& c)
{
    const std::string path = "observer";
    if (!r.object(j, path,
                  {"plant", "design", "theta", "eps", "lmi", "n_initial_conditions", "horizon", "tol", "initial_box",
                   "disturbances"}))
        return;
    r.get(j, "plant", c.plant, path);
    r.get(j, "design", c.design, path);
    r.get(j, "theta", c.theta, path);
    r.get(j, "eps", c.eps, path);
    r.get(j, "n_initial_conditions", c.n_initial_conditions, path);
    r.get(j, "horizon", c.horizon, path);
    r.get(j, "tol", c.tol, path);
    r.get(j, "initial_box", c.initial_box, path);
    r.get(j, "disturbances", c.disturbances, path);
    if (j.contains("lmi")) {
        const auto& l = j.at("lmi");
        const std::string lp = "observer.lmi";
        if (r.object(l, lp, {"restarts", "max_evaluations", "margin", "tol", "seed"})) {
            r.get(l, "restarts", c.lmi.restarts, lp);
            r.get(l, "max_evaluations", c.lmi.max_evaluations, lp);
            r.get(l, "margin", c.lmi.margin, lp);
            r.get(l, "tol", c.lmi.tol, lp);
            r.get(l, "seed", c.lmi.seed, lp);
        }
    }
}

void read_sysid(Reader& r, const nlohmann::json& j, SysidConfig& c)
{
    const std::string path = "sysid";
    if (!r.object(j, path, {"dataset", "sizes", "N", "ridge", "esn", "qrc"})) return;
    r.get(j, "sizes", c.sizes, path);
    r.get(j, "N", c.N, path);
    r.get(j, "ridge", c.ridge, path);
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        const std::string dp = "sysid.dataset";
        if (r.object(d, dp, {"L", "L_w", "M", "M1", "M_eval", "train_input", "eval_inputs"})) {
            r.get(d, "L", c.dataset.L, dp);
            r.get(d, "L_w", c.dataset.L_w, dp);
            r.get(d, "M", c.dataset.M, dp);
            r.get(d, "M1", c.dataset.M1, dp);
            r.get(d, "M_eval", c.dataset.M_eval, dp);
            r.get(d, "train_input", c.dataset.train_input, dp);
            r.get(d, "eval_inputs", c.dataset.eval_inputs, dp);
        }
    }
    if (j.contains("esn")) {
        const auto& e = j.at("esn");
        const std::string ep = "sysid.esn";
        if (r.object(e, ep, {"sigma_A", "sigma_fb2", "lambda", "safety_margin"})) {
            r.get(e, "sigma_A", c.esn.sigma_A, ep);
            r.get(e, "sigma_fb2", c.esn.sigma_fb2, ep);
            r.get(e, "lambda", c.esn.lambda, ep);
            r.get(e, "safety_margin", c.esn.safety_margin, ep);
        }
    }
    if (j.contains("qrc")) {
        const auto& q = j.at("qrc");
        const std::string qp = "sysid.qrc";
        if (r.object(q, qp, {"mix1", "mix2", "lambda"})) {
            for (const char* key : {"mix1", "mix2"}) {
                if (!q.contains(key)) continue;
                try {
                    (std::string(key) == "mix1" ? c.qrc.mix1 : c.qrc.mix2) =
                        mixing_from(q.at(key).get<std::vector<double>>());
                } catch (const std::exception& e) {
                    r.issues.push_back(Reader::join_path(qp, key) + ": " + Reader::short_what(e));
                }
            }
            r.get(q, "lambda", c.qrc.lambda, qp);
        }
    }
}

bool signal_spec_ok(const std::string& spec, std::string& why)
{
    try {
        make_signal(spec, 1, 0);
        return true;
    } catch (const std::exception& e) {
        why = e.what();
        return false;
    }
}

std::string slug(const std::string& spec)
{
    const auto pos = spec.find('(');
    return pos == std::string::npos ? spec : spec.substr(0, pos);
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- observer-demo

ExperimentResult run_observer_demo(const ExperimentConfig& cfg)
{
    const ObserverDemoConfig& c = cfg.observer;
    ExperimentResult res;
    nlohmann::json& rep = res.report;

    const double lambda_s = compute_lambda_s(c.plant, c.design.K);
    rep["lambda_s"] = {{"value", lambda_s}, {"uc_certified", lambda_s < 1.0}};
    res.summary.push_back("lambda_s            " + fmt(lambda_s) + (lambda_s < 1.0 ? "  (< 1)" : "  (>= 1)"));

    const Eigen::Matrix2d Ao = c.plant.A - c.design.L * c.plant.C;
    const double radius = Ao.eigenvalues().cwiseAbs().maxCoeff();
    rep["observer_error_spectral_radius"] = radius;

    const LmiSearchResult lmi = search_lmi_feasible(c.plant, c.design.L, c.theta, c.eps, c.lmi);
    rep["lmi"] = {{"theta", c.theta},
                  {"eps", c.eps},
                  {"feasible", lmi.feasible},
                  {"best_objective", lmi.best_objective},
                  {"restarts_used", lmi.restarts_used},
                  {"evaluations", lmi.evaluations},
                  {"certificate", lmi.best},
                  {"theta_lower_bound", radius * radius}};
    res.summary.push_back("LMI theta=" + fmt(c.theta) + " eps=" + fmt(c.eps) + "  " +
                          (lmi.feasible ? "feasible" : "not found") + "  (best objective " +
                          fmt(lmi.best_objective) + ", needs theta >= " + fmt(radius * radius) + ")");

    // Smallest θ on a bisection grid for which the same search succeeds.
    double lo = c.theta, hi = 0.999;
    LmiSearchResult hi_res = lmi.feasible ? lmi : search_lmi_feasible(c.plant, c.design.L, hi, c.eps, c.lmi);
    if (lmi.feasible) {
        hi = c.theta;
    } else if (hi_res.feasible) {
        for (int it = 0; it < 20 && hi - lo > 1e-4; ++it) {
            const double mid = 0.5 * (lo + hi);
            const LmiSearchResult m = search_lmi_feasible(c.plant, c.design.L, mid, c.eps, c.lmi);
            if (m.feasible) {
                hi = mid;
                hi_res = m;
            } else {
                lo = mid;
            }
        }
    }
    if (hi_res.feasible) {
        rep["lmi_smallest_feasible_theta"] = {{"theta", hi}, {"certificate", hi_res.best}};
        res.summary.push_back("LMI smallest theta  " + fmt(hi) + "  (certificate found)");
    } else {
        rep["lmi_smallest_feasible_theta"] = nullptr;
        res.summary.push_back("LMI smallest theta  none found below 0.999");
    }

    const FeedbackPair loop = build_observer_closed_loop(c.plant, c.design);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> box(-c.initial_box, c.initial_box);
    std::vector<Vec> inits;
    for (int i = 0; i < c.n_initial_conditions; ++i) {
        Vec x(loop.state_dim());
        for (Index k = 0; k < x.size(); ++k) x(k) = box(rng);
        inits.push_back(x);
    }
    rep["initial_states"] = nlohmann::json::array();
    for (const Vec& x : inits) rep["initial_states"].push_back(std::vector<double>(x.data(), x.data() + x.size()));

    const auto traj_dir = cfg.out / "trajectories";
    std::filesystem::create_directories(traj_dir);
    rep["convergence"] = nlohmann::json::array();
    for (std::size_t d = 0; d < c.disturbances.size(); ++d) {
        const std::string& spec = c.disturbances[d];
        const Signal w = make_signal(spec, c.horizon, cfg.seed + 1 + d, 0);
        const ConvergenceReport cr = verify_convergence(loop, w, w, inits, c.horizon, c.tol);
        rep["convergence"].push_back({{"disturbance", spec},
                                      {"converging", cr.converging},
                                      {"kl_c", cr.fit.bound.c},
                                      {"kl_r", cr.fit.bound.r},
                                      {"final_output_difference", cr.final_output_difference},
                                      {"final_state_difference", cr.final_state_difference}});
        res.summary.push_back("disturbance " + spec + "  " + (cr.converging ? "converging" : "NOT converging") +
                              "  r=" + fmt(cr.fit.bound.r, 4) + "  final diff " + fmt(cr.final_state_difference, 3));
        for (std::size_t i = 0; i < inits.size(); ++i) {
            const Trajectory t = simulate_closed_loop(loop, w, w, inits[i], 0, c.horizon);
            write_trajectory_csv(t, traj_dir / ("w" + std::to_string(d + 1) + "_" + slug(spec) + "_init" +
                                                std::to_string(i + 1) + ".csv"));
        }
    }
    return res;
}

// ---------------------------------------------------------------- sysid

ExperimentResult run_sysid(const ExperimentConfig& cfg, bool qrc)
{
    const SysidConfig& c = cfg.sysid;
    ExperimentResult res;
    nlohmann::json& rep = res.report;

    const Dataset ds = generate_lure_dataset(cfg.observer.plant, cfg.observer.design, c.dataset, cfg.seed);
    write_dataset(ds, cfg.out / "dataset");
    rep["dataset"] = {{"manifest", "dataset/manifest.json"}, {"sequences", ds.sequences.size()}};

    CandidateGenerator gen;
    if (qrc) {
        const QrcModelConfig qc = c.qrc;
        gen = [qc](int n, std::uint64_t s) { return make_qrc_model(n, s, qc); };
    } else {
        const EsnModelConfig ec = c.esn;
        gen = [ec](int n, std::uint64_t s) { return make_esn_model(n, s, ec); };
    }
    SelectionConfig sc;
    sc.sizes = c.sizes;
    sc.N = c.N;
    sc.base_seed = cfg.seed;
    sc.ridge = c.ridge;
    sc.threads = cfg.threads;
    const SelectionResult sel = model_selection(gen, sc, ds);

    rep["candidates"] = sel.candidates;
    rep["selected"] = sel.best;
    rep["selected"]["parameters"] = sel.model.parameters;
    rep["readout"] = sel.readout;
    rep["rank_deficient_readout"] = sel.rank_warning;

    const auto pred_dir = cfg.out / "predictions";
    std::filesystem::create_directories(pred_dir);
    int counter[3] = {0, 0, 0};
    for (const IoSequence& s : ds.sequences) {
        if (s.role == Role::train) continue;
        const int idx = ++counter[static_cast<int>(s.role)];
        const Vec yhat = predict_sequence(sel.model, sel.readout, s.w, c.dataset.L_w);
        write_predictions_csv(s.y, yhat, c.dataset.L_w,
                              pred_dir / (std::string(to_string(s.role)) + "_" + std::to_string(idx) + ".csv"));
    }

    res.summary.push_back("size  best FPE      (N=" + std::to_string(c.N) + " per size)");
    for (int n : c.sizes) {
        double best = std::numeric_limits<double>::infinity();
        for (const ModelReport& m : sel.candidates)
            if (m.model.size == n) best = std::min(best, m.fpe_total);
        std::ostringstream os;
        os << std::setw(4) << n << "  " << fmt(best);
        res.summary.push_back(os.str());
    }
    std::vector<std::string> mses;
    for (double m : sel.best.mse_per_eval_sequence) mses.push_back(fmt(m));
    res.summary.push_back("selected " + sel.best.model.kind + " n=" + std::to_string(sel.best.model.size) +
                          " seed=" + std::to_string(sel.best.model.seed) + " p=" + std::to_string(sel.best.model.p));
    res.summary.push_back("FPE " + fmt(sel.best.fpe_total) + "   eval MSE " + join(mses, " / "));
    res.summary.push_back("small-gain lhs " + fmt(sel.best.certificate.lhs) + " < rhs " +
                          fmt(sel.best.certificate.rhs) + " (lambda " + fmt(sel.best.lambda) + ")");
    if (sel.rank_warning) res.summary.push_back("warning: rank-deficient readout design; minimum-norm solution used");
    return res;
}

// ---------------------------------------------------------------- verify

ExperimentResult run_verify(const ExperimentConfig& cfg)
{
    ExperimentResult res;
    const std::vector<PropertyOutcome> outcomes = run_all_property_suites(cfg.properties);
    int passed = 0;
    for (const auto& o : outcomes) {
        passed += o.passed() ? 1 : 0;
        res.summary.push_back(std::string(o.passed() ? "PASS  " : "FAIL  ") + o.suite + "/" + o.name + "  (" +
                              std::to_string(o.trials - o.failures) + "/" + std::to_string(o.trials) + ")");
    }
    res.summary.push_back(std::to_string(passed) + " passed, " + std::to_string(outcomes.size() - passed) +
                          " failed");
    res.report["properties"] = outcomes;
    res.report["passed"] = passed;
    res.report["failed"] = static_cast<int>(outcomes.size()) - passed;
    res.ok = passed == static_cast<int>(outcomes.size());
    return res;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::invalid_argument("invalid configuration: " + join(issues, "; ")), issues_(std::move(issues))
{
}

std::vector<std::string> experiment_kinds() { return {"observer-demo", "esn-sysid", "qrc-sysid", "verify"}; }

std::vector<std::string> preset_names() { return {"full", "fast"}; }

ExperimentConfig preset_config(const std::string& kind, const std::string& preset)
{
    std::vector<std::string> issues;
    const auto kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
        issues.push_back("kind: unknown experiment '" + kind + "' (expected " + join(kinds, ", ") + ")");
    const auto presets = preset_names();
    if (std::find(presets.begin(), presets.end(), preset) == presets.end())
        issues.push_back("preset: unknown preset '" + preset + "' (expected " + join(presets, ", ") + ")");
    if (!issues.empty()) throw ConfigError(issues);

    ExperimentConfig c;
    c.kind = kind;
    c.preset = preset;
    const bool fast = preset == "fast";
    if (kind == "esn-sysid") {
        c.sysid.sizes = {2, 3, 4, 5};
        c.sysid.N = fast ? 3 : 10;
    } else if (kind == "qrc-sysid") {
        c.sysid.sizes = fast ? std::vector<int>{2, 3} : std::vector<int>{2, 3, 4, 5};
        c.sysid.N = 10;
    } else if (kind == "verify") {
        c.properties.scale = fast ? 0.2 : 1.0;
    }
    return c;
}

ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& kind)
{
    if (!j.is_object()) throw ConfigError({"<root>: expected an object"});
    std::string preset = "full";
    if (j.contains("preset")) {
        if (!j.at("preset").is_string()) throw ConfigError({"preset: expected a string"});
        preset = j.at("preset").get<std::string>();
    }
    ExperimentConfig c = preset_config(kind, preset);
    Reader r;
    r.object(j, "", {"kind", "preset", "seed", "threads", "out", "observer", "sysid", "properties"});
    if (j.contains("kind") && j.at("kind") != kind)
        r.issues.push_back("kind: file is for " + j.at("kind").dump() + ", not '" + kind + "'");
    r.get(j, "seed", c.seed, "");
    r.get(j, "threads", c.threads, "");
    if (j.contains("out")) {
        std::string out;
        r.get(j, "out", out, "");
        if (!out.empty()) c.out = out;
    }
    if (j.contains("observer")) read_observer(r, j.at("observer"), c.observer);
    if (j.contains("sysid")) read_sysid(r, j.at("sysid"), c.sysid);
    if (j.contains("properties")) {
        const auto& p = j.at("properties");
        if (r.object(p, "properties", {"seed", "scale"})) {
            r.get(p, "seed", c.properties.seed, "properties");
            r.get(p, "scale", c.properties.scale, "properties");
        }
    }
    if (!r.issues.empty()) {
        // Report semantic problems of the fields that did parse as well.
        std::vector<std::string> all = r.issues;
        try {
            validate(c);
        } catch (const ConfigError& e) {
            all.insert(all.end(), e.issues().begin(), e.issues().end());
        }
        throw ConfigError(all);
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::string& kind)
{
    std::ifstream in(path);
    if (!in) throw ConfigError({"config: cannot open '" + path.string() + "'"});
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({"config: " + Reader::short_what(e)});
    }
    return config_from_json(j, kind);
}

void validate(const ExperimentConfig& c)
{
    std::vector<std::string> issues;
    auto need = [&](bool ok, const std::string& msg) {
        if (!ok) issues.push_back(msg);
    };
    const auto kinds = experiment_kinds();
    need(std::find(kinds.begin(), kinds.end(), c.kind) != kinds.end(), "kind: unknown experiment '" + c.kind + "'");
    need(c.threads >= 1 && c.threads <= 256, "threads: must be in [1, 256]");
    need(!c.out.empty(), "out: must be a nonempty path");

    const bool needs_plant = c.kind != "verify";
    if (needs_plant) {
        const ObserverDemoConfig& o = c.observer;
        need(o.plant.A.allFinite() && o.plant.B_u.allFinite() && o.plant.B_w.allFinite() && o.plant.C.allFinite() &&
                 o.plant.G.allFinite() && o.plant.H.allFinite(),
             "observer.plant: matrices must be finite");
        need(o.plant.rho >= 0.0, "observer.plant.rho: must be nonnegative");
        need(o.design.L.allFinite() && o.design.K.allFinite(), "observer.design: gains must be finite");
    }
    if (c.kind == "observer-demo") {
        const ObserverDemoConfig& o = c.observer;
        need(o.theta > 0.0 && o.theta < 1.0, "observer.theta: must lie in (0, 1)");
        need(o.eps > 0.0, "observer.eps: must be positive");
        need(o.lmi.restarts >= 1, "observer.lmi.restarts: must be >= 1");
        need(o.lmi.max_evaluations >= 10, "observer.lmi.max_evaluations: must be >= 10");
        need(o.lmi.margin >= 0.0, "observer.lmi.margin: must be nonnegative");
        need(o.lmi.tol >= 0.0, "observer.lmi.tol: must be nonnegative");
        need(o.n_initial_conditions >= 2, "observer.n_initial_conditions: must be >= 2");
        need(o.horizon >= 2, "observer.horizon: must be >= 2");
        need(o.tol > 0.0, "observer.tol: must be positive");
        need(o.initial_box > 0.0, "observer.initial_box: must be positive");
        need(!o.disturbances.empty(), "observer.disturbances: must be nonempty");
        for (std::size_t i = 0; i < o.disturbances.size(); ++i) {
            std::string why;
            need(signal_spec_ok(o.disturbances[i], why), "observer.disturbances[" + std::to_string(i) + "]: " + why);
        }
    }
    if (c.kind == "esn-sysid" || c.kind == "qrc-sysid") {
        const SysidConfig& s = c.sysid;
        const DatasetConfig& d = s.dataset;
        need(d.L >= 2, "sysid.dataset.L: must be >= 2");
        need(d.L_w >= 0 && d.L_w < d.L, "sysid.dataset.L_w: must satisfy 0 <= L_w < L");
        need(d.M >= 2, "sysid.dataset.M: must be >= 2");
        need(d.M1 >= 1 && d.M1 < d.M, "sysid.dataset.M1: must satisfy 1 <= M1 < M");
        need(d.M_eval >= 0, "sysid.dataset.M_eval: must be nonnegative");
        need(d.M_eval == 0 || !d.eval_inputs.empty(), "sysid.dataset.eval_inputs: must be nonempty");
        std::string why;
        need(signal_spec_ok(d.train_input, why), "sysid.dataset.train_input: " + why);
        for (std::size_t i = 0; i < d.eval_inputs.size(); ++i)
            need(signal_spec_ok(d.eval_inputs[i], why), "sysid.dataset.eval_inputs[" + std::to_string(i) + "]: " + why);
        need(!s.sizes.empty(), "sysid.sizes: must be nonempty");
        need(s.N >= 1, "sysid.N: must be >= 1");
        need(s.ridge >= 0.0, "sysid.ridge: must be nonnegative");
        const bool qrc = c.kind == "qrc-sysid";
        for (int n : s.sizes) {
            const std::string at = "sysid.sizes: size " + std::to_string(n);
            need(n >= 1, at + " must be >= 1");
            if (qrc) need(n <= kMaxQubits, at + " exceeds " + std::to_string(kMaxQubits) + " qubits");
            need(d.L - d.L_w > 2 * n + 1, at + " leaves too few post-washout rows for the readout (need L - L_w > p)");
            need(static_cast<Index>(d.M1) * (d.L - d.L_w) >= 2 * n + 1, at + " gives fewer training rows than readout parameters");
        }
        if (qrc) {
            const QrcModelConfig& q = s.qrc;
            for (const auto& [name, m] : {std::pair{"mix1", q.mix1}, std::pair{"mix2", q.mix2}}) {
                const std::string at = std::string("sysid.qrc.") + name;
                need(m.eps_w > 0 && m.eps_v > 0 && m.eps_phi > 0, at + ": weights must be positive");
                need(std::abs(m.eps_w + m.eps_v + m.eps_phi - 1.0) <= 1e-12, at + ": weights must sum to 1");
            }
            need(q.lambda > 0.0, "sysid.qrc.lambda: must be positive");
            if (issues.empty()) {
                for (int n : s.sizes) {
                    const double lhs = 4.0 * q.mix1.eps_v * q.mix2.eps_v * kLogisticLipschitz * kLogisticLipschitz *
                                       n * n / (q.mix1.eps_phi * q.mix2.eps_phi);
                    const double rhs = 1.0 / ((1.0 + q.lambda) * (1.0 + q.lambda));
                    need(lhs < rhs, "sysid.sizes: size " + std::to_string(n) +
                                        " violates the QRC small-gain inequality (lhs " + fmt(lhs) + " >= rhs " +
                                        fmt(rhs) + ")");
                }
            }
        } else {
            const EsnModelConfig& e = s.esn;
            need(e.sigma_A > 0.0 && e.sigma_A < 1.0, "sysid.esn.sigma_A: must lie in (0, 1)");
            need(e.sigma_fb2 > 0.0, "sysid.esn.sigma_fb2: must be positive");
            need(e.lambda > 0.0, "sysid.esn.lambda: must be positive");
            need(e.safety_margin >= 0.0 && e.safety_margin < 1.0, "sysid.esn.safety_margin: must lie in [0, 1)");
        }
    }
    if (c.kind == "verify") need(c.properties.scale > 0.0, "properties.scale: must be positive");
    if (!issues.empty()) throw ConfigError(issues);
}

nlohmann::json config_to_json(const ExperimentConfig& c)
{
    nlohmann::json j = {{"kind", c.kind}, {"preset", c.preset}, {"seed", c.seed}};
    if (c.kind != "verify") j["observer"]["plant"] = c.observer.plant;
    if (c.kind != "verify") j["observer"]["design"] = c.observer.design;
    if (c.kind == "observer-demo") {
        const ObserverDemoConfig& o = c.observer;
        j["observer"].update({{"theta", o.theta},
                              {"eps", o.eps},
                              {"lmi",
                               {{"restarts", o.lmi.restarts},
                                {"max_evaluations", o.lmi.max_evaluations},
                                {"margin", o.lmi.margin},
                                {"tol", o.lmi.tol},
                                {"seed", o.lmi.seed}}},
                              {"n_initial_conditions", o.n_initial_conditions},
                              {"horizon", o.horizon},
                              {"tol", o.tol},
                              {"initial_box", o.initial_box},
                              {"disturbances", o.disturbances}});
    }
    if (c.kind == "esn-sysid" || c.kind == "qrc-sysid") {
        const SysidConfig& s = c.sysid;
        j["sysid"] = {{"dataset",
                       {{"L", s.dataset.L},
                        {"L_w", s.dataset.L_w},
                        {"M", s.dataset.M},
                        {"M1", s.dataset.M1},
                        {"M_eval", s.dataset.M_eval},
                        {"train_input", s.dataset.train_input},
                        {"eval_inputs", s.dataset.eval_inputs}}},
                      {"sizes", s.sizes},
                      {"N", s.N},
                      {"ridge", s.ridge}};
        if (c.kind == "esn-sysid")
            j["sysid"]["esn"] = {{"sigma_A", s.esn.sigma_A},
                                 {"sigma_fb2", s.esn.sigma_fb2},
                                 {"lambda", s.esn.lambda},
                                 {"safety_margin", s.esn.safety_margin}};
        else
            j["sysid"]["qrc"] = {{"mix1", {s.qrc.mix1.eps_w, s.qrc.mix1.eps_v, s.qrc.mix1.eps_phi}},
                                 {"mix2", {s.qrc.mix2.eps_w, s.qrc.mix2.eps_v, s.qrc.mix2.eps_phi}},
                                 {"lambda", s.qrc.lambda}};
    }
    if (c.kind == "verify") j["properties"] = {{"seed", c.properties.seed}, {"scale", c.properties.scale}};
    return j;
}

ExperimentResult run_experiment(const ExperimentConfig& config)
{
    validate(config);
    std::filesystem::create_directories(config.out);
    ExperimentResult res;
    if (config.kind == "observer-demo")
        res = run_observer_demo(config);
    else if (config.kind == "esn-sysid")
        res = run_sysid(config, false);
    else if (config.kind == "qrc-sysid")
        res = run_sysid(config, true);
    else
        res = run_verify(config);

    nlohmann::json report = {{"experiment", config.kind}, {"config", config_to_json(config)}};
    report.update(res.report);
    report["ok"] = res.ok;
    res.report = report;
    write_json(res.report, config.out / "report.json");
    return res;
}

}  // namespace smallgain
