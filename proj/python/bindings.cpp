#include "smallgain/esn.hpp"
#include "smallgain/experiment.hpp"
#include "smallgain/gains.hpp"
#include "smallgain/observer.hpp"
#include "smallgain/properties.hpp"
#include "smallgain/qrc.hpp"
#include "smallgain/sysid.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace smallgain;

namespace {

py::dict margin_dict(const MarginReport& m)
{
    py::dict d;
    d["lhs"] = m.lhs;
    d["rhs"] = m.rhs;
    d["holds"] = m.holds;
    return d;
}

// JSON crosses the boundary as text; the package wrapper decodes it.
std::string dump(const nlohmann::json& j) { return j.dump(); }

ExperimentConfig make_config(const std::string& kind, const std::string& preset, const std::string& config_json)
{
    if (config_json.empty()) return preset_config(kind, preset);
    nlohmann::json j = nlohmann::json::parse(config_json);
    if (!j.contains("preset")) j["preset"] = preset;
    return config_from_json(j, kind);
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Small-gain certificates for interconnected discrete-time systems";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<GainExpr>(m, "Gain")
        .def_static("linear", &GainExpr::linear, py::arg("c"))
        .def_static("power", &GainExpr::power, py::arg("c"), py::arg("p"))
        .def_static("identity", &GainExpr::identity)
        .def_static("compose", &GainExpr::compose, py::arg("inner"), py::arg("outer"))
        .def_static("max", &GainExpr::max)
        .def_static("sum", &GainExpr::sum)
        .def_static("id_plus", &GainExpr::id_plus)
        .def("__call__", [](const GainExpr& g, double s) { return eval_gain(g, s); })
        .def("inverse", [](const GainExpr& g) { return invert_gain(g); })
        .def("linear_coefficient", &GainExpr::linear_coefficient)
        .def("to_json", [](const GainExpr& g) { return dump(nlohmann::json(g)); })
        .def_static("from_json", [](const std::string& s) { return gain_from_json(nlohmann::json::parse(s)); });

    m.def(
        "small_gain_holds",
        [](const GainExpr& g1, const GainExpr& g2, std::vector<double> grid) {
            if (grid.empty()) grid = default_gain_grid();
            const SmallGainResult r = small_gain_holds(g1, g2, grid);
            return py::make_tuple(r.holds, r.margin, r.exact);
        },
        py::arg("g1"), py::arg("g2"), py::arg("grid") = std::vector<double>{});
    m.def("sum_to_max_bound", &sum_to_max_bound, py::arg("a"), py::arg("b"), py::arg("lam"));
    m.def(
        "fit_kl_bound",
        [](const std::vector<std::vector<double>>& seqs) {
            const KLFit f = fit_kl_bound(seqs);
            return py::make_tuple(f.bound.c, f.bound.r);
        },
        py::arg("sequences"));

    py::class_<LurePlant>(m, "LurePlant")
        .def_static("example", &LurePlant::example)
        .def_readwrite("A", &LurePlant::A)
        .def_readwrite("B_u", &LurePlant::B_u)
        .def_readwrite("B_w", &LurePlant::B_w)
        .def_readwrite("C", &LurePlant::C)
        .def_readwrite("G", &LurePlant::G)
        .def_readwrite("H", &LurePlant::H)
        .def_readwrite("rho", &LurePlant::rho);
    py::class_<ControllerDesign>(m, "ControllerDesign")
        .def_static("example", &ControllerDesign::example)
        .def_readwrite("L", &ControllerDesign::L)
        .def_readwrite("K", &ControllerDesign::K);

    m.def("lambda_s", &compute_lambda_s, py::arg("plant"), py::arg("K"));
    m.def("assemble_lmi", &assemble_lmi, py::arg("plant"), py::arg("P"), py::arg("Z"), py::arg("eps"), py::arg("theta"));
    m.def("assemble_lmi_reduced", &assemble_lmi_reduced, py::arg("plant"), py::arg("P"), py::arg("Z"), py::arg("eps"),
          py::arg("theta"));
    m.def(
        "search_lmi",
        [](const LurePlant& plant, const Eigen::Vector2d& L, double theta, double eps, int restarts, std::uint64_t seed) {
            LmiSearchConfig cfg;
            cfg.restarts = restarts;
            cfg.seed = seed;
            const LmiSearchResult r = search_lmi_feasible(plant, L, theta, eps, cfg);
            py::dict d;
            d["feasible"] = r.feasible;
            d["P"] = r.best.P;
            d["Z"] = r.best.Z;
            d["eps"] = r.best.eps;
            d["theta"] = r.best.theta;
            d["max_eig"] = r.best.max_eig;
            d["objective"] = r.best_objective;
            return d;
        },
        py::arg("plant"), py::arg("L"), py::arg("theta"), py::arg("eps"), py::arg("restarts") = 10,
        py::arg("seed") = 1);

    m.def(
        "esn_margin",
        [](int n, std::uint64_t seed, double sigma_A, double sigma_fb2, double lam, double safety) {
            const EsnPair p = scale_feedback_for_small_gain(generate_esn(n, n, sigma_A, sigma_fb2, seed), lam, safety);
            return margin_dict(esn_small_gain_margin(p, lam));
        },
        py::arg("n"), py::arg("seed"), py::arg("sigma_A") = 0.5, py::arg("sigma_fb2") = 1.65,
        py::arg("lam") = 0.003, py::arg("safety_margin") = EsnModelConfig{}.safety_margin);

    m.def(
        "qrc_margin",
        [](int n, std::array<double, 3> mix1, std::array<double, 3> mix2, double lam) {
            const QrcPair p = make_qrc_pair(n, n, {mix1[0], mix1[1], mix1[2]}, {mix2[0], mix2[1], mix2[2]}, 1);
            return margin_dict(qrc_small_gain_margin(p, lam));
        },
        py::arg("n"), py::arg("mix1") = std::array<double, 3>{0.25, 0.1, 0.65},
        py::arg("mix2") = std::array<double, 3>{0.1, 0.45, 0.45}, py::arg("lam") = 0.019);
    m.def("schatten1", &schatten1, py::arg("m"));
    m.def(
        "trace_bound",
        [](const CMat& A, const CMat& B) {
            const TraceBound t = trace_bound_check(A, B);
            return py::make_tuple(t.abs_trace, t.bound);
        },
        py::arg("A"), py::arg("B"));

    m.def("fpe", &compute_fpe, py::arg("residual_sq_sum"), py::arg("L"), py::arg("L_w"), py::arg("p"));
    m.def(
        "train_readout",
        [](const Mat& features, const Vec& targets, double ridge) {
            const TrainedReadout t = train_readout(features, targets, ridge);
            return py::make_tuple(t.model.weights, t.model.bias, t.rank);
        },
        py::arg("features"), py::arg("targets"), py::arg("ridge") = 0.0);

    m.def("experiment_kinds", &experiment_kinds);
    m.def(
        "_run_experiment",
        [](const std::string& kind, const std::string& preset, std::uint64_t seed, const std::string& out,
           int threads, const std::string& config_json) {
            ExperimentConfig cfg = make_config(kind, preset, config_json);
            cfg.seed = seed;
            cfg.out = out;
            cfg.threads = threads;
            validate(cfg);
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment(cfg);
            }
            return py::make_tuple(dump(r.report), r.summary, r.ok);
        },
        py::arg("kind"), py::arg("preset"), py::arg("seed"), py::arg("out"), py::arg("threads"),
        py::arg("config_json"));

    m.def("property_suite_names", &property_suite_names);
    m.def(
        "_run_property_suite",
        [](const std::string& name, std::uint64_t seed, double scale) {
            PropertyOptions o;
            o.seed = seed;
            o.scale = scale;
            return dump(nlohmann::json(run_property_suite(name, o)));
        },
        py::arg("name"), py::arg("seed") = 1, py::arg("scale") = 1.0);
}
