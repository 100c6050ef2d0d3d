#include "smallgain/sysid.hpp"

#include "doctest.h"

#include <filesystem>
#include <random>

using namespace smallgain;
using doctest::Approx;

namespace {

DatasetConfig small_config()
{
    DatasetConfig c;
    c.L = 300;
    c.L_w = 100;
    c.M = 4;
    c.M1 = 3;
    c.M_eval = 2;
    return c;
}

const Dataset& small_dataset()
{
    static const Dataset ds =
        generate_lure_dataset(LurePlant::example(), ControllerDesign::example(), small_config(), 7);
    return ds;
}

}  // namespace

TEST_CASE("dataset layout")
{
    const Dataset ds = generate_lure_dataset(LurePlant::example(), ControllerDesign::example(), DatasetConfig{}, 3);
    REQUIRE(ds.sequences.size() == 12);
    CHECK(ds.with_role(Role::train).size() == 8);
    CHECK(ds.with_role(Role::select).size() == 2);
    CHECK(ds.with_role(Role::eval).size() == 2);
    for (const auto& s : ds.sequences) {
        CHECK(s.w.size() == 1500);
        CHECK(s.y.size() == 1500);
        CHECK(s.y.allFinite());
    }
    CHECK(ds.with_role(Role::eval)[0]->input_spec == "uniform(-2,2)");
    CHECK(ds.with_role(Role::eval)[1]->input_spec == "sinusoid(1,0.04,1,0.1)");
    // zero initial state: y(1) = C z(1) = 0
    CHECK(ds.sequences[0].y(0) == 0.0);

    const Dataset again = generate_lure_dataset(LurePlant::example(), ControllerDesign::example(), DatasetConfig{}, 3);
    for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
        CHECK(ds.sequences[i].w == again.sequences[i].w);
        CHECK(ds.sequences[i].y == again.sequences[i].y);
    }
    CHECK(ds.sequences[0].w != ds.sequences[1].w);
}

TEST_CASE("dataset config validation")
{
    DatasetConfig c = small_config();
    c.L_w = c.L;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_config();
    c.M1 = c.M;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_config();
    c.eval_inputs.clear();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("feature matrix shapes")
{
    const Vec w = small_dataset().sequences[0].w;
    const ReservoirModel esn = make_esn_model(4, 1);
    const Mat fe = collect_features(esn, w, 100);
    CHECK(fe.rows() == 200);
    CHECK(fe.cols() == 9);
    CHECK(esn.parameter_count() == 9);
    CHECK(fe.col(8) == Vec::Ones(200));

    const ReservoirModel qrc = make_qrc_model(5, 1);
    CHECK(qrc.parameter_count() == 11);
    CHECK(collect_features(qrc, w.head(30), 10).cols() == 11);

    const Mat z = collect_features(esn, Vec::Zero(50), 10);
    CHECK(z.leftCols(8).isZero(0));
    CHECK_THROWS_AS(collect_features(esn, w, 300), std::invalid_argument);
}

TEST_CASE("model factories")
{
    const ReservoirModel m = make_esn_model(3, 42);
    CHECK(m.certificate.holds);
    CHECK(m.certificate.lhs == Approx(0.99).epsilon(1e-12));
    CHECK(m.kind == "esn");
    CHECK(m.seed == 42);
    CHECK(make_qrc_model(5, 1).certificate.holds);
    CHECK_THROWS_AS(make_qrc_model(6, 1), std::invalid_argument);
}

TEST_CASE("train_readout: exact fit and bias-only mean")
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    Mat F(50, 4);
    for (Index i = 0; i < 50; ++i) {
        for (Index c = 0; c < 3; ++c) F(i, c) = n(rng);
        F(i, 3) = 1.0;
    }
    Vec wt(3);
    wt << 0.5, -2.0, 1.25;
    const Vec y = F.leftCols(3) * wt + Vec::Constant(50, 0.75);
    const TrainedReadout t = train_readout(F, y);
    CHECK((t.model.weights - wt).norm() < 1e-12);
    CHECK(t.model.bias == Approx(0.75).epsilon(1e-12));
    CHECK_FALSE(t.rank_deficient);
    CHECK((t.model.predict(F) - y).norm() < 1e-11);

    const Mat ones = Mat::Ones(20, 1);
    Vec target(20);
    for (Index i = 0; i < 20; ++i) target(i) = static_cast<double>(i);
    const TrainedReadout b = train_readout(ones, target);
    CHECK(b.model.weights.size() == 0);
    CHECK(b.model.bias == Approx(9.5));

    // Ridge shrinks the weights; the bias stays free.
    const TrainedReadout r = train_readout(F, y, 10.0);
    CHECK(r.model.weights.norm() < t.model.weights.norm());
    CHECK((F.leftCols(3) * r.model.weights - y).squaredNorm() >= (F.leftCols(3) * t.model.weights - y).squaredNorm() - 1e-9);
}

TEST_CASE("train_readout: duplicate column")
{
    Mat F(30, 3);
    for (Index i = 0; i < 30; ++i) {
        F(i, 0) = std::sin(0.3 * static_cast<double>(i));
        F(i, 1) = F(i, 0);
        F(i, 2) = 1.0;
    }
    const Vec y = 2.0 * F.col(0);
    const TrainedReadout t = train_readout(F, y);
    CHECK(t.rank_deficient);
    CHECK(t.rank == 2);
    // minimum-norm split
    CHECK(t.model.weights(0) == Approx(1.0).epsilon(1e-10));
    CHECK(t.model.weights(1) == Approx(1.0).epsilon(1e-10));

    const TrainedReadout r = train_readout(F, y, 1e-3);
    CHECK_FALSE(r.rank_deficient);
    CHECK(r.model.weights(0) == Approx(r.model.weights(1)).epsilon(1e-9));
}

TEST_CASE("train_readout: argument errors")
{
    CHECK_THROWS_AS(train_readout(Mat::Ones(5, 2), Vec::Ones(4)), std::invalid_argument);
    CHECK_THROWS_AS(train_readout(Mat::Ones(2, 3), Vec::Ones(2)), std::invalid_argument);
    CHECK_THROWS_AS(train_readout(Mat::Ones(5, 2), Vec::Ones(5), -1.0), std::invalid_argument);
}

TEST_CASE("compute_fpe")
{
    CHECK(compute_fpe(1.0, 1500, 500, 9) == Approx(1.018163e-3).epsilon(1e-6));
    CHECK(compute_fpe(1.0, 1500, 500, 9) == Approx(1.0 / 1000 * 1009.0 / 991.0).epsilon(1e-15));
    CHECK(compute_fpe(2.0, 1500, 500, 0) == Approx(2e-3));
    CHECK_THROWS_AS(compute_fpe(1.0, 100, 90, 10), std::invalid_argument);
    CHECK_THROWS_AS(compute_fpe(1.0, 100, 10, -1), std::invalid_argument);
}

TEST_CASE("candidate seeds")
{
    CHECK(candidate_seed(1, 5, 6) == 5007);
    CHECK(candidate_seed(1, 3, 0) != candidate_seed(1, 2, 0));
}

TEST_CASE("model_selection: single candidate and determinism")
{
    const Dataset& ds = small_dataset();
    SelectionConfig one;
    one.sizes = {2};
    one.N = 1;
    const SelectionResult r = model_selection([](int n, std::uint64_t s) { return make_esn_model(n, s); }, one, ds);
    REQUIRE(r.candidates.size() == 1);
    CHECK(r.best.model.seed == candidate_seed(1, 2, 0));
    CHECK(r.best.model.p == 5);
    CHECK(r.best.fpe_per_sequence.size() == 1);
    CHECK(r.best.mse_per_eval_sequence.size() == 2);
    CHECK(r.best.fpe_total > 0.0);

    SelectionConfig cfg;
    cfg.sizes = {2, 3};
    cfg.N = 3;
    cfg.threads = 3;
    const auto gen = [](int n, std::uint64_t s) { return make_esn_model(n, s); };
    const SelectionResult a = model_selection(gen, cfg, ds);
    cfg.threads = 1;
    const SelectionResult b = model_selection(gen, cfg, ds);
    CHECK(a.best.model.seed == b.best.model.seed);
    CHECK(a.best.fpe_total == b.best.fpe_total);
    CHECK(a.readout.weights == b.readout.weights);
    REQUIRE(a.candidates.size() == 6);
    for (const auto& c : a.candidates) CHECK(a.best.fpe_total <= c.fpe_total);
}

TEST_CASE("model_selection: generator errors propagate")
{
    SelectionConfig cfg;
    cfg.sizes = {2};
    cfg.N = 2;
    const auto bad = [](int, std::uint64_t) -> ReservoirModel { throw std::runtime_error("boom"); };
    CHECK_THROWS_WITH_AS(model_selection(bad, cfg, small_dataset()), "boom", std::runtime_error);
    cfg.sizes.clear();
    CHECK_THROWS_AS(model_selection(bad, cfg, small_dataset()), std::invalid_argument);
}

TEST_CASE("evaluate_mse")
{
    Dataset ds = small_dataset();
    const ReservoirModel m = make_esn_model(2, 5);
    ReadoutModel zero;
    zero.weights = Vec::Zero(4);
    zero.bias = 0.0;
    for (auto& s : ds.sequences) s.y.setZero();
    for (double e : evaluate_mse(m, zero, ds)) CHECK(e == 0.0);

    zero.bias = 0.5;
    for (double e : evaluate_mse(m, zero, ds)) CHECK(e == Approx(0.25));
}

TEST_CASE("dataset and prediction files")
{
    const Dataset& ds = small_dataset();
    const auto dir = std::filesystem::temp_directory_path() / "smallgain_test_dataset";
    std::filesystem::remove_all(dir);
    write_dataset(ds, dir);
    CHECK(std::filesystem::exists(dir / "manifest.json"));
    CHECK(std::filesystem::exists(dir / "train_1.csv"));
    const Dataset back = read_dataset(dir);
    REQUIRE(back.sequences.size() == ds.sequences.size());
    for (std::size_t i = 0; i < ds.sequences.size(); ++i) {
        CHECK(back.sequences[i].role == ds.sequences[i].role);
        CHECK(back.sequences[i].w == ds.sequences[i].w);
        CHECK(back.sequences[i].y == ds.sequences[i].y);
    }
    CHECK(back.config.L == 300);

    write_predictions_csv(Vec::Ones(10), Vec::Zero(6), 4, dir / "p.csv");
    CHECK(std::filesystem::file_size(dir / "p.csv") > 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("reports serialize")
{
    ModelReport r;
    r.model = {"esn", 3, 3001, 7};
    r.fpe_per_sequence = {0.1, 0.2};
    r.fpe_total = 0.3;
    const nlohmann::json j = r;
    CHECK(j["fpe_total"] == 0.3);
    ReadoutModel m;
    m.weights = Vec::Ones(2);
    m.bias = 0.5;
    const nlohmann::json jm = m;
    CHECK(jm["bias"] == 0.5);
}
