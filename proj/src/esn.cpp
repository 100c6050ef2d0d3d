#include "smallgain/esn.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace smallgain {

EsnSubsystem::EsnSubsystem(Mat a, Mat a_fb, Vec b) : A(std::move(a)), A_fb(std::move(a_fb)), B(std::move(b))
{
    if (A.rows() != A.cols()) throw std::invalid_argument("ESN reservoir matrix must be square");
    if (A_fb.rows() != A.rows() || B.size() != A.rows())
        throw std::invalid_argument("ESN feedback/drive matrices must have as many rows as the reservoir");
    sigma_A = sigma_max(A);
    sigma_fb = sigma_max(A_fb);
    norm_B = B.norm();
}

Vec EsnSubsystem::step(const Vec& x, const Vec& v, double w) const
{
    return (A * x + A_fb * v + B * w).array().tanh().matrix();
}

void EsnPair::validate() const
{
    if (sub1.A_fb.cols() != sub2.size() || sub2.A_fb.cols() != sub1.size())
        throw std::invalid_argument("ESN pair: feedback matrix widths must match the other reservoir size");
}

namespace {

Mat draw_uniform(Index rows, Index cols, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (;;) {
        Mat m(rows, cols);
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
        if (rows == 0 || cols == 0 || m.cwiseAbs().maxCoeff() > 0.0) return m;
    }
}

}  // namespace

Mat rescale_to_sigma(const Mat& m, double target)
{
    const double s = sigma_max(m);
    if (!(s > 0.0)) throw std::invalid_argument("cannot rescale a zero matrix to a target singular value");
    return m * (target / s);
}

EsnPair generate_esn(Index n1, Index n2, double sigma_A, double sigma_fb2, std::uint64_t seed)
{
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("ESN sizes must be positive");
    if (!(sigma_A > 0.0 && sigma_A < 1.0)) throw std::invalid_argument("sigma_A must lie in (0, 1)");
    if (!(sigma_fb2 > 0.0)) throw std::invalid_argument("sigma_fb2 must be positive");

    std::mt19937_64 rng(seed);
    Mat A1 = draw_uniform(n1, n1, rng);
    Mat Afb1 = draw_uniform(n1, n2, rng);
    Mat B1 = draw_uniform(n1, 1, rng);
    Mat A2 = draw_uniform(n2, n2, rng);
    Mat Afb2 = draw_uniform(n2, n1, rng);
    Mat B2 = draw_uniform(n2, 1, rng);

    EsnPair pair;
    pair.sub1 = EsnSubsystem(rescale_to_sigma(A1, sigma_A), Afb1, B1.col(0));
    pair.sub2 = EsnSubsystem(rescale_to_sigma(A2, sigma_A), rescale_to_sigma(Afb2, sigma_fb2), B2.col(0));
    pair.seed = seed;
    pair.sigma_A_target = sigma_A;
    pair.sigma_fb2_target = sigma_fb2;
    return pair;
}

MarginReport esn_small_gain_margin(const EsnPair& pair, double lam)
{
    if (!(lam > 0.0)) throw std::invalid_argument("lambda must be positive");
    for (const EsnSubsystem* s : {&pair.sub1, &pair.sub2})
        if (!(s->sigma_A < 1.0)) throw std::invalid_argument("small-gain margin needs sigma_max(A_j) < 1");
    MarginReport r;
    r.lhs = pair.sub1.sigma_fb / (1.0 - pair.sub1.sigma_A) * (pair.sub2.sigma_fb / (1.0 - pair.sub2.sigma_A));
    r.rhs = 1.0 / ((1.0 + lam) * (1.0 + lam));
    r.holds = r.lhs < r.rhs;
    return r;
}

EsnPair scale_feedback_for_small_gain(const EsnPair& pair, double lam, double safety_margin)
{
    if (!(safety_margin >= 0.0 && safety_margin < 1.0)) throw std::invalid_argument("safety margin must be in [0, 1)");
    const MarginReport m = esn_small_gain_margin(pair, lam);
    const double g2 = pair.sub2.sigma_fb / (1.0 - pair.sub2.sigma_A);
    if (!(g2 > 0.0)) return pair;  // loop already open; lhs = 0 for any A_fb1
    const double target = m.rhs * (1.0 - safety_margin) / g2 * (1.0 - pair.sub1.sigma_A);
    if (!std::isfinite(target)) throw std::invalid_argument("feedback scaling target is not finite");

    EsnPair out = pair;
    out.sub1 = EsnSubsystem(pair.sub1.A, rescale_to_sigma(pair.sub1.A_fb, target), pair.sub1.B);
    if (safety_margin > 0.0 && !esn_small_gain_margin(out, lam).holds)
        throw std::logic_error("feedback rescale failed to satisfy the small-gain inequality");
    return out;
}

FeedbackPair build_esn_closed_loop(const EsnPair& pair)
{
    pair.validate();
    FeedbackPair fp;
    auto make = [](const EsnSubsystem& s, Index other, const char* name) {
        SystemDef d;
        d.name = name;
        d.state_dim = s.size();
        d.loop_input_dim = other;
        d.external_input_dim = 1;
        d.output_dim = s.size();
        d.update = [s](long, const Vec& x, const Vec& v, const Vec& u) -> Vec { return s.step(x, v, u(0)); };
        d.output = [](long, const Vec& x, const Vec&, const Vec&) -> Vec { return x; };
        return d;
    };
    fp.sys1 = make(pair.sub1, pair.sub2.size(), "esn1");
    fp.sys2 = make(pair.sub2, pair.sub1.size(), "esn2");
    return fp;
}

namespace {

nlohmann::json rows(const Mat& m)
{
    nlohmann::json j = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        std::vector<double> r(m.cols());
        for (Index c = 0; c < m.cols(); ++c) r[c] = m(i, c);
        j.push_back(r);
    }
    return j;
}

Mat mat_from(const nlohmann::json& j)
{
    if (!j.is_array() || j.empty()) throw std::invalid_argument("matrix must be a nonempty array of rows");
    const std::size_t cols = j[0].size();
    Mat m(j.size(), cols);
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != cols) throw std::invalid_argument("ragged matrix rows");
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

nlohmann::json sub_json(const EsnSubsystem& s)
{
    return {{"A", rows(s.A)},
            {"A_fb", rows(s.A_fb)},
            {"B", std::vector<double>(s.B.data(), s.B.data() + s.B.size())},
            {"sigma_A", s.sigma_A},
            {"sigma_fb", s.sigma_fb}};
}

EsnSubsystem sub_from(const nlohmann::json& j)
{
    const auto b = j.at("B").get<std::vector<double>>();
    return EsnSubsystem(mat_from(j.at("A")), mat_from(j.at("A_fb")), Eigen::Map<const Vec>(b.data(), b.size()));
}

}  // namespace

void to_json(nlohmann::json& j, const EsnPair& p)
{
    j = {{"seed", p.seed},
         {"sigma_A_target", p.sigma_A_target},
         {"sigma_fb2_target", p.sigma_fb2_target},
         {"sub1", sub_json(p.sub1)},
         {"sub2", sub_json(p.sub2)}};
}

EsnPair esn_pair_from_json(const nlohmann::json& j)
{
    EsnPair p;
    p.seed = j.value("seed", std::uint64_t{0});
    p.sigma_A_target = j.value("sigma_A_target", 0.0);
    p.sigma_fb2_target = j.value("sigma_fb2_target", 0.0);
    p.sub1 = sub_from(j.at("sub1"));
    p.sub2 = sub_from(j.at("sub2"));
    p.validate();
    return p;
}

}  // namespace smallgain
