#include "smallgain/observer.hpp"

#include "smallgain/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace smallgain {

LurePlant LurePlant::example()
{
    LurePlant p;
    p.A << 1.0, 1.0, 0.0, 1.1;
    p.B_u << 1.0, 1.0;
    p.B_w << -0.5, 1.0;
    p.C << 0.1, 0.5;
    p.G << 0.5, 1.0;
    p.H << 1.0, 1.0;
    p.rho = 0.1;
    return p;
}

ControllerDesign ControllerDesign::example()
{
    ControllerDesign d;
    d.L << 2.3258, 2.1104;
    d.K << 0.4956, 1.006;
    return d;
}

double compute_lambda_s(const LurePlant& plant, const Eigen::RowVector2d& K)
{
    const Eigen::Matrix2d closed = plant.A - plant.B_u * K;
    const Eigen::Matrix2d gh = plant.G * plant.H;
    return sigma_max(Mat(closed)) + plant.rho * sigma_max(Mat(gh));
}

Matrix8d assemble_lmi(const LurePlant& plant, const Eigen::Matrix2d& P, const Eigen::Vector2d& Z, double eps,
                      double theta)
{
    if (asymmetry(P) > 1e-12 * std::max(1.0, P.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("assemble_lmi: P must be symmetric");
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    const Eigen::Matrix2d PA_ZC = P * plant.A - Z * plant.C;
    const Eigen::Matrix2d X = plant.rho * plant.G * plant.H;

    Matrix8d M = Matrix8d::Zero();
    M.block<2, 2>(0, 0) = -theta * P;
    M.block<2, 2>(0, 2) = PA_ZC.transpose();
    M.block<2, 2>(0, 4) = eps * X.transpose();
    M.block<2, 2>(0, 6) = PA_ZC.transpose();
    M.block<2, 2>(2, 0) = PA_ZC;
    M.block<2, 2>(2, 2) = -P;
    M.block<2, 2>(4, 0) = eps * X;
    M.block<2, 2>(4, 4) = -eps * I;
    M.block<2, 2>(6, 0) = PA_ZC;
    M.block<2, 2>(6, 6) = P - eps * I;

    if (asymmetry(M) > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff()))
        throw std::logic_error("assemble_lmi produced an asymmetric matrix");
    return M;
}

Eigen::Matrix4d assemble_lmi_reduced(const LurePlant& plant, const Eigen::Matrix2d& P, const Eigen::Vector2d& Z,
                                     double eps, double theta)
{
    if (asymmetry(P) > 1e-12 * std::max(1.0, P.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("assemble_lmi_reduced: P must be symmetric");
    const Eigen::Matrix2d Ao = plant.A - P.inverse() * Z * plant.C;
    const Eigen::Matrix2d X = plant.rho * plant.G * plant.H;
    Eigen::Matrix4d M;
    M.block<2, 2>(0, 0) = Ao.transpose() * P * Ao - theta * P + eps * X.transpose() * X;
    M.block<2, 2>(0, 2) = Ao.transpose() * P;
    M.block<2, 2>(2, 0) = P * Ao;
    M.block<2, 2>(2, 2) = P - eps * Eigen::Matrix2d::Identity();
    return 0.5 * (M + M.transpose());
}

bool check_lmi(const LurePlant& plant, const LmiCertificate& cert, double tol)
{
    if (!(cert.theta > 0.0 && cert.theta < 1.0)) return false;
    if (!(cert.eps > 0.0)) return false;
    if (asymmetry(cert.P) > 1e-12 * std::max(1.0, cert.P.cwiseAbs().maxCoeff())) return false;
    if (!(lambda_min_sym(cert.P) > 0.0)) return false;
    if (!(lambda_max_sym(cert.P - cert.eps * Eigen::Matrix2d::Identity()) < 0.0)) return false;
    return lambda_max_sym(assemble_lmi(plant, cert.P, cert.Z, cert.eps, cert.theta)) <= tol;
}

namespace {

// params = (d, q, log ε') with P = [[(1+d)/2, q], [q, (1-d)/2]].
Eigen::Matrix2d unit_trace_p(const Vec& x)
{
    Eigen::Matrix2d P;
    P << 0.5 * (1.0 + x(0)), x(1), x(1), 0.5 * (1.0 - x(0));
    return P;
}

}  // namespace

LmiSearchResult search_lmi_feasible(const LurePlant& plant, const Eigen::Vector2d& L, double theta, double eps,
                                    const LmiSearchConfig& config)
{
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("theta must lie in (0, 1)");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (config.restarts < 1) throw std::invalid_argument("need at least one restart");

    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    auto objective = [&](const Vec& x) {
        const Eigen::Matrix2d P = unit_trace_p(x);
        const double e = std::exp(x(2));
        const Eigen::Vector2d Z = P * L;
        const double lmi = lambda_max_sym(assemble_lmi(plant, P, Z, e, theta));
        const double upper = lambda_max_sym(P - e * I) + config.margin;
        const double lower = -lambda_min_sym(P) + config.margin;
        return std::max({lmi, upper, lower});
    };

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> ud(-0.9, 0.9);
    std::uniform_real_distribution<double> uq(-0.4, 0.4);
    std::uniform_real_distribution<double> ue(std::log(0.5), std::log(10.0));

    LmiSearchResult res;
    res.best_objective = std::numeric_limits<double>::infinity();
    Vec best_x;
    for (int r = 0; r < config.restarts; ++r) {
        Vec x0(3);
        if (r == 0) {
            x0 << 0.0, 0.0, std::log(1.0);
        } else {
            x0 << ud(rng), uq(rng), ue(rng);
        }
        NelderMeadOptions opts;
        opts.max_evaluations = config.max_evaluations;
        opts.initial_step = 0.2;
        // Strict feasibility with some slack; stop there rather than polishing.
        opts.target = -1e-6;
        const NelderMeadResult nm = nelder_mead(objective, x0, opts);
        res.evaluations += nm.evaluations;
        res.restarts_used = r + 1;
        if (nm.value < res.best_objective) {
            res.best_objective = nm.value;
            best_x = nm.x;
        }

        const double scale = eps / std::exp(nm.x(2));
        LmiCertificate cert;
        cert.P = scale * unit_trace_p(nm.x);
        cert.P = 0.5 * (cert.P + cert.P.transpose()).eval();
        cert.Z = cert.P * L;
        cert.eps = eps;
        cert.theta = theta;
        cert.max_eig = lambda_max_sym(assemble_lmi(plant, cert.P, cert.Z, eps, theta));
        cert.p_eps_ok = lambda_min_sym(cert.P) > 0.0 && lambda_max_sym(cert.P - eps * I) < 0.0;
        if (check_lmi(plant, cert, config.tol)) {
            res.feasible = true;
            res.best = cert;
            res.best_objective = nm.value;
            return res;
        }
    }

    const double scale = eps / std::exp(best_x(2));
    res.best.P = scale * unit_trace_p(best_x);
    res.best.Z = res.best.P * L;
    res.best.eps = eps;
    res.best.theta = theta;
    res.best.max_eig = lambda_max_sym(assemble_lmi(plant, res.best.P, res.best.Z, eps, theta));
    res.best.p_eps_ok = lambda_min_sym(res.best.P) > 0.0 && lambda_max_sym(res.best.P - eps * I) < 0.0;
    return res;
}

FeedbackPair build_observer_closed_loop(const LurePlant& plant, const ControllerDesign& design)
{
    const Eigen::Matrix2d A_cl = plant.A - plant.B_u * design.K;
    const Eigen::Matrix2d BK = plant.B_u * design.K;
    const Eigen::Matrix2d A_err = plant.A - design.L * plant.C;

    FeedbackPair pair;
    SystemDef& z = pair.sys1;
    z.name = "plant";
    z.state_dim = 2;
    z.loop_input_dim = 2;
    z.external_input_dim = 1;
    z.output_dim = 2;
    z.update = [plant, A_cl, BK](long, const Vec& x, const Vec& dz, const Vec& w) -> Vec {
        const Eigen::Vector2d zz = x;
        return A_cl * zz + plant.nonlinearity(zz) - BK * Eigen::Vector2d(dz) + plant.B_w * w(0);
    };
    z.output = [](long, const Vec& x, const Vec&, const Vec&) -> Vec { return x; };

    SystemDef& e = pair.sys2;
    e.name = "observer_error";
    e.state_dim = 2;
    e.loop_input_dim = 2;
    e.external_input_dim = 1;
    e.output_dim = 2;
    // Control and disturbance enter plant and observer identically and cancel.
    e.update = [plant, A_err](long, const Vec& x, const Vec& zv, const Vec&) -> Vec {
        const Eigen::Vector2d dz = x;
        const Eigen::Vector2d zz = zv;
        return A_err * dz + plant.nonlinearity(dz + zz) - plant.nonlinearity(zz);
    };
    e.output = [](long, const Vec& x, const Vec&, const Vec&) -> Vec { return x; };
    return pair;
}

namespace {

nlohmann::json mat_json(const Mat& m)
{
    nlohmann::json j = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        std::vector<double> r(m.cols());
        for (Index c = 0; c < m.cols(); ++c) r[c] = m(i, c);
        j.push_back(r);
    }
    return j;
}

template <int R, int C>
Eigen::Matrix<double, R, C> fixed_from_json(const nlohmann::json& j, const char* name)
{
    Eigen::Matrix<double, R, C> m;
    auto fail = [&] {
        std::ostringstream os;
        os << "field '" << name << "' must be a " << R << "x" << C << " numeric array";
        throw std::invalid_argument(os.str());
    };
    // Vectors may be given flat.
    if ((R == 1 || C == 1) && j.is_array() && j.size() == static_cast<std::size_t>(R * C) &&
        (j.empty() || j[0].is_number())) {
        for (int i = 0; i < R * C; ++i) m(i) = j[i].get<double>();
        return m;
    }
    if (!j.is_array() || j.size() != static_cast<std::size_t>(R)) fail();
    for (int r = 0; r < R; ++r) {
        if (!j[r].is_array() || j[r].size() != static_cast<std::size_t>(C)) fail();
        for (int c = 0; c < C; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

std::vector<double> flat(const Mat& m)
{
    std::vector<double> v(m.size());
    for (Index i = 0; i < m.size(); ++i) v[i] = m(i);
    return v;
}

}  // namespace

void to_json(nlohmann::json& j, const LurePlant& p)
{
    j = {{"A", mat_json(p.A)}, {"B_u", flat(p.B_u)}, {"B_w", flat(p.B_w)}, {"C", flat(p.C)},
         {"G", flat(p.G)},     {"H", flat(p.H)},     {"rho", p.rho}};
}

void from_json(const nlohmann::json& j, LurePlant& p)
{
    p.A = fixed_from_json<2, 2>(j.at("A"), "A");
    p.B_u = fixed_from_json<2, 1>(j.at("B_u"), "B_u");
    p.B_w = fixed_from_json<2, 1>(j.at("B_w"), "B_w");
    p.C = fixed_from_json<1, 2>(j.at("C"), "C");
    p.G = fixed_from_json<2, 1>(j.at("G"), "G");
    p.H = fixed_from_json<1, 2>(j.at("H"), "H");
    p.rho = j.at("rho").get<double>();
    if (!(p.rho >= 0.0)) throw std::invalid_argument("field 'rho' must be nonnegative");
}

void to_json(nlohmann::json& j, const ControllerDesign& d) { j = {{"L", flat(d.L)}, {"K", flat(d.K)}}; }

void from_json(const nlohmann::json& j, ControllerDesign& d)
{
    d.L = fixed_from_json<2, 1>(j.at("L"), "L");
    d.K = fixed_from_json<1, 2>(j.at("K"), "K");
}

void to_json(nlohmann::json& j, const LmiCertificate& c)
{
    j = {{"P", mat_json(c.P)},        {"Z", flat(c.Z)},          {"eps", c.eps},
         {"theta", c.theta},          {"max_eig", c.max_eig},    {"p_eps_ok", c.p_eps_ok}};
}

}  // namespace smallgain
