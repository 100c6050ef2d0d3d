#include "smallgain/observer.hpp"
#include "smallgain/signals.hpp"

#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace smallgain;
using doctest::Approx;

namespace {

double smax(const Eigen::Matrix2d& m)
{
    return Eigen::JacobiSVD<Eigen::Matrix2d>(m).singularValues()(0);
}

}  // namespace

TEST_CASE("lambda_s of the benchmark design")
{
    const LurePlant plant = LurePlant::example();
    const ControllerDesign d = ControllerDesign::example();
    const double oracle = smax(plant.A - plant.B_u * d.K) + plant.rho * plant.G.norm() * plant.H.norm();
    CHECK(compute_lambda_s(plant, d.K) == Approx(oracle).epsilon(1e-12));
    CHECK(compute_lambda_s(plant, d.K) == Approx(0.868747).epsilon(1e-6));
    CHECK(compute_lambda_s(plant, d.K) < 1.0);
}

TEST_CASE("lambda_s degenerate cases")
{
    LurePlant plant = LurePlant::example();
    plant.rho = 0.0;
    CHECK(compute_lambda_s(plant, Eigen::RowVector2d::Zero()) == Approx(smax(plant.A)).epsilon(1e-12));
    plant.rho = 0.3;
    plant.G.setZero();
    CHECK(compute_lambda_s(plant, Eigen::RowVector2d::Zero()) == Approx(smax(plant.A)).epsilon(1e-12));
}

TEST_CASE("assemble_lmi: block layout and symmetry")
{
    const LurePlant plant = LurePlant::example();
    Eigen::Matrix2d P;
    P << 0.6, 0.1, 0.1, 0.4;
    const Eigen::Vector2d L = ControllerDesign::example().L;
    const Eigen::Vector2d Z = P * L;
    const Matrix8d M = assemble_lmi(plant, P, Z, 1.5, 0.9);
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);

    // P A − Z C = P (A − L C)
    const Eigen::Matrix2d PAo = P * (plant.A - L * plant.C);
    CHECK((M.block<2, 2>(2, 0) - PAo).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((M.block<2, 2>(6, 0) - PAo).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(M.block<2, 2>(0, 0) == -0.9 * P);
    CHECK(M.block<2, 2>(2, 2) == -P);
    CHECK(M.block<2, 2>(4, 4) == -1.5 * Eigen::Matrix2d::Identity());
    CHECK(M.block<2, 2>(6, 6) == P - 1.5 * Eigen::Matrix2d::Identity());
    CHECK(M.block<2, 2>(4, 0) == 1.5 * plant.rho * plant.G * plant.H);
    CHECK(M.block<2, 2>(2, 4).isZero(0));
    CHECK(M.block<2, 2>(4, 6).isZero(0));

    Eigen::Matrix2d bad = P;
    bad(0, 1) += 1e-3;
    CHECK_THROWS_AS(assemble_lmi(plant, bad, Z, 1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(assemble_lmi_reduced(plant, bad, Z, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("check_lmi: argument guards")
{
    const LurePlant plant = LurePlant::example();
    LmiCertificate c;
    c.P = 0.5 * Eigen::Matrix2d::Identity();
    c.Z = c.P * ControllerDesign::example().L;
    c.eps = 1.0;
    for (double th : {0.0, 1.0, 1.5, -0.1}) {
        c.theta = th;
        CHECK_FALSE(check_lmi(plant, c));
    }
    c.theta = 0.5;
    c.eps = 0.0;
    CHECK_FALSE(check_lmi(plant, c));
    CHECK_THROWS_AS(search_lmi_feasible(plant, ControllerDesign::example().L, 1.0, 0.001), std::invalid_argument);
    CHECK_THROWS_AS(search_lmi_feasible(plant, ControllerDesign::example().L, 0.5, -1.0), std::invalid_argument);
}

TEST_CASE("check_lmi: linear plant with a Lyapunov solution is certified")
{
    LurePlant plant = LurePlant::example();
    plant.rho = 0.0;
    const Eigen::Vector2d L = ControllerDesign::example().L;
    const Eigen::Matrix2d Ao = plant.A - L * plant.C;
    const double r = Eigen::EigenSolver<Eigen::Matrix2d>(Ao).eigenvalues().cwiseAbs().maxCoeff();
    const double theta = 0.5 * (r * r + 1.0);
    REQUIRE(theta < 1.0);

    // Discrete Lyapunov AoᵀPAo − θ'P = −I by series, θ' slightly below θ.
    const double th = 0.5 * (r * r + theta);
    Eigen::Matrix2d P = Eigen::Matrix2d::Zero(), term = Eigen::Matrix2d::Identity();
    for (int i = 0; i < 4000; ++i) {
        P += term;
        term = Ao.transpose() * term * Ao / th;
    }
    P /= th;
    // Normalize so that P − εI ≺ 0 with a moderate ε, and scale ε large
    // enough for the (AoᵀPAo)(P−εI)⁻¹ term.
    P /= P.trace();
    LmiCertificate c;
    c.P = P;
    c.Z = P * L;
    c.theta = theta;
    bool ok = false;
    for (double e = 1.0; e < 1e6 && !ok; e *= 1.5) {
        c.eps = e;
        ok = check_lmi(plant, c);
    }
    CHECK(ok);
}

TEST_CASE("LMI search: benchmark design")
{
    const LurePlant plant = LurePlant::example();
    const Eigen::Vector2d L = ControllerDesign::example().L;
    const Eigen::Matrix2d Ao = plant.A - L * plant.C;
    const double rho2 = std::pow(Eigen::EigenSolver<Eigen::Matrix2d>(Ao).eigenvalues().cwiseAbs().maxCoeff(), 2);
    CHECK(rho2 == Approx(0.6597).epsilon(1e-3));

    // θ below ρ(A − LC)² admits no certificate at all.
    const LmiSearchResult tiny = search_lmi_feasible(plant, L, 0.001, 0.001);
    CHECK_FALSE(tiny.feasible);
    CHECK(tiny.best_objective > 0.0);
    CHECK_FALSE(search_lmi_feasible(plant, L, 1e-9, 0.001).feasible);

    const LmiSearchResult ok = search_lmi_feasible(plant, L, 0.9, 0.001);
    REQUIRE(ok.feasible);
    CHECK(check_lmi(plant, ok.best));
    CHECK(ok.best.theta == 0.9);
    CHECK(ok.best.eps == Approx(0.001));
    CHECK((ok.best.Z - ok.best.P * L).norm() <= 1e-12 * ok.best.Z.norm());

    const Eigen::Matrix4d R = assemble_lmi_reduced(plant, ok.best.P, ok.best.Z, ok.best.eps, 0.9);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(R).eigenvalues().maxCoeff() < 0.0);
}

TEST_CASE("observer closed loop")
{
    const LurePlant plant = LurePlant::example();
    const ControllerDesign d = ControllerDesign::example();
    const FeedbackPair loop = build_observer_closed_loop(plant, d);
    CHECK(loop.state_dim() == 4);

    // With zero estimation error the error stays at zero for any disturbance.
    const Signal w = make_signal("uniform(-1,1)", 100, 3);
    Vec x0(4);
    x0 << 0.4, -0.3, 0.0, 0.0;
    const Trajectory t = simulate_closed_loop(loop, w, w, x0, 1, 100);
    CHECK(t.states.rightCols(2).cwiseAbs().maxCoeff() < 1e-15);

    // The plant follows its own recursion with u = −K(z − Δz).
    Eigen::Vector2d z = x0.head(2);
    for (Index k = 0; k + 1 < 100; ++k) {
        const double u = -d.K.dot(z);
        z = plant.A * z + plant.B_u * u + plant.B_w * w(k) + plant.nonlinearity(z);
        CHECK((t.states.row(k + 1).head(2).transpose() - z).norm() < 1e-12);
    }

    // Error dynamics contract from any start.
    x0 << 0.5, 0.5, 1.0, -1.0;
    const Trajectory e = simulate_closed_loop(loop, w, w, x0, 1, 100);
    CHECK(e.states.row(99).tail(2).norm() < 1e-6);
}

TEST_CASE("plant and design JSON")
{
    const LurePlant p = LurePlant::example();
    const nlohmann::json j = p;
    const LurePlant back = j.get<LurePlant>();
    CHECK(back.A == p.A);
    CHECK(back.C == p.C);
    CHECK(back.rho == p.rho);
    nlohmann::json bad = j;
    bad["rho"] = -1.0;
    CHECK_THROWS(bad.get<LurePlant>());

    const ControllerDesign d = ControllerDesign::example();
    const nlohmann::json jd = d;
    CHECK(jd.get<ControllerDesign>().L == d.L);
}
