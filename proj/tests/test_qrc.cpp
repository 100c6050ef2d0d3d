#include "smallgain/qrc.hpp"
#include "smallgain/signals.hpp"

#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace smallgain;
using doctest::Approx;

namespace {

const QrcMixing kMix1{0.25, 0.1, 0.65};
const QrcMixing kMix2{0.1, 0.45, 0.45};

CMat random_hermitian(Index d, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    CMat m(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) m(i, j) = Complex(n(rng), n(rng));
    return 0.5 * (m + m.adjoint());
}

}  // namespace

TEST_CASE("pauli_on: slot ordering")
{
    CMat Z(2, 2), X(2, 2), I = CMat::Identity(2, 2);
    Z << 1, 0, 0, -1;
    X << 0, 1, 1, 0;
    CHECK(pauli_on(Pauli::Z, 1, 1) == Z);
    CHECK(pauli_on(Pauli::X, 1, 2) == kron(X, I));
    CHECK(pauli_on(Pauli::X, 2, 2) == kron(I, X));
    CHECK(pauli_on(Pauli::Z, 2, 3) == kron(kron(I, Z), I));
    CHECK_THROWS_AS(pauli_on(Pauli::Z, 0, 2), std::out_of_range);
    CHECK_THROWS_AS(pauli_on(Pauli::Z, 3, 2), std::out_of_range);
}

TEST_CASE("unitaries")
{
    CHECK(z_product(2).diagonal().real() == Eigen::Vector4d(1, -1, -1, 1));
    const double th[] = {0.3, -1.2, 2.0};
    const CMat U = x_rotation_product(th);
    CHECK((U.adjoint() * U - CMat::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-14);
    const double zero[] = {0.0, 0.0};
    CHECK((x_rotation_product(zero) - CMat::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    // exp(−iπ/2 X) = −iX
    const double half[] = {std::numbers::pi / 2};
    CMat mX(2, 2);
    mX << 0, Complex(0, -1), Complex(0, -1), 0;
    CHECK((x_rotation_product(half) - mX).cwiseAbs().maxCoeff() < 1e-15);

    const double one[] = {0.1};
    CHECK_THROWS_AS(build_unitaries(2, one, one), std::invalid_argument);
}

TEST_CASE("density matrices")
{
    CHECK(DensityMatrix::ground(2).matrix()(0, 0) == Complex(1, 0));
    CHECK(DensityMatrix::maximally_mixed(3).matrix().trace().real() == Approx(1.0));
    std::mt19937_64 rng(3);
    const DensityMatrix r = DensityMatrix::random(3, rng);
    const DensityDefects d = inspect_density(r.matrix());
    CHECK(d.hermitian < 1e-12);
    CHECK(d.trace < 1e-12);
    CHECK(d.min_eigenvalue > -1e-12);
    CMat bad = CMat::Identity(2, 2);
    CHECK_THROWS(DensityMatrix(bad));
    CHECK_THROWS(DensityMatrix(CMat::Identity(3, 3) / 3.0));
    CHECK_THROWS_AS(DensityMatrix::ground(7), std::invalid_argument);
}

TEST_CASE("subsystem construction checks")
{
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(make_qrc_subsystem(2, {0.5, 0.5, 0.0}, rng), std::invalid_argument);
    CHECK_THROWS_AS(make_qrc_subsystem(2, {0.5, 0.5, 0.5}, rng), std::invalid_argument);
    CHECK_THROWS_AS(make_qrc_subsystem(0, kMix1, rng), std::invalid_argument);
    CHECK_NOTHROW(make_qrc_subsystem(2, kMix1, rng));
}

TEST_CASE("qrc step: identity unitaries only mix in the reset state")
{
    const Index d = 4;
    QrcUnitaries U{CMat::Identity(d, d), CMat::Identity(d, d), CMat::Identity(d, d), CMat::Identity(d, d)};
    const QrcSubsystem s(2, 0.25, 0.1, 0.65, DensityMatrix::ground(2).matrix(), U);
    const CMat rho = DensityMatrix::maximally_mixed(2).matrix();
    const CMat expect = 0.35 * rho + 0.65 * DensityMatrix::ground(2).matrix();
    CHECK((qrc_step(s, DensityMatrix(rho), 0.7, -3.0).matrix() - expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("qrc step: matches the mixture formula")
{
    std::mt19937_64 rng(8);
    const QrcSubsystem s = make_qrc_subsystem(2, kMix2, rng);
    const CMat rho = DensityMatrix::random(2, rng).matrix();
    const double w = 0.4, v = -1.3;
    const double gw = 1.0 / (1.0 + std::exp(-w)), gv = 1.0 / (1.0 + std::exp(-v));
    const auto& U = s.U;
    const CMat expect = 0.1 * (gw * U.U_w1 * rho * U.U_w1.adjoint() + (1 - gw) * U.U_w2 * rho * U.U_w2.adjoint()) +
                        0.45 * (gv * U.U_v1 * rho * U.U_v1.adjoint() + (1 - gv) * U.U_v2 * rho * U.U_v2.adjoint()) +
                        0.45 * s.phi;
    CHECK((qrc_apply(s, rho, w, v) - expect).cwiseAbs().maxCoeff() < 1e-14);
    CHECK_THROWS_AS(qrc_step(s, DensityMatrix::ground(3), w, v), std::invalid_argument);
}

TEST_CASE("schatten1")
{
    CMat d = CMat::Zero(3, 3);
    d.diagonal() << 2.0, -1.0, 0.5;
    CHECK(schatten1(d) == Approx(3.5));
    CHECK(schatten1(DensityMatrix::maximally_mixed(2).matrix()) == Approx(1.0));
    CHECK(schatten1(CMat()) == 0.0);
    std::mt19937_64 rng(2);
    const CMat h = random_hermitian(4, rng);
    const double oracle = Eigen::SelfAdjointEigenSolver<CMat>(h).eigenvalues().cwiseAbs().sum();
    CHECK(schatten1(h) == Approx(oracle).epsilon(1e-12));
}

TEST_CASE("readout features")
{
    const CMat g = DensityMatrix::ground(3).matrix();
    CHECK(subsystem_features(g, 3) == Vec::Ones(3));
    CHECK(subsystem_features(DensityMatrix::maximally_mixed(2).matrix(), 2).cwiseAbs().maxCoeff() < 1e-15);

    // |01⟩: qubit 1 up, qubit 2 down
    CMat b = CMat::Zero(4, 4);
    b(1, 1) = 1.0;
    Vec expect(2);
    expect << 1.0, -1.0;
    CHECK(subsystem_features(b, 2) == expect);
    for (int i = 1; i <= 2; ++i) CHECK((pauli_on(Pauli::Z, i, 2) * b).trace().real() == expect(i - 1));

    const Vec f = readout_features(g, 3, b, 2);
    CHECK(f.size() == 5);
    CHECK(f.tail(2) == expect);
    CHECK_THROWS_AS(subsystem_features(g, 2), std::invalid_argument);
}

TEST_CASE("output bound |y| ≤ n")
{
    std::mt19937_64 rng(4);
    std::mt19937_64 srng(5);
    const QrcSubsystem s = make_qrc_subsystem(3, kMix1, srng);
    for (int t = 0; t < 50; ++t) CHECK(std::abs(qrc_subsystem_output(s, DensityMatrix::random(3, rng).matrix())) <= 3.0 + 1e-12);
}

TEST_CASE("qrc margin")
{
    const QrcPair p5 = make_qrc_pair(5, 5, kMix1, kMix2, 1);
    const MarginReport m = qrc_small_gain_margin(p5, 0.019);
    CHECK(m.lhs == Approx(4 * 0.1 * 0.45 * 0.0625 * 25 / (0.65 * 0.45)).epsilon(1e-14));
    CHECK(m.lhs == Approx(0.961538).epsilon(1e-6));
    CHECK(m.rhs == Approx(1.0 / (1.019 * 1.019)).epsilon(1e-15));
    CHECK(m.holds);

    const QrcPair p6 = make_qrc_pair(6, 6, kMix1, kMix2, 1);
    CHECK_FALSE(qrc_small_gain_margin(p6, 0.019).holds);
    CHECK_THROWS_AS(qrc_small_gain_margin(p5, 0.0), std::invalid_argument);
}

TEST_CASE("trace_bound_check")
{
    CMat A = CMat::Zero(2, 2), B = CMat::Zero(2, 2);
    A.diagonal() << 1.0, -1.0;
    B.diagonal() << 0.5, 0.5;
    TraceBound t = trace_bound_check(A, B);
    CHECK(t.abs_trace == Approx(0.0));
    CHECK(t.bound == Approx(1.0));

    std::mt19937_64 rng(6);
    for (int i = 0; i < 50; ++i) {
        const CMat a = random_hermitian(4, rng), b = random_hermitian(4, rng);
        t = trace_bound_check(a, b);
        CHECK(t.abs_trace == Approx(std::abs((a * b).trace())).epsilon(1e-12));
        CHECK(t.abs_trace <= t.bound * (1 + 1e-12));
    }

    CMat n = CMat::Zero(2, 2);
    n(0, 1) = 1.0;
    CHECK_THROWS_AS(trace_bound_check(n, B), std::invalid_argument);
    CHECK_THROWS_AS(trace_bound_check(A, CMat::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("hermitian embedding round trip")
{
    std::mt19937_64 rng(7);
    const CMat h = random_hermitian(4, rng);
    const Vec x = embed_hermitian(h);
    CHECK(x.size() == 16);
    CHECK(x.head(4) == h.diagonal().real());
    CHECK(x(4) == h(0, 1).real());
    CHECK(x(5) == h(0, 1).imag());
    CHECK((unembed_hermitian(x, 4) - h).cwiseAbs().maxCoeff() < 1e-15);
    CHECK_THROWS_AS(unembed_hermitian(x, 3), std::invalid_argument);

    const QrcPair p = make_qrc_pair(2, 1, kMix1, kMix2, 3);
    const CMat r1 = DensityMatrix::random(2, rng).matrix(), r2 = DensityMatrix::random(1, rng).matrix();
    const auto [a, b] = split_qrc_state(p, join_qrc_state(r1, r2));
    CHECK((a - r1).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((b - r2).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("qrc closed loop: outputs are Z sums and states stay physical")
{
    const QrcPair p = make_qrc_pair(2, 3, kMix1, kMix2, 11);
    const FeedbackPair loop = build_qrc_closed_loop(p);
    const Signal w = make_signal("uniform(-2,2)", 200, 2);
    std::mt19937_64 rng(1);
    const Vec x0 = loop.draw_initial_state(rng);
    const Trajectory t = simulate_closed_loop(loop, w, w, x0, 1, 200);
    for (Index k = 0; k < t.size(); k += 37) {
        const auto [r1, r2] = split_qrc_state(p, t.states.row(k).transpose());
        CHECK(inspect_density(r1).min_eigenvalue > -1e-10);
        CHECK(inspect_density(r2).trace < 1e-10);
        CHECK(t.outputs(k, 0) == Approx(qrc_subsystem_output(p.sub1, r1)).epsilon(1e-12));
        CHECK(t.outputs(k, 1) == Approx(qrc_subsystem_output(p.sub2, r2)).epsilon(1e-12));
    }
    const auto [g1, g2] = split_qrc_state(p, x0);
    CHECK(loop.distance(x0, x0) == 0.0);
    CHECK(loop.distance(x0, join_qrc_state(g1, DensityMatrix::ground(3).matrix())) ==
          Approx(schatten1(g2 - DensityMatrix::ground(3).matrix())).epsilon(1e-12));
}
