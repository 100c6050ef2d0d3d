#include "smallgain/signals.hpp"

#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace smallgain;
using doctest::Approx;

TEST_CASE("make_signal: deterministic shapes")
{
    CHECK(make_signal("zero", 5, 1).isZero(0));
    CHECK(make_signal("constant(2.5)", 4, 1) == Vec::Constant(4, 2.5));

    // sin(2π·0.04·25) = sin(2π) = 0
    const Vec s = make_signal("sinusoid(1,0.04)", 30, 9, 1);
    CHECK(std::abs(s(24)) < 1e-12);
    CHECK(s(0) == Approx(std::sin(2 * std::numbers::pi * 0.04)));

    const Vec two = make_signal("sinusoid(1,0.04,1,0.1)", 10, 0, 1);
    for (Index i = 0; i < 10; ++i) {
        const double k = 1.0 + static_cast<double>(i);
        CHECK(two(i) == Approx(std::sin(2 * std::numbers::pi * 0.04 * k) + std::sin(2 * std::numbers::pi * 0.1 * k)));
    }
}

TEST_CASE("make_signal: uniform is seeded and in range")
{
    const Vec a = make_signal("uniform(-2,2)", 1000, 4);
    CHECK(a == make_signal("uniform(-2, 2)", 1000, 4));
    CHECK(a != make_signal("uniform(-2,2)", 1000, 5));
    CHECK(a.minCoeff() >= -2.0);
    CHECK(a.maxCoeff() < 2.0);
    CHECK(std::abs(a.mean()) < 0.2);
}

TEST_CASE("make_signal: rejects malformed specs")
{
    CHECK_THROWS_AS(make_signal("uniform(2,-2)", 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_signal("uniform(1)", 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_signal("sinusoid(1,2,3)", 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_signal("noise", 3, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_signal("constant(x)", 3, 1), std::invalid_argument);
}

TEST_CASE("trajectory CSV round trip")
{
    Trajectory t;
    t.t0 = 4;
    t.states = Mat::Random(6, 2);
    t.outputs = Mat::Random(6, 2);
    t.inputs = Mat::Random(6, 1);
    const auto path = std::filesystem::temp_directory_path() / "smallgain_signals_roundtrip.csv";
    write_trajectory_csv(t, path);
    const Signal back = load_signal_csv(path);
    REQUIRE(back.rows() == 6);
    REQUIRE(back.cols() == 6);
    for (Index i = 0; i < 6; ++i) {
        CHECK(back(i, 0) == static_cast<double>(4 + i));
        CHECK(back.row(i).segment(1, 2) == t.states.row(i));
        CHECK(back.row(i).segment(3, 2) == t.outputs.row(i));
        CHECK(back(i, 5) == t.inputs(i, 0));
    }
    std::filesystem::remove(path);
}

TEST_CASE("load_signal_csv: ragged rows are an error")
{
    const auto path = std::filesystem::temp_directory_path() / "smallgain_signals_ragged.csv";
    {
        std::ofstream out(path);
        out << "a,b\n1,2\n3\n";
    }
    CHECK_THROWS_AS(load_signal_csv(path), std::runtime_error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_signal_csv(path), std::runtime_error);
}
