#pragma once

// Named input generators and CSV import/export of signals and trajectories.

#include "smallgain/systems.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace smallgain {

/// Builds a scalar input from a named, seeded distribution:
///   "zero", "constant(c)", "uniform(a,b)",
///   "sinusoid(a1,f1,a2,f2,...)"  → Σ a_i sin(2π f_i k)
/// Sample i is taken at time k = t0 + i.
Vec make_signal(const std::string& spec, Index length, std::uint64_t seed, long t0 = 1);

/// Reads a numeric CSV (optional header row) into a Signal.
Signal load_signal_csv(const std::filesystem::path& path);

/// Columns: k, x0.., y0.., u0..
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

}  // namespace smallgain
