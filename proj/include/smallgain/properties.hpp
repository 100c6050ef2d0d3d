#pragma once

// Randomized property suites for every module. Each check reports how many
// trials ran and how many violated the property.

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace smallgain {

struct PropertyOutcome {
    std::string suite;
    std::string name;
    int trials = 0;
    int failures = 0;
    /// Largest violation (or smallest slack when negative) seen across trials.
    double worst = 0.0;
    std::string detail;

    bool passed() const { return failures == 0 && trials > 0; }
};

struct PropertyOptions {
    std::uint64_t seed = 1;
    /// Multiplies the default trial counts; 1 gives the documented counts.
    double scale = 1.0;
};

std::vector<std::string> property_suite_names();

/// Throws std::invalid_argument for an unknown suite name.
std::vector<PropertyOutcome> run_property_suite(const std::string& suite, const PropertyOptions& options = {});
std::vector<PropertyOutcome> run_all_property_suites(const PropertyOptions& options = {});

void to_json(nlohmann::json& j, const PropertyOutcome& o);

}  // namespace smallgain
