#pragma once

// Seeded experiment runs: configuration presets and validation, the three
// applications, the property suites, and the artifacts each run writes.

#include "smallgain/esn.hpp"
#include "smallgain/observer.hpp"
#include "smallgain/properties.hpp"
#include "smallgain/qrc.hpp"
#include "smallgain/sysid.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace smallgain {

struct ObserverDemoConfig {
    LurePlant plant = LurePlant::example();
    ControllerDesign design = ControllerDesign::example();
    double theta = 0.001;
    double eps = 0.001;
    LmiSearchConfig lmi;
    int n_initial_conditions = 5;
    Index horizon = 200;
    double tol = 1e-6;
    double initial_box = 1.0;
    std::vector<std::string> disturbances = {"uniform(-1,1)", "sinusoid(1,0.05)"};
};

struct SysidConfig {
    DatasetConfig dataset;
    std::vector<int> sizes;
    int N = 10;
    double ridge = 0.0;
    EsnModelConfig esn;
    QrcModelConfig qrc;
};

struct ExperimentConfig {
    std::string kind;
    std::string preset = "full";
    std::uint64_t seed = 1;
    std::filesystem::path out = "out";
    int threads = 1;
    ObserverDemoConfig observer;
    SysidConfig sysid;
    PropertyOptions properties;
};

/// One entry per offending field, "path: message".
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> issues);
    const std::vector<std::string>& issues() const { return issues_; }

private:
    std::vector<std::string> issues_;
};

std::vector<std::string> experiment_kinds();
std::vector<std::string> preset_names();

/// Defaults for `kind` under `preset` ("full", "fast").
ExperimentConfig preset_config(const std::string& kind, const std::string& preset = "full");

/// Overlays a JSON document on the preset it names (or "full"). Unknown keys
/// and type mismatches are reported as ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& kind);
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& kind);

/// Throws ConfigError listing every violated precondition.
void validate(const ExperimentConfig& config);

nlohmann::json config_to_json(const ExperimentConfig& config);

struct ExperimentResult {
    nlohmann::json report;
    std::vector<std::string> summary;
    /// false when a property suite reported failures.
    bool ok = true;
};

/// Validates, runs and writes report.json plus the kind's CSV artifacts
/// under config.out.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace smallgain
