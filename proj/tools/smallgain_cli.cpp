// smallgain: run the observer demo, the two identification experiments or the
// property suites, writing report.json and CSV artifacts under --out.

#include "smallgain/experiment.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <iostream>
#include <optional>

namespace {

struct Flags {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<std::string> preset;
    std::string config;
};

void add_common(CLI::App* sub, Flags& f)
{
    sub->add_option("--seed", f.seed, "RNG seed");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--threads", f.threads, "Parallelism degree");
    sub->add_option("--preset", f.preset, "Named preset (full, fast)");
    sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
}

int fail(int code, const nlohmann::json& error)
{
    std::cerr << error.dump(2) << '\n';
    return code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Small-gain certificates for interconnected discrete-time systems"};
    app.require_subcommand(1);
    Flags flags;
    for (const auto& kind : smallgain::experiment_kinds()) {
        auto* sub = app.add_subcommand(kind, kind == "verify" ? "Run all property suites" : "Run the " + kind + " experiment");
        add_common(sub, flags);
    }
    CLI11_PARSE(app, argc, argv);

    const std::string kind = app.get_subcommands().front()->get_name();
    smallgain::ExperimentConfig cfg;
    try {
        if (!flags.config.empty()) {
            if (flags.preset) throw smallgain::ConfigError({"preset: give the preset inside the config file or on the command line, not both"});
            cfg = smallgain::load_config(flags.config, kind);
        } else {
            cfg = smallgain::preset_config(kind, flags.preset.value_or("full"));
        }
        if (flags.seed) cfg.seed = *flags.seed;
        if (flags.out) cfg.out = *flags.out;
        if (flags.threads) cfg.threads = *flags.threads;
        smallgain::validate(cfg);
    } catch (const smallgain::ConfigError& e) {
        return fail(2, {{"error", "invalid_config"}, {"issues", e.issues()}});
    }

    try {
        const smallgain::ExperimentResult res = smallgain::run_experiment(cfg);
        std::cout << kind << " (preset " << cfg.preset << ", seed " << cfg.seed << ")\n";
        for (const auto& line : res.summary) std::cout << "  " << line << '\n';
        std::cout << "report: " << (cfg.out / "report.json").string() << '\n';
        return res.ok ? 0 : 1;
    } catch (const smallgain::ConfigError& e) {
        return fail(2, {{"error", "invalid_config"}, {"issues", e.issues()}});
    } catch (const std::exception& e) {
        return fail(1, {{"error", "runtime_failure"}, {"message", e.what()}});
    }
}
