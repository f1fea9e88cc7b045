// flatlyap command line: list | validate <config> | run <config> <experiment> | replay <runlog> <purpose:index>

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "flatlyap/flatlyap.hpp"

namespace {

int list_presets() {
    for (const auto& p : flatlyap::catalog())
        std::cout << p.name << "  [" << p.surface << "]" << (p.exploratory ? "  (exploratory)" : "") << "\n    "
                  << p.description << "\n";
    std::cout << "hypergeometric slots:";
    for (const auto& s : flatlyap::hypergeometric_slots()) std::cout << " " << s;
    std::cout << "\n";
    return 0;
}

int validate(const std::string& path) {
    const flatlyap::ExperimentConfig c = flatlyap::load_config(path);
    const flatlyap::BuiltPreset b = flatlyap::build_experiment(c);
    std::cout << "ok: " << c.name << "  hash " << flatlyap::hash_hex(c.hash) << "  preset " << b.name << " on " << b.surface.name
              << ", rank " << b.rep.n << "\n";
    for (const auto& w : b.rep.warnings) std::cout << "warning: " << w << "\n";
    return 0;
}

int run(const std::string& path, const std::string& experiment) {
    const flatlyap::ExperimentConfig c = flatlyap::load_config(path);
    const flatlyap::RunRecord r = flatlyap::run(c, experiment);
    std::cout << "wrote " << r.directory.string() << ":";
    for (const auto& o : r.outputs) std::cout << " " << o;
    std::cout << "\n";
    for (const auto& [k, v] : r.verdicts) std::cout << "  " << k << ": " << v << "\n";
    return 0;
}

int replay(const std::string& runlog, const std::string& id) {
    const flatlyap::ReplayResult r = flatlyap::replay(runlog, id);
    nlohmann::json word = nlohmann::json::array();
    for (const auto& l : r.path.word) word.push_back(l.inverse ? -(l.generator + 1) : l.generator + 1);
    nlohmann::json out{{"trajectory", id},
                       {"seed", r.seed},
                       {"start", {r.start.x, r.start.y}},
                       {"endpoint", {r.path.endpoint.x, r.path.endpoint.y}},
                       {"unreduced_endpoint", {r.path.unreduced_endpoint.x, r.path.unreduced_endpoint.y}},
                       {"elapsed", r.path.elapsed},
                       {"crossings", r.path.crossing_times.size()},
                       {"word", word}};
    std::cout << out.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lyapunov exponents of flat bundles over hyperbolic surfaces"};
    app.set_version_flag("--version", std::string(flatlyap::kVersion));
    app.require_subcommand(1);

    auto* list_cmd = app.add_subcommand("list", "List bundled presets");
    std::string config_path, experiment, runlog, trajectory;
    auto* validate_cmd = app.add_subcommand("validate", "Load and validate a config");
    validate_cmd->add_option("config", config_path, "YAML config")->required()->check(CLI::ExistingFile);
    auto* run_cmd = app.add_subcommand("run", "Run a pipeline (spectrum | degree_report | fiber_measure | diagnostics | all)");
    run_cmd->add_option("config", config_path, "YAML config")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("experiment", experiment, "Pipeline name")
        ->required()
        ->check(CLI::IsMember(flatlyap::experiment_names()));
    auto* replay_cmd = app.add_subcommand("replay", "Re-run one trajectory from a run log");
    replay_cmd->add_option("runlog", runlog, "runlog.jsonl")->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("trajectory", trajectory, "purpose:index, e.g. spectrum:17")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*list_cmd) return list_presets();
        if (*validate_cmd) return validate(config_path);
        if (*run_cmd) return run(config_path, experiment);
        if (*replay_cmd) return replay(runlog, trajectory);
    } catch (const flatlyap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
