// Command-line front end: simulate | solve | area | pvar | verify.
// Configuration comes from a JSON file (--config); flags override file keys;
// unknown config keys are errors. Runs are byte-deterministic given
// (config, seed).

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "pathwise/cli.hpp"

namespace {

using nlohmann::json;

json load_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw pathwise::cli::ConfigError("cannot open config file: " + path);
    json j;
    in >> j;
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pathwise: pathwise integration of cadlag drivers"};
    app.require_subcommand(1);

    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    app.add_option("--config", config_file, "JSON configuration file")->envname("PATHWISE_CONFIG");
    app.add_option("--seed", seed, "RNG seed (mandatory for stochastic commands)");
    app.add_option("--out", out_dir, "output directory");

    // simulate
    auto* sim = app.add_subcommand("simulate", "sample a driver path from the model");
    std::optional<std::size_t> grid_points;
    std::optional<double> horizon, epsilon;
    sim->add_option("--grid-points", grid_points, "grid points");
    sim->add_option("--horizon", horizon, "time horizon");
    sim->add_option("--epsilon", epsilon, "small-jump cutoff");

    // solve
    auto* solve = app.add_subcommand("solve", "solve dY = f(Y) dX");
    std::string input, field_preset, mode, initial;
    std::optional<double> p_opt, delta_opt, tol_opt, trunc_opt;
    std::optional<std::size_t> corrective;
    solve->add_option("--input", input, "driver path CSV (otherwise simulate from the model)");
    solve->add_option("--field", field_preset, "field preset: constant|linear|rotation|tabulated");
    solve->add_option("--mode", mode, "geometric|forward|corrective");
    solve->add_option("--p", p_opt, "variation exponent");
    solve->add_option("--delta", delta_opt, "fictitious-time weight");
    solve->add_option("--tol", tol_opt, "Picard tolerance");
    solve->add_option("--truncation-radius", trunc_opt, "field truncation radius");
    solve->add_option("--corrective-count", corrective, "jumps replaced in corrective mode");
    solve->add_option("--initial", initial, "initial state, comma separated");
    solve->add_option("--grid-points", grid_points, "grid points (simulated driver)");
    solve->add_option("--horizon", horizon, "time horizon (simulated driver)");
    solve->add_option("--epsilon", epsilon, "small-jump cutoff (simulated driver)");

    // area
    auto* area = app.add_subcommand("area", "Monte Carlo area moment report");
    std::optional<double> s_opt, t_opt;
    std::optional<int> levels_opt;
    std::optional<std::size_t> trials_opt;
    area->add_option("--s", s_opt, "interval start");
    area->add_option("--t", t_opt, "interval end");
    area->add_option("--levels", levels_opt, "dyadic depth of the sampling grid");
    area->add_option("--trials", trials_opt, "Monte Carlo trials");
    area->add_option("--epsilon", epsilon, "small-jump cutoff");

    // pvar
    auto* pvar = app.add_subcommand("pvar", "p-variation of a path CSV");
    pvar->add_option("--input", input, "path CSV")->required();
    pvar->add_option("--p", p_opt, "variation exponent");

    // verify
    auto* verify = app.add_subcommand("verify", "run a named invariant suite");
    std::string suite;
    verify->add_option("suite", suite, "suite name or 'all'")->required();

    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        json cfg = load_config_file(config_file);
        if (sim->parsed()) cfg["command"] = "simulate";
        if (solve->parsed()) cfg["command"] = "solve";
        if (area->parsed()) cfg["command"] = "area";
        if (pvar->parsed()) cfg["command"] = "pvar";
        if (verify->parsed()) cfg["command"] = "verify";

        if (seed) cfg["seed"] = *seed;
        if (!out_dir.empty()) cfg["output"]["dir"] = out_dir;
        if (!input.empty()) cfg["input"] = input;
        if (!suite.empty()) cfg["suite"] = suite;
        if (!mode.empty()) cfg["mode"] = mode;
        if (!field_preset.empty()) cfg["field"]["preset"] = field_preset;
        if (trunc_opt) cfg["field"]["truncation_radius"] = *trunc_opt;
        if (corrective) cfg["corrective_count"] = *corrective;
        if (p_opt) cfg["numeric"]["p"] = *p_opt;
        if (delta_opt) cfg["numeric"]["delta"] = *delta_opt;
        if (tol_opt) cfg["numeric"]["tol"] = *tol_opt;
        if (grid_points) cfg["numeric"]["grid_points"] = *grid_points;
        if (horizon) cfg["numeric"]["horizon"] = *horizon;
        if (epsilon) cfg["numeric"]["epsilon"] = *epsilon;
        if (s_opt) cfg["numeric"]["s"] = *s_opt;
        if (t_opt) cfg["numeric"]["t"] = *t_opt;
        if (levels_opt) cfg["numeric"]["max_level"] = *levels_opt;
        if (!initial.empty()) {
            pathwise::Vec a;
            std::stringstream ss(initial);
            std::string cell;
            while (std::getline(ss, cell, ',')) a.push_back(std::stod(cell));
            cfg["initial_state"] = a;
        }

        const pathwise::cli::RunConfig rc = pathwise::cli::parse_config(cfg);
        return pathwise::cli::run(rc, cfg);
    } catch (const pathwise::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
