#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "btprox/errors.hpp"
#include "btprox/figures.hpp"
#include "btprox/scenario.hpp"
#include "btprox/simulation.hpp"
#include "btprox/trace.hpp"

namespace fs = std::filesystem;
using namespace btprox;

namespace {

struct Common {
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string decisions;
    bool print_config = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--set", c.sets, "Override a config value, e.g. --set channel.shadowing_sigma_db=4");
    app->add_option("--seed", c.seed, "Scenario seed");
    app->add_option("--out", c.out, "Output CSV path (default: $BTPROX_OUT_DIR/<name>.csv, else stdout)");
    app->add_option("--decisions", c.decisions, "Also write controller decisions CSV here");
    app->add_flag("--print-config", c.print_config, "Print the resolved scenario as YAML and exit");
}

Scenario resolve(Scenario s, const Common& c) {
    std::vector<std::string> sets = c.sets;
    if (c.seed) {
        sets.push_back("seed=" + std::to_string(*c.seed));
    }
    return with_overrides(s, sets);
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error("cannot write " + path.string());
    }
    f << text;
}

std::optional<fs::path> default_dir() {
    if (const char* dir = std::getenv("BTPROX_OUT_DIR"); dir && *dir) {
        return fs::path(dir);
    }
    return std::nullopt;
}

void emit(const Scenario& s, const ScenarioResult& r, const Common& c) {
    const std::string csv = r.trace.to_csv();
    if (!c.out.empty()) {
        write_text(c.out, csv);
    } else if (auto dir = default_dir()) {
        write_text(*dir / (s.name + ".csv"), csv);
    } else {
        std::cout << csv;
    }
    if (!c.decisions.empty()) {
        write_text(c.decisions, decisions_to_csv(r.decisions));
    }
    if (r.link_loss_time) {
        std::cerr << s.name << ": link lost at " << format_fixed(to_seconds(*r.link_loss_time), 3) << " s\n";
    }
    if (r.first_warning_time) {
        std::cerr << s.name << ": first warning at " << format_fixed(to_seconds(*r.first_warning_time), 3)
                  << " s\n";
    }
    if (s.mode == ScenarioMode::Stream) {
        std::cerr << s.name << ": energy " << format_fixed(r.energy_j, 3) << " J\n";
    }
}

int run_one(const Scenario& base, const Common& c) {
    const Scenario s = resolve(base, c);
    if (c.print_config) {
        std::cout << scenario_to_yaml(s);
        return 0;
    }
    emit(s, run_scenario(s), c);
    return 0;
}

std::string opt_seconds(const std::optional<SimTime>& t) {
    return t ? format_fixed(to_seconds(*t), 3) : std::string();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bluetooth proximity and adaptive streaming simulator"};
    app.require_subcommand(1);

    Common sim_opts;
    std::string scenario_file;
    auto* simulate = app.add_subcommand("simulate", "Run a scenario file");
    simulate->add_option("scenario", scenario_file, "YAML scenario")->required()->check(CLI::ExistingFile);
    add_common(simulate, sim_opts);

    Common fig_opts;
    std::string figure_name;
    bool list = false;
    auto* figure = app.add_subcommand("figure", "Run a built-in figure scenario");
    figure->add_option("name", figure_name, "fig3..fig8 or adaptive-walk");
    figure->add_flag("--list", list, "List built-in figures");
    add_common(figure, fig_opts);

    Common sweep_opts;
    std::string sweep_file;
    std::string sweep_figure;
    std::string param;
    std::vector<std::string> values;
    auto* sweep = app.add_subcommand("sweep", "Run a scenario once per value of one parameter");
    sweep->add_option("--scenario", sweep_file, "YAML scenario")->check(CLI::ExistingFile);
    sweep->add_option("--figure", sweep_figure, "Built-in figure to sweep");
    sweep->add_option("--param", param, "Dotted config key, e.g. seed or toggles.piconet_load")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
    sweep->add_option("--set", sweep_opts.sets, "Override a config value");
    sweep->add_option("--seed", sweep_opts.seed, "Scenario seed");
    sweep->add_option("--out", sweep_opts.out, "Directory for per-value traces (default: $BTPROX_OUT_DIR)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*simulate) {
            return run_one(load_scenario_file(scenario_file), sim_opts);
        }
        if (*figure) {
            if (list || figure_name.empty()) {
                for (const auto& n : builtin_figure_names()) {
                    std::cout << n << '\n';
                }
                return list ? 0 : 2;
            }
            return run_one(builtin_figure(figure_name), fig_opts);
        }
        if (*sweep) {
            if (sweep_file.empty() == sweep_figure.empty()) {
                std::cerr << "sweep needs exactly one of --scenario or --figure\n";
                return 2;
            }
            const Scenario base =
                resolve(sweep_file.empty() ? builtin_figure(sweep_figure) : load_scenario_file(sweep_file),
                        sweep_opts);
            std::vector<Scenario> runs;
            for (const auto& v : values) {
                Scenario s = with_overrides(base, {param + "=" + v});
                s.name = base.name + "_" + param + "_" + v;
                runs.push_back(std::move(s));
            }
            std::vector<std::future<ScenarioResult>> jobs;
            for (const auto& s : runs) {
                jobs.push_back(std::async(std::launch::async, [&s] { return run_scenario(s); }));
            }
            std::optional<fs::path> dir = sweep_opts.out.empty() ? default_dir() : fs::path(sweep_opts.out);
            std::cout << "value,rows,link_loss_s,first_warning_s,energy_j\n";
            for (std::size_t i = 0; i < runs.size(); ++i) {
                const ScenarioResult r = jobs[i].get();
                if (dir) {
                    write_text(*dir / (runs[i].name + ".csv"), r.trace.to_csv());
                }
                std::cout << values[i] << ',' << r.trace.size() << ',' << opt_seconds(r.link_loss_time) << ','
                          << opt_seconds(r.first_warning_time) << ',' << format_fixed(r.energy_j, 3) << '\n';
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
