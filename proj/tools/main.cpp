#include "roughscatter/ensemble.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace rs = roughscatter;

namespace {

enum Exit { Ok = 0, ValidationFailed = 1, BadConfig = 2, BadResolution = 3, BadIo = 4 };

struct Common {
    std::string config;
    std::string preset;
    std::string out{"out"};
    std::optional<std::uint64_t> seed;
    int jobs{1};
};

void add_source_options(CLI::App* cmd, Common& c)
{
    auto* cfg = cmd->add_option("--config", c.config, "experiment JSON file");
    auto* pre = cmd->add_option("--preset", c.preset, "named preset")->check(CLI::IsMember(rs::preset_names()));
    cfg->excludes(pre);
    cmd->add_option("--seed", c.seed, "override the master seed");
}

rs::ExperimentConfig resolve(const Common& c)
{
    if (c.config.empty() && c.preset.empty()) throw rs::ConfigError("one of --config or --preset is required");
    rs::ExperimentConfig cfg = c.config.empty() ? rs::preset(c.preset) : rs::load_config(c.config);
    if (c.seed) cfg.master_seed = *c.seed;
    return cfg;
}

void print_files(const std::filesystem::path& out, const std::vector<std::string>& files)
{
    for (const auto& f : files) std::cout << (out / f).string() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Paraxial scattering of pulses by randomly rough interfaces"};
    app.require_subcommand(1);
    app.set_version_flag("--version", rs::tool_version());

    Common run_opts, val_opts, snell_opts, scat_opts, syn_opts, show_opts;
    bool suites = false;
    int count = -1;

    auto* run = app.add_subcommand("run", "execute the configured pipelines and write a manifest");
    add_source_options(run, run_opts);
    run->add_option("--out", run_opts.out, "output directory");
    run->add_option("--jobs", run_opts.jobs, "worker threads")->check(CLI::PositiveNumber);

    auto* val = app.add_subcommand("validate", "check a configuration against every module precondition");
    add_source_options(val, val_opts);
    val->add_flag("--suites", suites, "also run the desk-scale property suites");

    auto* snell = app.add_subcommand("snell", "tabulate generalized refraction and reflection angles");
    add_source_options(snell, snell_opts);
    snell->add_option("--out", snell_opts.out, "output directory");

    auto* scat = app.add_subcommand("scattering-dist", "tabulate the scattering distribution");
    add_source_options(scat, scat_opts);
    scat->add_option("--out", scat_opts.out, "output directory");

    auto* syn = app.add_subcommand("synthesize", "write interface realizations");
    add_source_options(syn, syn_opts);
    syn->add_option("--out", syn_opts.out, "output directory");
    syn->add_option("--count", count, "number of realizations (default: config realizations)")
        ->check(CLI::PositiveNumber);

    auto* show = app.add_subcommand("show-config", "print the resolved configuration as JSON");
    add_source_options(show, show_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = resolve(run_opts);
            const auto m = rs::run_experiment(cfg, run_opts.out, run_opts.jobs);
            for (const auto& o : m.outputs) std::cout << o.sha256 << "  " << o.file << "\n";
            std::cout << "manifest: " << (std::filesystem::path(run_opts.out) / "manifest.json").string() << "\n";
        } else if (*val) {
            const auto cfg = resolve(val_opts);
            rs::validate(cfg);
            std::cout << "config ok: " << cfg.name << "\n";
            if (suites) {
                bool all = true;
                for (const auto& s : rs::run_validation_suites(cfg)) {
                    std::cout << (s.pass ? "PASS " : "FAIL ") << s.name << ": " << s.detail << "\n";
                    all = all && s.pass;
                }
                if (!all) return ValidationFailed;
            }
        } else if (*snell) {
            const auto cfg = resolve(snell_opts);
            print_files(snell_opts.out, rs::write_snell_tables(cfg, snell_opts.out));
        } else if (*scat) {
            const auto cfg = resolve(scat_opts);
            print_files(scat_opts.out, rs::write_scattering_distribution(cfg, scat_opts.out));
        } else if (*syn) {
            auto cfg = resolve(syn_opts);
            if (count > 0) cfg.realizations = count;
            print_files(syn_opts.out, rs::write_realizations(cfg, syn_opts.out));
        } else if (*show) {
            std::cout << rs::config_to_json(resolve(show_opts)) << "\n";
        }
    } catch (const rs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return BadConfig;
    } catch (const rs::ResolutionError& e) {
        std::cerr << "resolution error: " << e.what() << "\n";
        return BadResolution;
    } catch (const rs::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return BadIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return BadConfig;
    }
    return Ok;
}
