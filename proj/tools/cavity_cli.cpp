// cavity: parameter sweeps, oracle comparison and Bell maximization for two
// coupled damped cavity modes.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cavity/sweep.hpp"

namespace {

enum Exit { ok = 0, config_error = 1, tolerance_failure = 2, internal_error = 3 };

struct Common {
    std::string config_path;
    std::string out;
    std::vector<std::string> sets;
    long long seed = -1;
    int cutoff = -1;
    int threads = 0;
};

void add_common(CLI::App* cmd, Common& opts) {
    cmd->add_option("config", opts.config_path, "configuration file (key = value lines)")
        ->required();
    cmd->add_option("--out", opts.out, "CSV output path (default: stdout)");
    cmd->add_option("--set", opts.sets, "override a configuration entry, key=value")
        ->take_all()
        ->allow_extra_args(false);
    cmd->add_option("--seed", opts.seed, "optimizer seed")->check(CLI::NonNegativeNumber);
    cmd->add_option("--cutoff", opts.cutoff, "Fock cutoff n_max")->check(CLI::Range(1, 200));
    cmd->add_option("--threads", opts.threads, "worker threads (0: hardware concurrency)")
        ->check(CLI::NonNegativeNumber);
}

cavity::SweepConfig load(const Common& opts) {
    cavity::RawConfig raw = cavity::RawConfig::load(opts.config_path);
    for (const auto& s : opts.sets) raw.set(s);
    if (opts.seed >= 0) raw.set("seed", std::to_string(opts.seed));
    if (opts.cutoff > 0) raw.set("cutoff", std::to_string(opts.cutoff));
    return cavity::SweepConfig::from_raw(raw);
}

// CSV goes to --out or stdout; the summary goes to whichever stream is free.
void emit(const cavity::Table& table, const cavity::SweepConfig& config, const Common& opts,
          const std::string& command) {
    std::ostream* summary = &std::cout;
    if (opts.out.empty()) {
        cavity::write_csv(std::cout, table, config, command);
        summary = &std::cerr;
    } else {
        std::ofstream file(opts.out, std::ios::binary);
        if (!file) throw std::runtime_error("cannot write " + opts.out);
        cavity::write_csv(file, table, config, command);
        if (!file.flush()) throw std::runtime_error("error writing " + opts.out);
    }
    for (const auto& line : table.summary) *summary << line << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entanglement and nonlocality of two coupled dissipative cavities"};
    app.set_version_flag("--version", cavity::kVersion);
    app.require_subcommand(1);

    Common sweep_opts, oracle_opts, bell_opts;
    auto* sweep = app.add_subcommand("sweep", "evaluate quantities on a parameter grid");
    auto* oracle =
        app.add_subcommand("oracle-compare", "compare Kraus, closed-form and RK4 evolution");
    auto* bell = app.add_subcommand("bell-max", "maximize the Bell measure on a parameter grid");
    add_common(sweep, sweep_opts);
    add_common(oracle, oracle_opts);
    add_common(bell, bell_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::config_error;
    }

    try {
        if (sweep->parsed()) {
            const auto config = load(sweep_opts);
            emit(cavity::run_sweep(config, sweep_opts.threads), config, sweep_opts, "sweep");
            return Exit::ok;
        }
        if (bell->parsed()) {
            const auto config = load(bell_opts);
            emit(cavity::run_bell_max(config, bell_opts.threads), config, bell_opts, "bell-max");
            return Exit::ok;
        }
        const auto config = load(oracle_opts);
        const auto report = cavity::oracle_compare(config);
        emit(report.table, config, oracle_opts, "oracle-compare");
        return report.passed ? Exit::ok : Exit::tolerance_failure;
    } catch (const cavity::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return Exit::config_error;
    } catch (const cavity::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
            case cavity::ErrorKind::InvalidArgument:
            case cavity::ErrorKind::DegenerateCat:
            case cavity::ErrorKind::QutritRegime:
            case cavity::ErrorKind::OutOfRange:
                return Exit::config_error;
            case cavity::ErrorKind::PositivityLost:
            case cavity::ErrorKind::SeriesNotConverged:
            case cavity::ErrorKind::CutoffTooSmall:
                return Exit::tolerance_failure;
            default:
                return Exit::internal_error;
        }
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return Exit::internal_error;
    }
}
