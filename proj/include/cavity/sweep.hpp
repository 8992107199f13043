#pragma once

// Parameter sweeps over the cavity model: flat key = value configuration,
// grid evaluation on a worker pool, CSV output and oracle comparison.

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavity/entanglement.hpp"
#include "cavity/nonlocality.hpp"

namespace cavity {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration; carries the source line (0 for command-line
/// overrides) and the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, int line, std::string field, const std::string& what);
    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    std::string field_;
    int line_;
};

struct ConfigEntry {
    std::string value;
    std::string source;
    int line = 0;
};

/// Raw key = value pairs; later assignments replace earlier ones.
struct RawConfig {
    std::map<std::string, ConfigEntry> entries;

    static RawConfig parse(std::istream& in, const std::string& source);
    static RawConfig load(const std::string& path);
    /// Applies a `key=value` override.
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);
};

/// Reads a real number, also accepting `pi`, `2*pi`, `pi/2`, `3*pi/4`.
double parse_real(const std::string& text);

enum class Scenario { single_photon, superposition, bell_state, cat };
enum class Quantity { concurrence, eof, linear_entropy, bell_max, wigner_slice };
enum class CutoffCheck { off, automatic, all };

std::string to_string(Scenario s);
std::string to_string(Quantity q);

struct Axis {
    std::string name;  // d, alpha, theta, gamma_t or kt
    double min = 0.0;
    double max = 0.0;
    int points = 1;

    /// min + i (max - min) / (points - 1).
    double value(int i) const;
};

struct SweepConfig {
    Scenario scenario = Scenario::single_photon;
    ModelParams params;
    double alpha = 1.0;
    double phi = 0.0;
    double theta = 0.0;
    double tau = 0.0;
    MixtureKind mixture = MixtureKind::pure;
    int bell_index = 3;
    double time = 0.0;  // used when no axis sets the time
    std::vector<Axis> axes;
    std::vector<Quantity> outputs;  // canonical order
    int cutoff = 0;                  // resolved n_max
    OptimizerOptions optimizer;
    bool search_radius_set = false;
    Complex wigner_mu;
    Complex wigner_nu;
    std::vector<double> oracle_kt;
    double oracle_tolerance = 1e-5;
    std::optional<double> oracle_dt;
    CutoffCheck cutoff_check = CutoffCheck::automatic;
    /// Resolved key = value pairs, echoed into the CSV header.
    std::map<std::string, std::string> echo;

    static SweepConfig from_raw(const RawConfig& raw);
    std::size_t grid_size() const;
};

/// One CSV cell: a number, or a token such as `error:QutritRegime`.
struct Cell {
    double value = 0.0;
    std::string token;

    bool numeric() const { return token.empty(); }
    std::string text() const;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> summary;
};

/// Evaluates the configured outputs on every grid point. Rows follow grid
/// order (last axis fastest) regardless of `threads`.
Table run_sweep(const SweepConfig& config, int threads = 1);

/// Bell maximization on the grid, reporting the optimal settings as well.
Table run_bell_max(const SweepConfig& config, int threads = 1);

struct OracleReport {
    Table table;
    bool passed = true;
};

/// Max entrywise deviation between Kraus, closed-form and RK4 states at the
/// configured kt values.
OracleReport oracle_compare(const SweepConfig& config);

/// `#` header lines, column row, data rows.
void write_csv(std::ostream& out, const Table& table, const SweepConfig& config,
               const std::string& command);

/// %.12g, with nan and inf spelled out.
std::string format_number(double x);

}  // namespace cavity
