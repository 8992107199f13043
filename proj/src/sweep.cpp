#include "cavity/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <mutex>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace cavity {

ConfigError::ConfigError(std::string source, int line, std::string field, const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         ": field '" + field + "': " + what),
      field_(std::move(field)),
      line_(line) {}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::optional<double> parse_plain(const std::string& s) {
    double x = 0.0;
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return x;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "scenario",          "omega",
        "k",                 "gamma",
        "alpha",             "phi",
        "theta",             "tau",
        "mixture",           "bell_index",
        "t",                 "kt",
        "gamma_t",           "axis1",
        "axis2",             "outputs",
        "cutoff",            "seed",
        "cutoff_check",      "wigner.mu_re",
        "wigner.mu_im",      "wigner.nu_re",
        "wigner.nu_im",      "optimizer.mode",
        "optimizer.starts",  "optimizer.max_iterations",
        "optimizer.gradient_tolerance", "optimizer.fd_step",
        "optimizer.initial_step",       "optimizer.search_radius",
        "oracle.kt",         "oracle.tolerance",
        "oracle.dt",
    };
    return keys;
}

}  // namespace

double parse_real(const std::string& text) {
    const std::string s = trim(text);
    auto fail = [&]() -> double {
        throw std::invalid_argument("expected a number, got '" + text + "'");
    };
    if (s.empty()) fail();
    std::string num = s, den;
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        num = trim(s.substr(0, slash));
        den = trim(s.substr(slash + 1));
    }
    double value = 0.0;
    if (num == "pi") {
        value = std::numbers::pi;
    } else if (num.size() > 3 && num.compare(num.size() - 3, 3, "*pi") == 0) {
        const auto factor = parse_plain(trim(num.substr(0, num.size() - 3)));
        if (!factor) fail();
        value = *factor * std::numbers::pi;
    } else if (num == "-pi") {
        value = -std::numbers::pi;
    } else {
        const auto plain = parse_plain(num);
        if (!plain) fail();
        value = *plain;
    }
    if (!den.empty() || s.find('/') != std::string::npos) {
        const auto d = parse_plain(den);
        if (!d || *d == 0.0) fail();
        value /= *d;
    }
    if (!std::isfinite(value)) fail();
    return value;
}

RawConfig RawConfig::parse(std::istream& in, const std::string& source) {
    RawConfig out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source, number, line, "expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (!known_keys().count(key)) throw ConfigError(source, number, key, "unknown key");
        out.entries[key] = {trim(line.substr(eq + 1)), source, number};
    }
    return out;
}

RawConfig RawConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "<file>", "cannot open configuration file");
    return parse(in, path);
}

void RawConfig::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("--set", 0, assignment, "expected key=value");
    }
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void RawConfig::set(const std::string& key, const std::string& value) {
    if (!known_keys().count(key)) throw ConfigError("--set", 0, key, "unknown key");
    entries[key] = {value, "--set", 0};
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::single_photon: return "single_photon";
        case Scenario::superposition: return "superposition";
        case Scenario::bell_state: return "bell_state";
        case Scenario::cat: return "cat";
    }
    return "unknown";
}

std::string to_string(Quantity q) {
    switch (q) {
        case Quantity::concurrence: return "concurrence";
        case Quantity::eof: return "eof";
        case Quantity::linear_entropy: return "linear_entropy";
        case Quantity::bell_max: return "bell_max";
        case Quantity::wigner_slice: return "wigner_slice";
    }
    return "unknown";
}

double Axis::value(int i) const {
    if (points == 1) return min;
    if (i == points - 1) return max;
    return min + (max - min) * static_cast<double>(i) / (points - 1);
}

std::size_t SweepConfig::grid_size() const {
    std::size_t n = 1;
    for (const Axis& a : axes) n *= static_cast<std::size_t>(a.points);
    return n;
}

namespace {

// Typed access to a RawConfig with per-entry error reporting.
class Reader {
public:
    explicit Reader(const RawConfig& raw) : raw_(raw) {}

    bool has(const std::string& key) const { return raw_.entries.count(key) > 0; }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        const auto it = raw_.entries.find(key);
        if (it == raw_.entries.end()) throw ConfigError("config", 0, key, what);
        throw ConfigError(it->second.source, it->second.line, key, what);
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        const auto it = raw_.entries.find(key);
        return it == raw_.entries.end() ? fallback : it->second.value;
    }

    double real(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        try {
            return parse_real(text(key, ""));
        } catch (const std::invalid_argument& e) {
            fail(key, e.what());
        }
    }

    long long integer(const std::string& key, long long fallback) const {
        if (!has(key)) return fallback;
        const std::string s = text(key, "");
        long long x = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            fail(key, "expected an integer, got '" + s + "'");
        }
        return x;
    }

private:
    const RawConfig& raw_;
};

bool is_time_axis(const std::string& name) {
    return name == "d" || name == "kt" || name == "gamma_t";
}

Axis parse_axis(const Reader& r, const std::string& key) {
    const auto parts = split(r.text(key, ""), ':');
    if (parts.size() != 4) r.fail(key, "expected name:min:max:points");
    Axis a;
    a.name = parts[0];
    if (a.name != "d" && a.name != "alpha" && a.name != "theta" && a.name != "gamma_t" &&
        a.name != "kt") {
        r.fail(key, "axis name must be one of d, alpha, theta, gamma_t, kt");
    }
    try {
        a.min = parts[1].empty() && a.name == "d" ? 0.0 : parse_real(parts[1]);
        a.max = parts[2].empty() && a.name == "d" ? 0.99 : parse_real(parts[2]);
    } catch (const std::invalid_argument& e) {
        r.fail(key, e.what());
    }
    const auto n = parse_plain(parts[3]);
    if (!n || *n < 1 || *n != std::floor(*n) || *n > 1e6) r.fail(key, "points must be a positive integer");
    a.points = static_cast<int>(*n);
    if (a.max < a.min) r.fail(key, "max must not be below min");
    if (a.name == "d" && (a.min < 0.0 || a.max >= 1.0)) r.fail(key, "d must lie in [0, 1)");
    if ((a.name == "kt" || a.name == "gamma_t") && a.min < 0.0) r.fail(key, "time must be >= 0");
    return a;
}

}  // namespace

SweepConfig SweepConfig::from_raw(const RawConfig& raw) {
    const Reader r(raw);
    SweepConfig c;
    for (const auto& [key, entry] : raw.entries) c.echo[key] = entry.value;

    const std::string scenario = r.text("scenario", "single_photon");
    if (scenario == "single_photon") {
        c.scenario = Scenario::single_photon;
    } else if (scenario == "superposition") {
        c.scenario = Scenario::superposition;
    } else if (scenario == "bell_state") {
        c.scenario = Scenario::bell_state;
    } else if (scenario == "cat") {
        c.scenario = Scenario::cat;
    } else {
        r.fail("scenario", "expected single_photon, superposition, bell_state or cat");
    }

    c.params = {r.real("omega", 0.0), r.real("k", 1.0), r.real("gamma", 0.0)};
    if (c.params.k < 0.0) r.fail("k", "decay constant must be >= 0");
    c.alpha = r.real("alpha", 1.0);
    if (c.alpha < 0.0) r.fail("alpha", "amplitude must be >= 0");
    c.phi = r.real("phi", std::numbers::pi / 2.0);
    c.theta = r.real("theta", 0.0);
    c.tau = r.real("tau", 0.0);
    const std::string mixture = r.text("mixture", "pure");
    if (mixture == "pure") {
        c.mixture = MixtureKind::pure;
    } else if (mixture == "mixed") {
        c.mixture = MixtureKind::mixed;
    } else {
        r.fail("mixture", "expected pure or mixed");
    }
    c.bell_index = static_cast<int>(r.integer("bell_index", 3));
    if (c.bell_index < 1 || c.bell_index > 4) r.fail("bell_index", "expected 1, 2, 3 or 4");

    int time_keys = 0;
    for (const char* key : {"t", "kt", "gamma_t"}) time_keys += r.has(key);
    if (time_keys > 1) r.fail("t", "set at most one of t, kt, gamma_t");
    if (r.has("kt")) {
        if (c.params.k == 0.0) r.fail("kt", "kt needs k > 0");
        c.time = r.real("kt", 0.0) / c.params.k;
    } else if (r.has("gamma_t")) {
        if (c.params.gamma == 0.0) r.fail("gamma_t", "gamma_t needs gamma != 0");
        c.time = r.real("gamma_t", 0.0) / std::abs(c.params.gamma);
    } else {
        c.time = r.real("t", 0.0);
    }
    if (c.time < 0.0) r.fail("t", "time must be >= 0");

    for (const char* key : {"axis1", "axis2"}) {
        if (r.has(key)) c.axes.push_back(parse_axis(r, key));
    }
    if (r.has("axis2") && !r.has("axis1")) r.fail("axis2", "axis2 needs axis1");
    if (c.axes.size() == 2 && c.axes[0].name == c.axes[1].name) {
        r.fail("axis2", "axes must differ");
    }
    int time_axes = 0;
    for (std::size_t i = 0; i < c.axes.size(); ++i) {
        const Axis& a = c.axes[i];
        const std::string key = i == 0 ? "axis1" : "axis2";
        if (is_time_axis(a.name)) {
            ++time_axes;
            if (time_keys > 0) r.fail(key, "time axis conflicts with a fixed t, kt or gamma_t");
            if ((a.name == "d" || a.name == "kt") && c.params.k == 0.0) {
                r.fail(key, "d and kt axes need k > 0");
            }
            if (a.name == "gamma_t" && c.params.gamma == 0.0) {
                r.fail(key, "gamma_t axis needs gamma != 0");
            }
        }
        if (a.name == "alpha" && c.scenario != Scenario::cat) {
            r.fail(key, "alpha axis applies to the cat scenario only");
        }
        if (a.name == "alpha" && a.min < 0.0) r.fail(key, "alpha must be >= 0");
        if (a.name == "theta" && c.scenario != Scenario::cat &&
            c.scenario != Scenario::superposition) {
            r.fail(key, "theta axis applies to the superposition and cat scenarios");
        }
    }
    if (time_axes > 1) r.fail("axis2", "at most one time axis");

    std::set<Quantity> wanted;
    for (const std::string& name : split(r.text("outputs", "concurrence"), ',')) {
        bool found = false;
        for (const Quantity q : {Quantity::concurrence, Quantity::eof, Quantity::linear_entropy,
                                 Quantity::bell_max, Quantity::wigner_slice}) {
            if (name == to_string(q)) {
                wanted.insert(q);
                found = true;
            }
        }
        if (!found) r.fail("outputs", "unknown quantity '" + name + "'");
    }
    c.outputs.assign(wanted.begin(), wanted.end());

    OptimizerOptions& o = c.optimizer;
    const std::string mode = r.text("optimizer.mode", "fixed_origin");
    if (mode == "fixed_origin") {
        o.mode = SettingsMode::fixed_origin;
    } else if (mode == "all_free") {
        o.mode = SettingsMode::all_free;
    } else {
        r.fail("optimizer.mode", "expected fixed_origin or all_free");
    }
    o.starts = static_cast<int>(r.integer("optimizer.starts", o.starts));
    if (o.starts < 1) r.fail("optimizer.starts", "must be >= 1");
    o.max_iterations = static_cast<int>(r.integer("optimizer.max_iterations", o.max_iterations));
    if (o.max_iterations < 0) r.fail("optimizer.max_iterations", "must be >= 0");
    o.gradient_tolerance = r.real("optimizer.gradient_tolerance", o.gradient_tolerance);
    o.fd_step = r.real("optimizer.fd_step", o.fd_step);
    if (!(o.fd_step > 0.0)) r.fail("optimizer.fd_step", "must be > 0");
    o.initial_step = r.real("optimizer.initial_step", o.initial_step);
    if (!(o.initial_step > 0.0)) r.fail("optimizer.initial_step", "must be > 0");
    c.search_radius_set = r.has("optimizer.search_radius");
    o.search_radius = r.real("optimizer.search_radius", o.search_radius);
    if (o.search_radius < 0.0) r.fail("optimizer.search_radius", "must be >= 0");
    const long long seed = r.integer("seed", 1);
    if (seed < 0) r.fail("seed", "must be >= 0");
    o.seed = static_cast<std::uint64_t>(seed);

    c.wigner_mu = {r.real("wigner.mu_re", 0.0), r.real("wigner.mu_im", 0.0)};
    c.wigner_nu = {r.real("wigner.nu_re", 0.0), r.real("wigner.nu_im", 0.0)};

    for (const std::string& item : split(r.text("oracle.kt", "0.1,0.2,0.5,1"), ',')) {
        try {
            const double kt = parse_real(item);
            if (kt < 0.0) r.fail("oracle.kt", "kt must be >= 0");
            c.oracle_kt.push_back(kt);
        } catch (const std::invalid_argument& e) {
            r.fail("oracle.kt", e.what());
        }
    }
    c.oracle_tolerance = r.real("oracle.tolerance", 1e-5);
    if (!(c.oracle_tolerance > 0.0)) r.fail("oracle.tolerance", "must be > 0");
    if (r.has("oracle.dt")) {
        c.oracle_dt = r.real("oracle.dt", 0.0);
        if (!(*c.oracle_dt > 0.0)) r.fail("oracle.dt", "must be > 0");
    }

    const std::string check = r.text("cutoff_check", "auto");
    if (check == "off") {
        c.cutoff_check = CutoffCheck::off;
    } else if (check == "auto") {
        c.cutoff_check = CutoffCheck::automatic;
    } else if (check == "all") {
        c.cutoff_check = CutoffCheck::all;
    } else {
        r.fail("cutoff_check", "expected off, auto or all");
    }

    if (r.has("cutoff")) {
        const long long n = r.integer("cutoff", 0);
        if (n < 1 || n > 200) r.fail("cutoff", "must lie in [1, 200]");
        c.cutoff = static_cast<int>(n);
    } else if (c.scenario == Scenario::cat) {
        double alpha_max = c.alpha;
        for (const Axis& a : c.axes) {
            if (a.name == "alpha") alpha_max = a.max;
        }
        c.cutoff = default_cutoff(alpha_max).n_max();
    } else {
        c.cutoff = 8;
    }
    return c;
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string Cell::text() const { return numeric() ? format_number(value) : token; }

namespace {

struct Point {
    double t = 0.0;
    double alpha = 0.0;
    double theta = 0.0;
};

Point resolve_point(const SweepConfig& c, const std::vector<double>& axis_values) {
    Point p{c.time, c.alpha, c.theta};
    for (std::size_t i = 0; i < c.axes.size(); ++i) {
        const std::string& name = c.axes[i].name;
        const double v = axis_values[i];
        if (name == "d") {
            p.t = -0.5 * std::log1p(-v * v) / c.params.k;
        } else if (name == "kt") {
            p.t = v / c.params.k;
        } else if (name == "gamma_t") {
            p.t = v / std::abs(c.params.gamma);
        } else if (name == "alpha") {
            p.alpha = v;
        } else {
            p.theta = v;
        }
    }
    return p;
}

std::vector<double> axis_values(const SweepConfig& c, std::size_t flat) {
    std::vector<double> out(c.axes.size());
    for (std::size_t i = c.axes.size(); i-- > 0;) {
        const auto n = static_cast<std::size_t>(c.axes[i].points);
        out[i] = c.axes[i].value(static_cast<int>(flat % n));
        flat /= n;
    }
    return out;
}

Cell error_cell(const Error& e) { return {std::numeric_limits<double>::quiet_NaN(), std::string("error:") + to_string(e.kind())}; }

bool wants(const SweepConfig& c, Quantity q) {
    return std::find(c.outputs.begin(), c.outputs.end(), q) != c.outputs.end();
}

// Quantities at one grid point, in output order, plus diagnostics.
struct PointOutcome {
    std::vector<Cell> quantities;
    double trace_deficit = 0.0;
    std::optional<BellResult> bell;
    std::string status = "ok";
};

OptimizerOptions optimizer_for(const SweepConfig& c, double alpha) {
    OptimizerOptions o = c.optimizer;
    if (!c.search_radius_set) {
        o.search_radius = default_search_radius(c.scenario == Scenario::cat ? alpha : 0.0);
    }
    return o;
}

PointOutcome evaluate(const SweepConfig& c, const Point& p, int n_max, bool with_bell) {
    PointOutcome out;
    const FockCutoff cutoff(n_max);
    std::optional<Error> first_error;

    // Lazily built state representations.
    std::optional<TwoModeDensityMatrix> rho;
    bool qutrit = false;
    std::optional<CatTrajectory> traj;
    std::optional<ProductExpansion> expansion;

    auto fock_state = [&]() -> const TwoModeDensityMatrix& {
        if (!rho) {
            switch (c.scenario) {
                case Scenario::single_photon:
                    rho = closed_form_single_photon(c.params, p.t, cutoff);
                    break;
                case Scenario::superposition:
                    rho = closed_form_superposition({p.theta, c.tau, c.mixture}, c.params, p.t, cutoff);
                    break;
                case Scenario::bell_state: {
                    auto evolved = evolved_bell_state(BellStateIndex(c.bell_index), c.params, p.t, cutoff);
                    out.trace_deficit = evolved.trace_deficit;
                    qutrit = evolved.qutrit_regime;
                    rho = std::move(evolved.rho);
                    break;
                }
                case Scenario::cat:
                    break;
            }
        }
        return *rho;
    };
    auto cat = [&]() -> const CatTrajectory& {
        if (!traj) traj = cat_trajectory({p.alpha, c.phi, p.theta}, c.params, p.t);
        return *traj;
    };
    auto cat_expansion = [&]() -> const ProductExpansion& {
        if (!expansion) {
            const CatTrajectory& tr = cat();
            expansion = cat_product_expansion(tr, cutoff);
            for (const Complex z : {tr.alpha_plus, tr.alpha_minus, tr.beta_plus, tr.beta_minus}) {
                out.trace_deficit =
                    std::max(out.trace_deficit, coherent_state_vector(z, cutoff).truncation_deficit);
            }
        }
        return *expansion;
    };

    std::optional<double> concurrence_value;
    auto concurrence_now = [&]() -> double {
        if (!concurrence_value) {
            if (c.scenario == Scenario::cat) {
                concurrence_value = concurrence(effective_two_qubit(cat())).value;
            } else {
                const TwoModeDensityMatrix& state = fock_state();
                if (qutrit) {
                    throw Error(ErrorKind::QutritRegime,
                                "state leaves the two-qubit space; concurrence undefined");
                }
                concurrence_value = wootters_concurrence(qubit_block(state).rho).value;
            }
        }
        return *concurrence_value;
    };

    for (const Quantity q : c.outputs) {
        if (q == Quantity::bell_max && !with_bell) {
            out.quantities.push_back({std::numeric_limits<double>::quiet_NaN(), "skipped"});
            continue;
        }
        try {
            double v = 0.0;
            switch (q) {
                case Quantity::concurrence:
                    v = concurrence_now();
                    break;
                case Quantity::eof:
                    v = eof_from_concurrence({concurrence_now()}).value;
                    break;
                case Quantity::linear_entropy:
                    if (c.scenario == Scenario::cat) {
                        const Eigen::Matrix2cd ra = reduced_state_a(effective_two_qubit(cat()));
                        v = 1.0 - (ra * ra).trace().real();
                    } else {
                        v = linear_entropy(partial_trace(fock_state(), Mode::A));
                    }
                    break;
                case Quantity::bell_max: {
                    const OptimizerOptions o = optimizer_for(c, p.alpha);
                    const BellResult r = c.scenario == Scenario::cat
                                             ? maximize_bell(cat_expansion(), o)
                                             : maximize_bell(parity_evaluator(fock_state()), o);
                    out.bell = r;
                    v = r.value;
                    break;
                }
                case Quantity::wigner_slice:
                    v = c.scenario == Scenario::cat
                            ? 4.0 / (std::numbers::pi * std::numbers::pi) *
                                  cat_expansion().parity_expectation(c.wigner_mu, c.wigner_nu)
                            : wigner_numeric(fock_state(), c.wigner_mu, c.wigner_nu);
                    break;
            }
            out.quantities.push_back({v, {}});
        } catch (const Error& e) {
            out.quantities.push_back(error_cell(e));
            if (!first_error) first_error = e;
        }
    }
    if (first_error) out.status = std::string("error:") + to_string(first_error->kind());
    return out;
}

// Runs fn(i) for i in [0, n) on `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(
        std::max(1, threads <= 0 ? static_cast<int>(std::thread::hardware_concurrency()) : threads));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, n); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

void add_minmax_summary(Table& table, std::size_t first, std::size_t count) {
    for (std::size_t col = first; col < first + count; ++col) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        std::size_t tokens = 0;
        for (const auto& row : table.rows) {
            const Cell& cell = row[col];
            if (!cell.numeric()) {
                ++tokens;
                continue;
            }
            lo = std::min(lo, cell.value);
            hi = std::max(hi, cell.value);
        }
        std::string line = table.columns[col] + ": ";
        line += lo <= hi ? "min " + format_number(lo) + ", max " + format_number(hi) : "no values";
        if (tokens > 0) line += ", " + std::to_string(tokens) + " non-numeric";
        table.summary.push_back(line);
    }
}

Table run_grid(const SweepConfig& config, int threads, bool detailed_bell) {
    Table table;
    for (const Axis& a : config.axes) table.columns.push_back(a.name);
    const std::size_t axis_count = config.axes.size();
    for (const Quantity q : config.outputs) table.columns.push_back(to_string(q));
    const bool has_bell = wants(config, Quantity::bell_max);
    if (detailed_bell) {
        for (const char* name : {"mu_re", "mu_im", "nu_re", "nu_im", "mu_prime_re", "mu_prime_im",
                                 "nu_prime_re", "nu_prime_im", "bell_iterations"}) {
            table.columns.push_back(name);
        }
    }
    table.columns.push_back("trace_deficit");
    if (has_bell) table.columns.push_back("bell_converged");
    table.columns.push_back("status");

    const std::size_t n = config.grid_size();
    std::vector<PointOutcome> outcomes(n);
    parallel_for(n, threads, [&](std::size_t i) {
        outcomes[i] = evaluate(config, resolve_point(config, axis_values(config, i)),
                               config.cutoff, true);
    });

    table.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Cell> row;
        for (const double v : axis_values(config, i)) row.push_back({v, {}});
        const PointOutcome& o = outcomes[i];
        row.insert(row.end(), o.quantities.begin(), o.quantities.end());
        if (detailed_bell) {
            if (o.bell) {
                const BellSettings& s = o.bell->settings;
                for (const Complex z : {s.mu, s.nu, s.mu_prime, s.nu_prime}) {
                    row.push_back({z.real(), {}});
                    row.push_back({z.imag(), {}});
                }
                row.push_back({static_cast<double>(o.bell->iterations), {}});
            } else {
                for (int j = 0; j < 9; ++j) row.push_back({std::numeric_limits<double>::quiet_NaN(), "na"});
            }
        }
        row.push_back({o.trace_deficit, {}});
        if (has_bell) {
            row.push_back(o.bell ? Cell{o.bell->converged ? 1.0 : 0.0, {}}
                                 : Cell{std::numeric_limits<double>::quiet_NaN(), "na"});
        }
        row.push_back({0.0, o.status});
        table.rows.push_back(std::move(row));
    }

    add_minmax_summary(table, axis_count, config.outputs.size());

    // Convergence certificate: rerun at n_max + 5.
    const bool fock_dependent_only = config.scenario == Scenario::cat;
    bool any_checked = false;
    if (config.cutoff_check != CutoffCheck::off) {
        const bool with_bell = config.cutoff_check == CutoffCheck::all;
        std::vector<PointOutcome> escalated(n);
        std::vector<bool> checked(config.outputs.size(), false);
        for (std::size_t q = 0; q < config.outputs.size(); ++q) {
            const Quantity qty = config.outputs[q];
            const bool needs_fock = !fock_dependent_only || qty == Quantity::bell_max ||
                                    qty == Quantity::wigner_slice;
            checked[q] = needs_fock && (qty != Quantity::bell_max || with_bell);
            any_checked = any_checked || checked[q];
        }
        if (any_checked) {
            parallel_for(n, threads, [&](std::size_t i) {
                escalated[i] = evaluate(config, resolve_point(config, axis_values(config, i)),
                                        config.cutoff + 5, with_bell);
            });
            double worst = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t q = 0; q < config.outputs.size(); ++q) {
                    if (!checked[q]) continue;
                    const Cell& a = outcomes[i].quantities[q];
                    const Cell& b = escalated[i].quantities[q];
                    if (a.numeric() && b.numeric()) worst = std::max(worst, std::abs(a.value - b.value));
                }
            }
            std::string line = "cutoff check: n_max " + std::to_string(config.cutoff) + " -> " +
                               std::to_string(config.cutoff + 5) + ", max change " +
                               format_number(worst) + " (";
            bool first = true;
            for (std::size_t q = 0; q < config.outputs.size(); ++q) {
                if (!checked[q]) continue;
                line += (first ? "" : ", ") + to_string(config.outputs[q]);
                first = false;
            }
            line += worst < 1e-6 ? "): converged" : "): NOT converged below 1e-6";
            table.summary.push_back(line);
        }
    }
    if (!any_checked) {
        table.summary.push_back("cutoff check: not run for these outputs");
    }
    for (const Axis& a : config.axes) {
        if (a.name == "d") {
            table.summary.push_back(
                "d -> 1 limit (kt -> infinity): both modes decay to vacuum; concurrence 0, eof 0, "
                "linear_entropy 0, bell_max 2");
        }
    }
    return table;
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

Table run_sweep(const SweepConfig& config, int threads) { return run_grid(config, threads, false); }

Table run_bell_max(const SweepConfig& config, int threads) {
    SweepConfig c = config;
    c.outputs = {Quantity::bell_max};
    return run_grid(c, threads, true);
}

OracleReport oracle_compare(const SweepConfig& config) {
    if (config.params.k == 0.0) {
        throw ConfigError("config", 0, "k", "oracle comparison is parameterized by kt; needs k > 0");
    }
    const FockCutoff cutoff(config.cutoff);
    std::optional<TwoModeDensityMatrix> rho0;
    switch (config.scenario) {
        case Scenario::single_photon:
            rho0 = TwoModeDensityMatrix::fock(1, 0, cutoff);
            break;
        case Scenario::superposition:
            rho0 = superposition_initial_state({config.theta, config.tau, config.mixture}, cutoff);
            break;
        case Scenario::bell_state:
            rho0 = bell_state(BellStateIndex(config.bell_index), cutoff);
            break;
        case Scenario::cat:
            rho0 = cat_initial_state({config.alpha, config.phi, config.theta}, cutoff);
            break;
    }
    std::vector<double> times;
    for (const double kt : config.oracle_kt) times.push_back(kt / config.params.k);
    const double dt = config.oracle_dt.value_or(default_time_step(config.params));
    const auto rk4 = lindblad_step_integrate(*rho0, config.params, times, dt);

    OracleReport report;
    Table& table = report.table;
    table.columns = {"kt",        "kraus_vs_rk4",  "closed_vs_rk4", "kraus_vs_closed",
                     "kraus_trace_deficit", "tolerance", "pass"};
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        const EvolvedState kraus = kraus_evolve(*rho0, config.params, t);
        std::optional<TwoModeDensityMatrix> closed;
        switch (config.scenario) {
            case Scenario::single_photon:
                closed = closed_form_single_photon(config.params, t, cutoff);
                break;
            case Scenario::superposition:
                closed = closed_form_superposition({config.theta, config.tau, config.mixture},
                                                   config.params, t, cutoff);
                break;
            case Scenario::bell_state:
                break;
            case Scenario::cat:
                closed = cat_density_matrix(
                    cat_trajectory({config.alpha, config.phi, config.theta}, config.params, t), cutoff);
                break;
        }
        const double tol = t == 0.0 ? 1e-12 : config.oracle_tolerance;
        const double kr = max_abs_diff(kraus.rho.matrix(), rk4[i].matrix());
        bool pass = kr <= tol && kraus.trace_deficit <= 1e-8;
        worst = std::max(worst, kr);
        std::vector<Cell> row{{config.oracle_kt[i], {}}, {kr, {}}};
        if (closed) {
            const double cr = max_abs_diff(closed->matrix(), rk4[i].matrix());
            const double kc = max_abs_diff(kraus.rho.matrix(), closed->matrix());
            pass = pass && cr <= tol && kc <= tol;
            worst = std::max({worst, cr, kc});
            row.push_back({cr, {}});
            row.push_back({kc, {}});
        } else {
            row.push_back({std::numeric_limits<double>::quiet_NaN(), "na"});
            row.push_back({std::numeric_limits<double>::quiet_NaN(), "na"});
        }
        row.push_back({kraus.trace_deficit, {}});
        row.push_back({tol, {}});
        row.push_back({pass ? 1.0 : 0.0, {}});
        report.passed = report.passed && pass;
        table.rows.push_back(std::move(row));
    }
    table.summary.push_back("max deviation " + format_number(worst) + " (RK4 step " +
                            format_number(dt) + ")");
    table.summary.push_back(report.passed ? "oracle comparison: PASS" : "oracle comparison: FAIL");
    return report;
}

void write_csv(std::ostream& out, const Table& table, const SweepConfig& config,
               const std::string& command) {
    out << "# cavity " << kVersion << '\n';
    out << "# command: " << command << '\n';
    out << "# seed: " << config.optimizer.seed << '\n';
    out << "# cutoff: " << config.cutoff << '\n';
    for (const auto& [key, value] : config.echo) out << "# config: " << key << " = " << value << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out << (i ? "," : "") << table.columns[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i].text();
        out << '\n';
    }
}

}  // namespace cavity
