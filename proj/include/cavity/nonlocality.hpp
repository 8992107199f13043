#pragma once

// Bell-CHSH test built on two-mode displaced parity:
//   Pi(mu, nu) = D_A(mu) D_B(nu) (-1)^{a^dagger a + b^dagger b} D_A^dagger(mu) D_B^dagger(nu),
//   W(mu, nu)  = (4 / pi^2) <Pi(mu, nu)>,
//   |B|        = |<Pi(mu,nu)> + <Pi(mu,nu')> + <Pi(mu',nu)> - <Pi(mu',nu')>|.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cavity/evolution.hpp"

namespace cavity {

struct BellSettings {
    Complex mu;
    Complex nu;
    Complex mu_prime;
    Complex nu_prime;
};

struct BellResult {
    double value = 0.0;
    BellSettings settings;
    int iterations = 0;  // summed over all starts
    bool converged = false;
};

/// <Pi(mu, nu)> as a function of the two displacements.
using ParityEvaluator = std::function<double(Complex mu, Complex nu)>;

/// Tr[rho Pi(mu, nu)] by direct contraction over the Fock basis.
double displaced_parity_expectation(const TwoModeDensityMatrix& rho, Complex mu, Complex nu);

/// A two-mode operator written as sum_j A_j (x) B_j.
struct ProductExpansion {
    FockCutoff cutoff{1};
    std::vector<Matrix> mode_a;
    std::vector<Matrix> mode_b;

    /// Tr[X Pi(mu, nu)] = sum_j Tr(A_j P_A(mu)) Tr(B_j P_B(nu)).
    double parity_expectation(Complex mu, Complex nu) const;
    /// Tr(A_j P(z)) (or B_j) for every term j.
    std::vector<Complex> mode_traces(Mode mode, Complex z) const;
    /// Re sum_j a_j b_j.
    static double combine(const std::vector<Complex>& traces_a,
                          const std::vector<Complex>& traces_b);
    Matrix to_matrix() const;
};

/// Four-term expansion of the Fock-basis cat state (matching cat_density_matrix,
/// including its renormalization).
ProductExpansion cat_product_expansion(const CatTrajectory& traj, FockCutoff cutoff);

ParityEvaluator parity_evaluator(const TwoModeDensityMatrix& rho);
ParityEvaluator parity_evaluator(ProductExpansion expansion);

/// (4 / pi^2) Tr[rho Pi(mu, nu)].
double wigner_numeric(const TwoModeDensityMatrix& rho, Complex mu, Complex nu);

/// Closed-form two-mode Wigner function of the evolved cat state: two Gaussian
/// peaks at (alpha_pm, beta_pm) plus the xi-weighted interference term evaluated
/// with the printed (mu + alpha_pm), (nu + beta_pm) arguments.
double wigner_cat_analytic(const CatTrajectory& traj, Complex mu, Complex nu);

/// Comparison of the closed-form cat Wigner function against the Fock-basis parity trace.
struct WignerDiscrepancy {
    double max_abs_deviation = 0.0;
    Complex worst_mu;
    Complex worst_nu;
    double tolerance = 1e-6;
    bool consistent() const { return max_abs_deviation <= tolerance; }
    /// One-paragraph human-readable account; states which path feeds the optimizer.
    std::string report() const;
};

/// Evaluates both Wigner routes on the grid points x (x) y with mu = x, nu = y (real axes).
WignerDiscrepancy compare_cat_wigner(const CatTrajectory& traj, FockCutoff cutoff,
                                     const std::vector<double>& mu_grid,
                                     const std::vector<double>& nu_grid, double tolerance = 1e-6);

double bell_measure(const ParityEvaluator& parity, const BellSettings& settings);
/// Same value, reusing each mode's parity matrix across the four terms.
double bell_measure(const ProductExpansion& expansion, const BellSettings& settings);

enum class SettingsMode {
    fixed_origin,  // mu = nu = 0, optimize mu', nu'
    all_free,
};

struct OptimizerOptions {
    SettingsMode mode = SettingsMode::fixed_origin;
    int starts = 32;
    int max_iterations = 500;
    double gradient_tolerance = 1e-7;
    double fd_step = 1e-5;
    double initial_step = 0.1;
    /// Radius of the disc each complex setting's start point is drawn from.
    double search_radius = 1.0;
    std::uint64_t seed = 1;
};

/// max(1, 2|alpha|).
double default_search_radius(double alpha);

/// Multistart steepest ascent of |B| with central-difference gradients and
/// backtracking steps. Start 0 is the origin; the rest are scrambled Halton
/// points in the search disc, concentrated toward its centre.
BellResult maximize_bell(const ParityEvaluator& parity, const OptimizerOptions& options = {});
/// Separable fast path; identical objective values.
BellResult maximize_bell(const ProductExpansion& expansion, const OptimizerOptions& options = {});

}  // namespace cavity
