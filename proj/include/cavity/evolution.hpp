#pragma once

// Dynamics of two identical, coupled, zero-temperature damped cavity modes:
//
//   drho/dt = -i[H, rho] - k{N, rho} + 2k (a rho a^dagger + b rho b^dagger),
//   H = omega N + gamma (a^dagger b + b^dagger a),  N = a^dagger a + b^dagger b.
//
// Three routes are provided: a fixed-step RK4 integrator of the master
// equation (the brute-force reference), the operator-sum (Kraus) solution,
// and closed-form density matrices for specific initial states.

#include <span>
#include <vector>

#include "cavity/fock.hpp"

namespace cavity {

struct ModelParams {
    double omega = 0.0;  // mode frequency
    double k = 1.0;      // decay constant
    double gamma = 0.0;  // mode coupling

    /// Throws InvalidArgument unless k >= 0 and all values are finite.
    void validate() const;
};

enum class MixtureKind { pure, mixed };

/// Mode A starts in cos(theta/2)|1> + sin(theta/2) e^{i tau}|0> (pure) or the
/// corresponding diagonal mixture (mixed); mode B starts in vacuum.
struct SuperpositionSpec {
    double theta = 0.0;
    double tau = 0.0;
    MixtureKind kind = MixtureKind::pure;
};

/// Mode A starts in N (|alpha e^{i phi}> + e^{i theta} |alpha e^{-i phi}>); mode B in vacuum.
struct CatSpec {
    Complex alpha{1.0, 0.0};
    double phi = 0.0;
    double theta = 0.0;
};

/// Evolved cat-state branch amplitudes and coherence factor at one instant.
struct CatTrajectory {
    Complex alpha_plus;
    Complex alpha_minus;
    Complex beta_plus;
    Complex beta_minus;
    Complex xi;
    double norm_const = 0.0;
};

/// Selects one of |B1> = (|11>+|00>)/sqrt2, |B2> = (|11>-|00>)/sqrt2,
/// |B3> = (|10>+|01>)/sqrt2, |B4> = (|10>-|01>)/sqrt2.
class BellStateIndex {
public:
    explicit BellStateIndex(int i);
    int value() const noexcept { return i_; }

private:
    int i_;
};

/// Result of a channel evaluation together with its convergence diagnostics.
struct EvolvedState {
    TwoModeDensityMatrix rho;
    double trace_deficit = 0.0;
    /// Set for |B1>, |B2> with gamma != 0: the state leaves the two-qubit block.
    bool qutrit_regime = false;
};

/// min(1e-3/k, 1e-3/|gamma|, 1e-3/max(|omega|, 1)), ignoring vanishing rates.
double default_time_step(const ModelParams& params);

/// Fixed-step RK4 integration of the master equation up to time t.
/// Throws PositivityLost if the result has an eigenvalue below -1e-6.
TwoModeDensityMatrix lindblad_step_integrate(const TwoModeDensityMatrix& rho0,
                                             const ModelParams& params, double t, double dt_max);

/// As above, returning the state at every requested time (sorted ascending)
/// from a single integration pass.
std::vector<TwoModeDensityMatrix> lindblad_step_integrate(const TwoModeDensityMatrix& rho0,
                                                          const ModelParams& params,
                                                          std::span<const double> times,
                                                          double dt_max);

/// Operator-sum solution
///   rho(t) = sum_{n1+n2 <= n_max} (1-e^{-2kt})^{n1+n2}/(n1! n2!)
///            U1 U2 a^n1 b^n2 rho0 a^dagger^n1 b^dagger^n2 U2^dagger U1^dagger
/// with U1 = exp(-itH) and U2 = exp(-kt N).
/// Throws SeriesNotConverged when the trace deficit exceeds 1e-8.
EvolvedState kraus_evolve(const TwoModeDensityMatrix& rho0, const ModelParams& params, double t);

TwoModeDensityMatrix closed_form_single_photon(const ModelParams& params, double t,
                                               FockCutoff cutoff);

TwoModeDensityMatrix superposition_initial_state(const SuperpositionSpec& spec, FockCutoff cutoff);

TwoModeDensityMatrix closed_form_superposition(const SuperpositionSpec& spec,
                                               const ModelParams& params, double t,
                                               FockCutoff cutoff);

TwoModeDensityMatrix bell_state(BellStateIndex index, FockCutoff cutoff);

/// Kraus evolution of a Bell state; flags the qutrit regime instead of failing.
EvolvedState evolved_bell_state(BellStateIndex index, const ModelParams& params, double t,
                                FockCutoff cutoff);

/// N(theta, phi) for the initial cat superposition. Throws DegenerateCat when
/// the normalization denominator falls below 1e-12.
double cat_normalization(const CatSpec& spec);

CatTrajectory cat_trajectory(const CatSpec& spec, const ModelParams& params, double t);

/// Initial cat (x) vacuum state in the Fock basis.
TwoModeDensityMatrix cat_initial_state(const CatSpec& spec, FockCutoff cutoff);

/// Fock-basis realization of the evolved cat state, renormalized to unit trace.
/// Throws CutoffTooSmall if the branch amplitudes exceed the coherent-state
/// guard or the pre-normalization trace deficit exceeds 1e-6.
TwoModeDensityMatrix cat_density_matrix(const CatTrajectory& traj, FockCutoff cutoff);

}  // namespace cavity
