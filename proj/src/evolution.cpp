#include "cavity/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cavity {

namespace {

constexpr Complex kI{0.0, 1.0};

// Largest total photon number n_A + n_B carried by any basis state with a
// nonzero row in rho. Neither the coupling nor the jumps raise it.
int occupied_number_bound(const Matrix& rho, FockCutoff cutoff) {
    int bound = 0;
    for (int i = 0; i < cutoff.dim(); ++i) {
        const int n = cutoff.level_a(i) + cutoff.level_b(i);
        if (n > bound && rho.row(i).cwiseAbs().maxCoeff() > 0.0) bound = n;
    }
    return bound;
}

// Master-equation right-hand side restricted to basis states with
// n_A + n_B <= bound; that subspace is invariant under the dynamics.
// Matrices carry one extra all-zero row and column (index size()) that absent
// neighbours point at, so the inner loop has no branches. Only the upper
// triangle is evaluated; the lower one follows from Hermiticity.
class Liouvillian {
public:
    Liouvillian(const ModelParams& p, FockCutoff cutoff, int bound) : p_(p) {
        std::vector<int> compact(cutoff.dim(), -1);
        for (int i = 0; i < cutoff.dim(); ++i) {
            if (cutoff.level_a(i) + cutoff.level_b(i) <= bound) {
                compact[i] = static_cast<int>(active_.size());
                active_.push_back(i);
            }
        }
        const int s = size();
        const int nmax = cutoff.n_max();
        number_.resize(s);
        hop_.assign(2 * s, {s, 0.0});
        jump_.assign(2 * s, {s, 0.0});
        for (int r = 0; r < s; ++r) {
            const int na = cutoff.level_a(active_[r]);
            const int nb = cutoff.level_b(active_[r]);
            number_[r] = na + nb;
            // a^dagger b and b^dagger a, truncated at n_max
            if (na + 1 <= nmax && nb >= 1) {
                hop_[2 * r] = {compact[cutoff.index(na + 1, nb - 1)], std::sqrt((na + 1.0) * nb)};
            }
            if (nb + 1 <= nmax && na >= 1) {
                hop_[2 * r + 1] = {compact[cutoff.index(na - 1, nb + 1)], std::sqrt(na * (nb + 1.0))};
            }
            // (a rho a^dagger)_{rc} reads rho one level up in mode A on both sides
            if (na + 1 <= nmax && compact[cutoff.index(na + 1, nb)] >= 0) {
                jump_[2 * r] = {compact[cutoff.index(na + 1, nb)], std::sqrt(na + 1.0)};
            }
            if (nb + 1 <= nmax && compact[cutoff.index(na, nb + 1)] >= 0) {
                jump_[2 * r + 1] = {compact[cutoff.index(na, nb + 1)], std::sqrt(nb + 1.0)};
            }
        }
    }

    int size() const { return static_cast<int>(active_.size()); }
    const std::vector<int>& active() const { return active_; }

    void apply(const Matrix& rho, Matrix& out) const {
        const int s = size();
        const double w = p_.omega;
        const double k = p_.k;
        const double g = p_.gamma;
        const Complex* data = rho.data();
        const Eigen::Index ld = rho.rows();
        auto at = [&](int r, int c) { return data[r + c * ld]; };
        for (int c = 0; c < s; ++c) {
            const Link hc0 = hop_[2 * c], hc1 = hop_[2 * c + 1];
            const Link ja_c = jump_[2 * c], jb_c = jump_[2 * c + 1];
            const int nc = number_[c];
            for (int r = 0; r <= c; ++r) {
                const Complex v = at(r, c);
                const Link hr0 = hop_[2 * r], hr1 = hop_[2 * r + 1];
                const Complex kv = hr0.amplitude * at(hr0.target, c) +
                                   hr1.amplitude * at(hr1.target, c) -
                                   hc0.amplitude * at(r, hc0.target) -
                                   hc1.amplitude * at(r, hc1.target);
                const Complex comm = w * double(number_[r] - nc) * v + g * kv;
                const Link ja_r = jump_[2 * r], jb_r = jump_[2 * r + 1];
                const Complex jumps =
                    ja_r.amplitude * ja_c.amplitude * at(ja_r.target, ja_c.target) +
                    jb_r.amplitude * jb_c.amplitude * at(jb_r.target, jb_c.target);
                const Complex d = Complex(comm.imag(), -comm.real()) -
                                  k * double(number_[r] + nc) * v + 2.0 * k * jumps;
                out(r, c) = d;
                out(c, r) = std::conj(d);
            }
        }
    }

private:
    struct Link {
        int target;
        double amplitude;
    };
    ModelParams p_;
    std::vector<int> active_;
    std::vector<int> number_;
    std::vector<Link> hop_;
    std::vector<Link> jump_;
};

TwoModeDensityMatrix expand_and_check(const Matrix& compact, const std::vector<int>& active,
                                      FockCutoff cutoff, double positivity_floor,
                                      ErrorKind positivity_error) {
    if (!compact.allFinite()) {
        throw Error(positivity_error, "evolved state is not finite; refine the time step");
    }
    StateCheck check = inspect_state(compact);
    if (static_cast<int>(active.size()) < cutoff.dim()) {
        check.min_eigenvalue = std::min(check.min_eigenvalue, 0.0);
    }
    if (check.min_eigenvalue < positivity_floor) {
        std::ostringstream msg;
        msg << "evolved state has eigenvalue " << check.min_eigenvalue
            << "; refine the time step or raise the cutoff";
        throw Error(positivity_error, msg.str());
    }
    Matrix full = Matrix::Zero(cutoff.dim(), cutoff.dim());
    full(active, active) = compact;
    return TwoModeDensityMatrix(std::move(full), cutoff, check, positivity_floor);
}

}  // namespace

void ModelParams::validate() const {
    if (!std::isfinite(omega) || !std::isfinite(k) || !std::isfinite(gamma)) {
        throw Error(ErrorKind::InvalidArgument, "model parameters must be finite");
    }
    if (k < 0.0) throw Error(ErrorKind::InvalidArgument, "decay constant k must be >= 0");
}

BellStateIndex::BellStateIndex(int i) : i_(i) {
    if (i < 1 || i > 4) throw Error(ErrorKind::InvalidArgument, "Bell state index must be 1..4");
}

double default_time_step(const ModelParams& params) {
    double dt = 1e-3 / std::max(std::abs(params.omega), 1.0);
    if (params.k > 0.0) dt = std::min(dt, 1e-3 / params.k);
    if (params.gamma != 0.0) dt = std::min(dt, 1e-3 / std::abs(params.gamma));
    return dt;
}

std::vector<TwoModeDensityMatrix> lindblad_step_integrate(const TwoModeDensityMatrix& rho0,
                                                          const ModelParams& params,
                                                          std::span<const double> times,
                                                          double dt_max) {
    params.validate();
    if (!(dt_max > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt_max must be positive");
    if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "integration times must be sorted and >= 0");
    }
    const FockCutoff cutoff = rho0.cutoff();
    const Liouvillian L(params, cutoff, occupied_number_bound(rho0.matrix(), cutoff));
    const auto& active = L.active();
    const int s = L.size();

    // padded with a zero row and column, see Liouvillian
    Matrix rho = Matrix::Zero(s + 1, s + 1);
    rho.topLeftCorner(s, s) = rho0.matrix()(active, active);
    Matrix k1 = Matrix::Zero(s + 1, s + 1), k2 = k1, k3 = k1, k4 = k1, tmp = k1;

    std::vector<TwoModeDensityMatrix> out;
    out.reserve(times.size());
    double now = 0.0;
    for (const double target : times) {
        const double span = target - now;
        if (span > 0.0) {
            const long steps = static_cast<long>(std::ceil(span / dt_max - 1e-12));
            const double h = span / static_cast<double>(steps);
            for (long n = 0; n < steps; ++n) {
                L.apply(rho, k1);
                tmp = rho + (0.5 * h) * k1;
                L.apply(tmp, k2);
                tmp = rho + (0.5 * h) * k2;
                L.apply(tmp, k3);
                tmp = rho + h * k3;
                L.apply(tmp, k4);
                rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            now = target;
        }
        out.push_back(expand_and_check(rho.topLeftCorner(s, s), active, cutoff, -1e-6,
                                       ErrorKind::PositivityLost));
    }
    return out;
}

TwoModeDensityMatrix lindblad_step_integrate(const TwoModeDensityMatrix& rho0,
                                             const ModelParams& params, double t, double dt_max) {
    if (t < 0.0) throw Error(ErrorKind::InvalidArgument, "time must be >= 0");
    const double times[] = {t};
    return std::move(lindblad_step_integrate(rho0, params, times, dt_max).front());
}

EvolvedState kraus_evolve(const TwoModeDensityMatrix& rho0, const ModelParams& params, double t) {
    params.validate();
    if (t < 0.0) throw Error(ErrorKind::InvalidArgument, "time must be >= 0");
    if (t == 0.0) return {rho0, 0.0, false};

    const FockCutoff c = rho0.cutoff();
    const int nmax = c.n_max();
    const int dim = c.dim();
    const Matrix& r0 = rho0.matrix();
    const int bound = occupied_number_bound(r0, c);

    // sqrt(binomial(n + m, m)) for n + m <= n_max
    Eigen::MatrixXd root_binom = Eigen::MatrixXd::Zero(nmax + 1, nmax + 1);
    for (int n = 0; n <= nmax; ++n) {
        for (int m = 0; n + m <= nmax; ++m) {
            root_binom(n, m) = std::exp(0.5 * (std::lgamma(n + m + 1.0) - std::lgamma(n + 1.0) -
                                               std::lgamma(m + 1.0)));
        }
    }
    const double x = -std::expm1(-2.0 * params.k * t);
    std::vector<double> xpow(nmax + 1, 1.0);
    for (int j = 1; j <= nmax; ++j) xpow[j] = xpow[j - 1] * x;

    // Jump sum: sum_{n1,n2} x^{n1+n2}/(n1! n2!) a^n1 b^n2 rho0 (a^dagger)^n1 (b^dagger)^n2
    Matrix jumped = Matrix::Zero(dim, dim);
    for (int col = 0; col < dim; ++col) {
        const int ka = c.level_a(col);
        const int kb = c.level_b(col);
        if (ka + kb > bound) continue;
        for (int row = 0; row < dim; ++row) {
            const int ia = c.level_a(row);
            const int ib = c.level_b(row);
            if (ia + ib > bound) continue;
            const int total_budget = std::min(nmax, bound - std::max(ia + ib, ka + kb));
            Complex acc = 0.0;
            for (int n1 = 0; n1 <= std::min(total_budget, nmax - std::max(ia, ka)); ++n1) {
                const double wa = root_binom(ia, n1) * root_binom(ka, n1);
                const int n2_max = std::min(total_budget - n1, nmax - std::max(ib, kb));
                for (int n2 = 0; n2 <= n2_max; ++n2) {
                    acc += xpow[n1 + n2] * wa * root_binom(ib, n2) * root_binom(kb, n2) *
                           r0(c.index(ia + n1, ib + n2), c.index(ka + n1, kb + n2));
                }
            }
            jumped(row, col) = acc;
        }
    }

    // U = U1 U2 is block diagonal in total photon number.
    const auto sectors = number_sectors(c);
    std::vector<Matrix> unitaries(sectors.size());
    for (std::size_t n = 0; n < sectors.size(); ++n) {
        const auto& idx = sectors[n];
        const int s = static_cast<int>(idx.size());
        Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(s, s);
        for (int i = 0; i < s; ++i) {
            for (int j = 0; j < s; ++j) {
                const int na = c.level_a(idx[i]);
                const int nb = c.level_b(idx[i]);
                const int ma = c.level_a(idx[j]);
                const int mb = c.level_b(idx[j]);
                if (ma == na + 1 && mb == nb - 1) coupling(i, j) = std::sqrt(double(ma) * nb);
                if (ma == na - 1 && mb == nb + 1) coupling(i, j) = std::sqrt(double(na) * mb);
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(coupling);
        const Complex sector_phase =
            std::exp(-kI * params.omega * t * double(n) - params.k * t * double(n));
        Vector phases(s);
        for (int i = 0; i < s; ++i) {
            phases(i) = sector_phase * std::exp(-kI * params.gamma * t * eig.eigenvalues()(i));
        }
        const Matrix v = eig.eigenvectors().cast<Complex>();
        unitaries[n] = v * phases.asDiagonal() * v.transpose();
    }

    Matrix evolved = Matrix::Zero(dim, dim);
    for (std::size_t n = 0; n < sectors.size(); ++n) {
        if (static_cast<int>(n) > bound) continue;
        for (std::size_t m = 0; m < sectors.size(); ++m) {
            if (static_cast<int>(m) > bound) continue;
            evolved(sectors[n], sectors[m]) =
                unitaries[n] * jumped(sectors[n], sectors[m]) * unitaries[m].adjoint();
        }
    }

    const double deficit = std::abs(1.0 - evolved.trace().real());
    if (deficit > 1e-8) {
        std::ostringstream msg;
        msg << "Kraus series trace deficit " << deficit << " exceeds 1e-8";
        throw Error(ErrorKind::SeriesNotConverged, msg.str());
    }
    StateCheck check = inspect_state(evolved);
    return {TwoModeDensityMatrix(std::move(evolved), c, check), deficit, false};
}

TwoModeDensityMatrix closed_form_single_photon(const ModelParams& params, double t,
                                               FockCutoff cutoff) {
    return closed_form_superposition({0.0, 0.0, MixtureKind::mixed}, params, t, cutoff);
}

TwoModeDensityMatrix superposition_initial_state(const SuperpositionSpec& spec, FockCutoff cutoff) {
    const double c = std::cos(0.5 * spec.theta);
    const double s = std::sin(0.5 * spec.theta);
    const int i10 = cutoff.index(1, 0);
    const int i00 = cutoff.index(0, 0);
    Matrix m = Matrix::Zero(cutoff.dim(), cutoff.dim());
    m(i10, i10) = c * c;
    m(i00, i00) = s * s;
    if (spec.kind == MixtureKind::pure) {
        m(i10, i00) = c * s * std::exp(-kI * spec.tau);
        m(i00, i10) = std::conj(m(i10, i00));
    }
    return TwoModeDensityMatrix(std::move(m), cutoff);
}

TwoModeDensityMatrix closed_form_superposition(const SuperpositionSpec& spec,
                                               const ModelParams& params, double t,
                                               FockCutoff cutoff) {
    params.validate();
    const double decay = std::exp(-2.0 * params.k * t);
    const double pop = std::pow(std::cos(0.5 * spec.theta), 2);
    Vector psi = Vector::Zero(cutoff.dim());
    psi(cutoff.index(1, 0)) = std::cos(params.gamma * t);
    psi(cutoff.index(0, 1)) = -kI * std::sin(params.gamma * t);
    Vector vac = Vector::Zero(cutoff.dim());
    vac(cutoff.index(0, 0)) = 1.0;

    Matrix m = (1.0 - decay * pop) * vac * vac.adjoint() + pop * decay * psi * psi.adjoint();
    if (spec.kind == MixtureKind::pure) {
        const Complex cross = 0.5 * std::sin(spec.theta) * std::exp(-params.k * t) *
                              std::exp(-kI * (params.omega * t + spec.tau));
        m += cross * psi * vac.adjoint() + std::conj(cross) * vac * psi.adjoint();
    }
    return TwoModeDensityMatrix(std::move(m), cutoff);
}

TwoModeDensityMatrix bell_state(BellStateIndex index, FockCutoff cutoff) {
    const double h = std::sqrt(0.5);
    Vector psi = Vector::Zero(cutoff.dim());
    switch (index.value()) {
        case 1:
            psi(cutoff.index(1, 1)) = h;
            psi(cutoff.index(0, 0)) = h;
            break;
        case 2:
            psi(cutoff.index(1, 1)) = h;
            psi(cutoff.index(0, 0)) = -h;
            break;
        case 3:
            psi(cutoff.index(1, 0)) = h;
            psi(cutoff.index(0, 1)) = h;
            break;
        default:
            psi(cutoff.index(1, 0)) = h;
            psi(cutoff.index(0, 1)) = -h;
            break;
    }
    return TwoModeDensityMatrix(psi * psi.adjoint(), cutoff);
}

EvolvedState evolved_bell_state(BellStateIndex index, const ModelParams& params, double t,
                                FockCutoff cutoff) {
    EvolvedState out = kraus_evolve(bell_state(index, cutoff), params, t);
    out.qutrit_regime = index.value() <= 2 && params.gamma != 0.0;
    return out;
}

double cat_normalization(const CatSpec& spec) {
    const double a2 = std::norm(spec.alpha);
    const double denom =
        2.0 + 2.0 * std::cos(spec.theta - a2 * std::sin(2.0 * spec.phi)) *
                  std::exp(a2 * std::cos(2.0 * spec.phi) - a2);
    if (!(denom > 1e-12)) {
        throw Error(ErrorKind::DegenerateCat, "cat normalization denominator vanishes");
    }
    return 1.0 / std::sqrt(denom);
}

CatTrajectory cat_trajectory(const CatSpec& spec, const ModelParams& params, double t) {
    params.validate();
    CatTrajectory out;
    out.norm_const = cat_normalization(spec);
    const Complex common = std::exp(-kI * params.omega * t - params.k * t);
    const Complex plus = spec.alpha * std::exp(kI * spec.phi) * common;
    const Complex minus = spec.alpha * std::exp(-kI * spec.phi) * common;
    const double cg = std::cos(params.gamma * t);
    const double sg = std::sin(params.gamma * t);
    out.alpha_plus = plus * cg;
    out.alpha_minus = minus * cg;
    out.beta_plus = -kI * plus * sg;
    out.beta_minus = -kI * minus * sg;
    const double lost = -std::expm1(-2.0 * params.k * t);
    out.xi = std::exp(-kI * spec.theta) *
             std::exp(lost * (std::exp(2.0 * kI * spec.phi) - 1.0) * std::norm(spec.alpha));
    return out;
}

TwoModeDensityMatrix cat_initial_state(const CatSpec& spec, FockCutoff cutoff) {
    const double norm = cat_normalization(spec);
    const Vector plus = coherent_state_vector(spec.alpha * std::exp(kI * spec.phi), cutoff).amplitudes;
    const Vector minus =
        coherent_state_vector(spec.alpha * std::exp(-kI * spec.phi), cutoff).amplitudes;
    Vector vac = Vector::Zero(cutoff.mode_dim());
    vac(0) = 1.0;
    const Vector mode_a = norm * (plus + std::exp(kI * spec.theta) * minus);
    return TwoModeDensityMatrix::pure(kron(mode_a, vac), cutoff);
}

TwoModeDensityMatrix cat_density_matrix(const CatTrajectory& traj, FockCutoff cutoff) {
    const Vector u = kron(coherent_state_vector(traj.alpha_plus, cutoff).amplitudes,
                          coherent_state_vector(traj.beta_plus, cutoff).amplitudes);
    const Vector v = kron(coherent_state_vector(traj.alpha_minus, cutoff).amplitudes,
                          coherent_state_vector(traj.beta_minus, cutoff).amplitudes);
    const double n2 = traj.norm_const * traj.norm_const;
    Matrix m = n2 * (u * u.adjoint() + v * v.adjoint() + traj.xi * u * v.adjoint() +
                     std::conj(traj.xi) * v * u.adjoint());
    const double trace = m.trace().real();
    if (std::abs(1.0 - trace) > 1e-6) {
        std::ostringstream msg;
        msg << "cat density matrix trace deficit " << 1.0 - trace << " exceeds 1e-6";
        throw Error(ErrorKind::CutoffTooSmall, msg.str());
    }
    m /= trace;
    return TwoModeDensityMatrix(std::move(m), cutoff);
}

}  // namespace cavity
