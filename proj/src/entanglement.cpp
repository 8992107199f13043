#include "cavity/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace cavity {

namespace {

Matrix4 spin_flip() {
    Matrix4 f = Matrix4::Zero();
    f(0, 3) = -1.0;
    f(1, 2) = 1.0;
    f(2, 1) = 1.0;
    f(3, 0) = -1.0;
    return f;
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

ConcurrenceValue wootters_concurrence(const Matrix4& rho) {
    require_state(inspect_state(rho), "two-qubit state");
    // With rho = W W^dagger, the Wootters values l_i are the singular values of
    // W^T (sy x sy) W. Working with W avoids square roots of round-off sized
    // eigenvalues of rho (sy x sy) rho^* (sy x sy) for rank-deficient states.
    Eigen::SelfAdjointEigenSolver<Matrix4> eig(0.5 * (rho + rho.adjoint()));
    Matrix4 w = eig.eigenvectors();
    for (int i = 0; i < 4; ++i) w.col(i) *= std::sqrt(std::max(0.0, eig.eigenvalues()(i)));
    const Matrix4 t = w.transpose() * spin_flip() * w;
    Eigen::JacobiSVD<Matrix4> svd(t);
    const Eigen::Vector4d l = svd.singularValues();  // descending
    const double c = l(0) - l(1) - l(2) - l(3);
    return {std::clamp(c, 0.0, 1.0)};
}

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

EofValue eof_from_concurrence(ConcurrenceValue c) {
    if (!(c.value >= 0.0 && c.value <= 1.0)) {
        std::ostringstream msg;
        msg << "concurrence " << c.value << " outside [0, 1]";
        throw Error(ErrorKind::OutOfRange, msg.str());
    }
    return {binary_entropy(0.5 + 0.5 * std::sqrt(1.0 - c.value * c.value))};
}

QubitBlock qubit_block(const TwoModeDensityMatrix& rho) {
    const FockCutoff c = rho.cutoff();
    const int idx[4] = {c.index(0, 0), c.index(0, 1), c.index(1, 0), c.index(1, 1)};
    QubitBlock out;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) out.rho(i, j) = rho.matrix()(idx[i], idx[j]);
    }
    out.leakage = std::max(0.0, 1.0 - out.rho.trace().real());
    return out;
}

ConcurrenceValue closed_form_concurrence(const ConcurrenceScenario& scenario,
                                         const ModelParams& params, double t) {
    params.validate();
    const double decay = std::exp(-2.0 * params.k * t);
    const double swing = std::sin(2.0 * params.gamma * t);
    return std::visit(
        overloaded{
            [&](const SinglePhotonScenario&) { return ConcurrenceValue{std::abs(decay * swing)}; },
            [&](const SuperpositionScenario& s) {
                const double pop = std::pow(std::cos(0.5 * s.theta), 2);
                return ConcurrenceValue{std::abs(decay * pop * swing)};
            },
            [&](const BellScenario& b) {
                if (b.index.value() <= 2) {
                    if (params.gamma != 0.0) {
                        throw Error(ErrorKind::QutritRegime,
                                    "Bell states 1 and 2 leave the two-qubit space when gamma != 0");
                    }
                    return ConcurrenceValue{decay * decay};
                }
                return ConcurrenceValue{decay};
            },
        },
        scenario);
}

Matrix BranchBasis::vectors(FockCutoff cutoff) const {
    Matrix out = Matrix::Zero(cutoff.mode_dim(), 2);
    out.col(0) = coherent_state_vector(first, cutoff).amplitudes;
    if (!degenerate) {
        out.col(1) = (coherent_state_vector(second, cutoff).amplitudes - overlap * out.col(0)) /
                     orthogonal_weight;
    }
    return out;
}

namespace {

BranchBasis make_basis(Complex first, Complex second) {
    BranchBasis b;
    b.first = first;
    b.second = second;
    b.overlap = coherent_overlap(first, second);
    const double gap = 1.0 - std::norm(b.overlap);
    b.degenerate = gap < 1e-12;
    b.orthogonal_weight = b.degenerate ? 0.0 : std::sqrt(gap);
    return b;
}

// Coordinates of (first, second) in the basis {e0, e1}.
std::pair<Eigen::Vector2cd, Eigen::Vector2cd> coordinates(const BranchBasis& b) {
    return {Eigen::Vector2cd(1.0, 0.0), Eigen::Vector2cd(b.overlap, b.orthogonal_weight)};
}

}  // namespace

EffectiveTwoQubitState effective_two_qubit(const CatTrajectory& traj, BranchOrder order) {
    EffectiveTwoQubitState out;
    out.order = order;
    const bool plus_first = order == BranchOrder::plus_first;
    out.basis_a = plus_first ? make_basis(traj.alpha_plus, traj.alpha_minus)
                             : make_basis(traj.alpha_minus, traj.alpha_plus);
    out.basis_b = plus_first ? make_basis(traj.beta_plus, traj.beta_minus)
                             : make_basis(traj.beta_minus, traj.beta_plus);

    auto [a_first, a_second] = coordinates(out.basis_a);
    auto [b_first, b_second] = coordinates(out.basis_b);
    const Eigen::Vector2cd& a_plus = plus_first ? a_first : a_second;
    const Eigen::Vector2cd& a_minus = plus_first ? a_second : a_first;
    const Eigen::Vector2cd& b_plus = plus_first ? b_first : b_second;
    const Eigen::Vector2cd& b_minus = plus_first ? b_second : b_first;

    Eigen::Vector4cd u, v;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            u(2 * i + j) = a_plus(i) * b_plus(j);
            v(2 * i + j) = a_minus(i) * b_minus(j);
        }
    }
    const double n2 = traj.norm_const * traj.norm_const;
    Matrix4 m = n2 * (u * u.adjoint() + v * v.adjoint() + traj.xi * u * v.adjoint() +
                      std::conj(traj.xi) * v * u.adjoint());
    m /= m.trace().real();
    out.matrix = 0.5 * (m + m.adjoint());
    return out;
}

ConcurrenceValue concurrence(const EffectiveTwoQubitState& state) {
    if (state.separable_by_degeneracy()) return {0.0};
    return wootters_concurrence(state.matrix);
}

Eigen::Matrix2cd reduced_state_a(const EffectiveTwoQubitState& state) {
    Eigen::Matrix2cd out;
    for (int i = 0; i < 2; ++i) {
        for (int k = 0; k < 2; ++k) {
            out(i, k) = state.matrix(2 * i, 2 * k) + state.matrix(2 * i + 1, 2 * k + 1);
        }
    }
    return out;
}

}  // namespace cavity
