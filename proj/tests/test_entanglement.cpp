#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "cavity/entanglement.hpp"
#include "doctest.h"

using namespace cavity;

namespace {

constexpr double kPi = std::numbers::pi;

Matrix4 projector(const Eigen::Vector4cd& v) { return v * v.adjoint(); }

// Wootters procedure the textbook way: eigenvalues of rho (sy x sy) rho^* (sy x sy)
// in extended precision.
double concurrence_by_spectrum(const Matrix4& rho) {
    using C = std::complex<long double>;
    using M = Eigen::Matrix<C, 4, 4>;
    M r = rho.cast<C>();
    M flip = M::Zero();
    flip(0, 3) = -1.0L;
    flip(1, 2) = 1.0L;
    flip(2, 1) = 1.0L;
    flip(3, 0) = -1.0L;
    const M tilde = flip * r.conjugate() * flip;
    Eigen::ComplexEigenSolver<M> eig(r * tilde);
    std::vector<long double> l;
    for (int i = 0; i < 4; ++i) l.push_back(std::sqrt(std::max(0.0L, eig.eigenvalues()(i).real())));
    std::sort(l.rbegin(), l.rend());
    return static_cast<double>(std::max(0.0L, l[0] - l[1] - l[2] - l[3]));
}

// 2 s0 s1 for the Schmidt coefficients of a rank-2 pure state.
double schmidt_concurrence(const Vector& psi, FockCutoff c) {
    Matrix m(c.mode_dim(), c.mode_dim());
    for (int i = 0; i < c.mode_dim(); ++i) {
        for (int j = 0; j < c.mode_dim(); ++j) m(i, j) = psi(c.index(i, j));
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const Eigen::VectorXd s = svd.singularValues() / svd.singularValues().norm();
    return 2.0 * s(0) * s(1);
}

Matrix4 random_two_qubit_state(std::mt19937_64& rng, int rank) {
    std::normal_distribution<double> g;
    Eigen::Matrix<Complex, 4, Eigen::Dynamic> w(4, rank);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < rank; ++j) w(i, j) = Complex(g(rng), g(rng));
    }
    Matrix4 rho = w * w.adjoint();
    return rho / rho.trace().real();
}

}  // namespace

TEST_CASE("Wootters concurrence") {
    const double h = std::sqrt(0.5);
    const Eigen::Vector4cd singlet(0.0, h, -h, 0.0);
    CHECK(wootters_concurrence(projector(singlet)).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(wootters_concurrence(projector(Eigen::Vector4cd(0.0, h, h, 0.0))).value ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(wootters_concurrence(Matrix4::Identity() / 4.0).value == 0.0);
    CHECK(wootters_concurrence(projector(Eigen::Vector4cd(1.0, 0.0, 0.0, 0.0))).value < 1e-12);

    SUBCASE("Werner state") {
        for (const double p : {0.1, 1.0 / 3.0, 0.5, 0.8, 1.0}) {
            const Matrix4 w = p * projector(singlet) + (1.0 - p) * Matrix4::Identity() / 4.0;
            const double closed = std::max(0.0, 1.5 * p - 0.5);
            CHECK(std::abs(wootters_concurrence(w).value - closed) < 1e-12);
            CHECK(std::abs(concurrence_by_spectrum(w) - closed) < 1e-12);
        }
        const Matrix4 w = 0.8 * projector(singlet) + 0.2 * Matrix4::Identity() / 4.0;
        CHECK(wootters_concurrence(w).value == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("agrees with the spectral route on random states") {
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 50; ++trial) {
            const Matrix4 rho = random_two_qubit_state(rng, 1 + trial % 4);
            CHECK(std::abs(wootters_concurrence(rho).value - concurrence_by_spectrum(rho)) < 1e-7);
        }
    }
    SUBCASE("local unitaries leave it unchanged") {
        std::mt19937_64 rng(4);
        const Matrix4 rho = random_two_qubit_state(rng, 2);
        const double base = wootters_concurrence(rho).value;
        const double a = 0.7, b = -1.2;
        Eigen::Matrix2cd ua, ub;
        ua << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        ub << std::exp(Complex(0, b)), 0.0, 0.0, std::exp(Complex(0, -b));
        Matrix4 u;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) u(2 * i + j, 2 * k + l) = ua(i, k) * ub(j, l);
        CHECK(std::abs(wootters_concurrence(u * rho * u.adjoint()).value - base) < 1e-10);
    }
    SUBCASE("rejects non-states") {
        Matrix4 bad = Matrix4::Identity() / 4.0;
        bad(0, 0) = -0.1;
        bad(1, 1) = 0.6;
        try {
            wootters_concurrence(bad);
            FAIL("negative state accepted");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NotAState);
        }
    }
}

TEST_CASE("entanglement of formation") {
    CHECK(eof_from_concurrence({0.0}).value == 0.0);
    CHECK(eof_from_concurrence({1.0}).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(eof_from_concurrence({0.6}).value == doctest::Approx(0.468995593589281).epsilon(1e-12));
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK_THROWS_AS(eof_from_concurrence({1.5}), Error);
    CHECK_THROWS_AS(eof_from_concurrence({-0.1}), Error);
    CHECK_THROWS_AS(eof_from_concurrence({NAN}), Error);
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double c = 0.01 * i;
        const double e = eof_from_concurrence({c}).value;
        CHECK(e > prev);
        CHECK(e <= c + 1e-15);  // convex with matching endpoints
        prev = e;
    }
}

TEST_CASE("closed-form concurrence trajectories") {
    const FockCutoff c(2);
    for (const double g : {1.0, 6.0}) {
        const ModelParams p{0.0, 1.0, g};
        for (int i = 0; i <= 40; ++i) {
            const double t = 0.05 * i;
            const double single = closed_form_concurrence(SinglePhotonScenario{}, p, t).value;
            CHECK(std::abs(single - std::abs(std::exp(-2.0 * t) * std::sin(2.0 * g * t))) < 1e-15);

            const auto block = qubit_block(closed_form_single_photon(p, t, c));
            CHECK(block.leakage < 1e-14);
            CHECK(std::abs(wootters_concurrence(block.rho).value - single) < 1e-9);

            for (const double theta : {0.0, kPi / 3.0, kPi / 2.0}) {
                const double expect =
                    closed_form_concurrence(SuperpositionScenario{theta}, p, t).value;
                double values[2];
                int slot = 0;
                for (const auto kind : {MixtureKind::pure, MixtureKind::mixed}) {
                    const auto rho = closed_form_superposition({theta, 0.3, kind}, p, t, c);
                    values[slot] = wootters_concurrence(qubit_block(rho).rho).value;
                    CHECK(std::abs(values[slot] - expect) < 1e-9);
                    ++slot;
                }
                CHECK(std::abs(values[0] - values[1]) < 1e-10);
            }
        }
    }
}

TEST_CASE("Bell-state concurrences") {
    const FockCutoff c(3);
    CHECK(wootters_concurrence(qubit_block(bell_state(BellStateIndex(4), c)).rho).value ==
          doctest::Approx(1.0).epsilon(1e-12));

    for (const double g : {0.0, 3.0, 6.0}) {
        const auto out = evolved_bell_state(BellStateIndex(3), {0.0, 1.0, g}, 0.5, c);
        CHECK(std::abs(wootters_concurrence(qubit_block(out.rho).rho).value - std::exp(-1.0)) <
              1e-9);
    }
    const auto b1 = evolved_bell_state(BellStateIndex(1), {0.0, 1.0, 0.0}, 0.25, c);
    CHECK(std::abs(wootters_concurrence(qubit_block(b1.rho).rho).value - std::exp(-1.0)) < 1e-9);

    for (int i = 1; i <= 4; ++i) {
        const ModelParams p{0.0, 1.0, i <= 2 ? 0.0 : 6.0};
        for (const double t : {0.0, 0.3, 1.2}) {
            const auto out = evolved_bell_state(BellStateIndex(i), p, t, c);
            const double numeric = wootters_concurrence(qubit_block(out.rho).rho).value;
            const double closed = closed_form_concurrence(BellScenario{BellStateIndex(i)}, p, t).value;
            CHECK(std::abs(numeric - closed) < 1e-9);
        }
    }
    try {
        closed_form_concurrence(BellScenario{BellStateIndex(2)}, {0.0, 1.0, 1.0}, 0.1);
        FAIL("qutrit regime accepted");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::QutritRegime);
    }
}

TEST_CASE("effective two-qubit cat state") {
    const double phi = kPi / 2.0;

    SUBCASE("initial product state") {
        const auto s = effective_two_qubit(cat_trajectory({1.0, phi, kPi}, {0.0, 1.0, 6.0}, 0.0));
        CHECK(s.basis_b.degenerate);
        CHECK(concurrence(s).value == 0.0);
    }
    SUBCASE("all excitation swapped into mode B") {
        const auto s = effective_two_qubit(
            cat_trajectory({1.0, phi, kPi}, {0.0, 0.0, 1.0}, kPi / 2.0));
        CHECK(s.basis_a.degenerate);
        CHECK(concurrence(s).value == 0.0);
    }
    SUBCASE("pure evolution against Schmidt coefficients") {
        const FockCutoff c(20);
        const ModelParams p{0.0, 0.0, 1.0};
        for (const auto& [spec, t] : {std::pair{CatSpec{1.0, phi, kPi}, kPi / 4.0},
                                      std::pair{CatSpec{1.0, phi, 0.0}, kPi / 4.0},
                                      std::pair{CatSpec{0.6, 0.4, 1.0}, 0.3},
                                      std::pair{CatSpec{Complex(0.5, 0.8), 1.1, 2.0}, 1.1}}) {
            const auto traj = cat_trajectory(spec, p, t);
            const Vector plus = kron(coherent_state_vector(traj.alpha_plus, c).amplitudes,
                                     coherent_state_vector(traj.beta_plus, c).amplitudes);
            const Vector minus = kron(coherent_state_vector(traj.alpha_minus, c).amplitudes,
                                      coherent_state_vector(traj.beta_minus, c).amplitudes);
            const Vector psi = plus + std::exp(Complex(0.0, spec.theta)) * minus;
            CHECK(std::abs(concurrence(effective_two_qubit(traj)).value -
                           schmidt_concurrence(psi, c)) < 1e-8);
        }
        const auto odd = effective_two_qubit(cat_trajectory({1.0, phi, kPi}, p, kPi / 4.0));
        CHECK(std::abs(concurrence(odd).value - 1.0) < 1e-8);
    }
    SUBCASE("embedding matches the Fock-basis state") {
        const CatSpec spec{1.0, phi, kPi};
        const FockCutoff c(20);
        for (const double t : {0.1, 0.4}) {
            const auto traj = cat_trajectory(spec, {0.0, 1.0, 6.0}, t);
            const auto s = effective_two_qubit(traj);
            const Matrix va = s.basis_a.vectors(c);
            const Matrix vb = s.basis_b.vectors(c);
            const Matrix v = kron(va, vb);
            const Matrix projected = v.adjoint() * cat_density_matrix(traj, c).matrix() * v;
            CHECK((projected - Matrix(s.matrix)).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
    SUBCASE("branch order does not matter") {
        for (const auto& [spec, g, t] :
             {std::tuple{CatSpec{1.0, phi, kPi}, 6.0, 0.2}, std::tuple{CatSpec{0.5, phi, 0.0}, 6.0, 0.5},
              std::tuple{CatSpec{Complex(1.2, 0.3), 0.7, 2.1}, 3.0, 0.35}}) {
            const auto traj = cat_trajectory(spec, {0.4, 1.0, g}, t);
            const double a = concurrence(effective_two_qubit(traj, BranchOrder::plus_first)).value;
            const double b = concurrence(effective_two_qubit(traj, BranchOrder::minus_first)).value;
            CHECK(std::abs(a - b) < 1e-9);
        }
    }
    SUBCASE("decay bounds") {
        const CatSpec spec{1.5, phi, 0.0};
        for (int i = 0; i <= 30; ++i) {
            const auto s = effective_two_qubit(cat_trajectory(spec, {0.0, 1.0, 6.0}, 0.1 * i));
            const double cval = concurrence(s).value;
            CHECK(cval >= 0.0);
            CHECK(cval <= 1.0);
            CHECK(std::abs(reduced_state_a(s).trace() - 1.0) < 1e-12);
        }
        const auto late = effective_two_qubit(cat_trajectory(spec, {0.0, 1.0, 6.0}, 12.0));
        CHECK(concurrence(late).value < 1e-6);
    }
}
