#include <cmath>
#include <numbers>
#include <random>

#include "cavity/nonlocality.hpp"
#include "doctest.h"

using namespace cavity;

namespace {

constexpr double kPi = std::numbers::pi;
const double kTsirelson = 2.0 * std::sqrt(2.0);

TwoModeDensityMatrix random_state(FockCutoff c, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix w(c.dim(), 2);
    for (int i = 0; i < c.dim(); ++i) {
        const double damp = std::exp(-0.5 * (c.level_a(i) + c.level_b(i)));
        for (int j = 0; j < 2; ++j) w(i, j) = damp * Complex(g(rng), g(rng));
    }
    Matrix rho = w * w.adjoint();
    return TwoModeDensityMatrix(rho / rho.trace().real(), c);
}

// Integral of (2/pi) Tr(X P(mu)) over [-4, 4]^2, trapezoid rule.
Complex single_mode_wigner_integral(const Matrix& x, FockCutoff c) {
    const int n = 80;
    const double h = 8.0 / n;
    Complex acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const double w = (i == 0 || i == n ? 0.5 : 1.0) * (j == 0 || j == n ? 0.5 : 1.0);
            const Matrix p = displaced_parity_matrix(Complex(-4.0 + i * h, -4.0 + j * h), c);
            acc += w * (x.transpose().cwiseProduct(p)).sum();
        }
    }
    return acc * h * h * 2.0 / kPi;
}

}  // namespace

TEST_CASE("displaced parity expectation") {
    const FockCutoff c(6);
    CHECK(displaced_parity_expectation(TwoModeDensityMatrix::vacuum(c), 0.0, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(displaced_parity_expectation(TwoModeDensityMatrix::fock(1, 0, c), 0.0, 0.0) ==
          doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(displaced_parity_expectation(TwoModeDensityMatrix::fock(1, 1, c), 0.0, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-14));

    const FockCutoff big(40);
    const auto vac = TwoModeDensityMatrix::vacuum(big);
    CHECK(std::abs(displaced_parity_expectation(vac, 0.5, 0.0) - 0.606530659712633) < 1e-8);
    for (const auto& [mu, nu] : {std::pair{Complex(0.3, -0.2), Complex(-0.7, 0.4)},
                                 std::pair{Complex(1.5, 0.5), Complex(0.0, -1.0)},
                                 std::pair{Complex(-2.0, 1.0), Complex(0.1, 0.1)}}) {
        const double expect = std::exp(-2.0 * std::norm(mu) - 2.0 * std::norm(nu));
        CHECK(std::abs(displaced_parity_expectation(vac, mu, nu) - expect) < 1e-8);
    }

    // coherent product state: Gaussian centred on the amplitudes
    const Complex a(0.8, -0.3), b(-0.4, 0.6);
    const auto coh = TwoModeDensityMatrix::pure(
        kron(coherent_state_vector(a, big).amplitudes, coherent_state_vector(b, big).amplitudes), big);
    const Complex mu(0.2, 0.1), nu(-0.5, 0.3);
    CHECK(std::abs(displaced_parity_expectation(coh, mu, nu) -
                   std::exp(-2.0 * std::norm(mu - a) - 2.0 * std::norm(nu - b))) < 1e-8);

    CHECK_THROWS_AS(displaced_parity_expectation(TwoModeDensityMatrix::vacuum(c), 3.0, 0.0), Error);
}

TEST_CASE("cat product expansion") {
    const CatSpec spec{Complex(0.9, 0.2), 0.8, 1.4};
    const ModelParams p{0.3, 1.0, 6.0};
    const auto traj = cat_trajectory(spec, p, 0.15);
    const FockCutoff c = default_cutoff(std::abs(spec.alpha));
    const auto rho = cat_density_matrix(traj, c);
    const auto expansion = cat_product_expansion(traj, c);
    CHECK((expansion.to_matrix() - rho.matrix()).cwiseAbs().maxCoeff() < 1e-13);
    for (const auto& [mu, nu] : {std::pair{Complex(0.0), Complex(0.0)},
                                 std::pair{Complex(0.4, -0.6), Complex(0.2, 0.9)},
                                 std::pair{Complex(-1.1, 0.3), Complex(-0.5, -0.5)}}) {
        CHECK(std::abs(expansion.parity_expectation(mu, nu) -
                       displaced_parity_expectation(rho, mu, nu)) < 1e-12);
    }
}

TEST_CASE("Wigner function") {
    const double phi = kPi / 2.0;

    SUBCASE("numeric route is the scaled parity trace") {
        std::mt19937_64 rng(2);
        const auto rho = random_state(FockCutoff(4), rng);
        const Complex mu(0.3, 0.1), nu(-0.2, 0.5);
        CHECK(kPi * kPi / 4.0 * wigner_numeric(rho, mu, nu) ==
              doctest::Approx(displaced_parity_expectation(rho, mu, nu)).epsilon(1e-15));
    }
    SUBCASE("vacuum limit of the closed form") {
        const auto traj = cat_trajectory({1e-7, phi, 0.0}, {0.0, 1.0, 6.0}, 0.3);
        CHECK(std::abs(wigner_cat_analytic(traj, 0.0, 0.0) - 0.405284734569351) < 1e-10);
    }
    SUBCASE("closed form on a 5x5 grid") {
        const auto traj = cat_trajectory({1.0, phi, kPi}, {0.0, 1.0, 6.0}, 0.2);
        const std::vector<double> grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
        const auto report = compare_cat_wigner(traj, default_cutoff(1.0), grid, grid);
        CHECK(report.consistent());
        CHECK(report.max_abs_deviation < 1e-6);
        CHECK(report.report().find("agrees") != std::string::npos);
    }
    SUBCASE("closed form without inversion symmetry") {
        const auto traj = cat_trajectory({Complex(0.7, 0.3), 0.6, 0.9}, {0.0, 1.0, 2.0}, 0.2);
        const std::vector<double> grid = {-1.0, -0.5, 0.0, 0.5, 1.0};
        const auto report = compare_cat_wigner(traj, default_cutoff(1.0), grid, grid);
        CHECK_FALSE(report.consistent());
        CHECK(report.report().find("disagrees") != std::string::npos);
        CHECK(report.report().find("parity trace") != std::string::npos);

        // the printed interference term is the true one reflected through the origin
        const auto rho = cat_density_matrix(traj, default_cutoff(1.0));
        auto peaks = [&](Complex mu, Complex nu) {
            const double n2 = traj.norm_const * traj.norm_const;
            return 4.0 / (kPi * kPi) * n2 *
                   (std::exp(-2.0 * std::norm(mu - traj.alpha_plus) -
                             2.0 * std::norm(nu - traj.beta_plus)) +
                    std::exp(-2.0 * std::norm(mu - traj.alpha_minus) -
                             2.0 * std::norm(nu - traj.beta_minus)));
        };
        const Complex mu(0.4, -0.2), nu(0.1, 0.3);
        const double printed = wigner_cat_analytic(traj, mu, nu) - peaks(mu, nu);
        const double reflected = wigner_numeric(rho, -mu, -nu) - peaks(-mu, -nu);
        CHECK(std::abs(printed - reflected) < 1e-6);
    }
    SUBCASE("normalization") {
        const auto traj = cat_trajectory({1.0, phi, kPi}, {0.0, 1.0, 6.0}, 0.2);
        const FockCutoff c(32);  // guard covers the corners of [-4, 4]^2
        const auto e = cat_product_expansion(traj, c);
        Complex total = 0.0;
        for (std::size_t j = 0; j < e.mode_a.size(); ++j) {
            total += single_mode_wigner_integral(e.mode_a[j], c) *
                     single_mode_wigner_integral(e.mode_b[j], c);
        }
        CHECK(std::abs(total - 1.0) < 1e-4);
    }
}

TEST_CASE("Bell measure") {
    const FockCutoff c(6);
    const auto vac = parity_evaluator(TwoModeDensityMatrix::vacuum(c));
    CHECK(bell_measure(vac, {}) == doctest::Approx(2.0).epsilon(1e-14));

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto eval = parity_evaluator(random_state(FockCutoff(4), rng));
        const Complex mu(u(rng), u(rng)), nu(u(rng), u(rng));
        const double collapsed = bell_measure(eval, {mu, nu, mu, nu});
        CHECK(std::abs(collapsed - 2.0 * std::abs(eval(mu, nu))) < 1e-12);
        CHECK(collapsed <= 2.0 + 1e-12);
        const BellSettings s{mu, nu, Complex(u(rng), u(rng)), Complex(u(rng), u(rng))};
        CHECK(bell_measure(eval, s) <= kTsirelson + 1e-9);
    }

    // vacuum with mu = nu = 0: 1 + x + y - xy with x, y in (0, 1]
    for (const double a : {0.1, 0.4, 0.9}) {
        for (const double b : {0.2, 0.7}) {
            const double x = std::exp(-2.0 * a * a), y = std::exp(-2.0 * b * b);
            CHECK(std::abs(bell_measure(vac, {0.0, 0.0, a, Complex(0.0, b)}) - (1 + x + y - x * y)) <
                  1e-10);
        }
    }
}

TEST_CASE("Bell maximization") {
    SUBCASE("product vacuum does not violate") {
        const auto vac = parity_evaluator(TwoModeDensityMatrix::vacuum(FockCutoff(8)));
        const auto r = maximize_bell(vac);
        CHECK(r.value <= 2.0 + 1e-6);
        CHECK(r.value >= 2.0 - 1e-6);
    }
    SUBCASE("single-photon Bell-like state") {
        const FockCutoff c(10);
        const auto eval = parity_evaluator(closed_form_single_photon({0.0, 0.0, 1.0}, kPi / 4.0, c));
        double grid_best = 0.0;
        for (int i = 0; i <= 40; ++i) {
            for (int j = 0; j <= 40; ++j) {
                const BellSettings s{0.0, 0.0, -1.0 + 0.05 * i, -1.0 + 0.05 * j};
                grid_best = std::max(grid_best, bell_measure(eval, s));
            }
        }
        OptimizerOptions opt;
        opt.seed = 7;
        const auto r = maximize_bell(eval, opt);
        CHECK(r.value > 2.0);
        CHECK(r.value >= grid_best - 1e-4);
        CHECK(r.value <= kTsirelson + 1e-9);
        CHECK(r.converged);
        CHECK(std::abs(bell_measure(eval, r.settings) - r.value) < 1e-12);
        CHECK(r.settings.mu == Complex(0.0));
        CHECK(r.settings.nu == Complex(0.0));

        opt.mode = SettingsMode::all_free;
        opt.starts = 8;
        const auto free = maximize_bell(eval, opt);
        CHECK(free.value > 2.0);
        CHECK(free.value <= kTsirelson + 1e-9);
    }
    SUBCASE("deterministic for a fixed seed") {
        const auto eval = parity_evaluator(closed_form_single_photon({0.0, 1.0, 6.0}, 0.1, FockCutoff(8)));
        OptimizerOptions opt;
        opt.starts = 6;
        opt.seed = 11;
        const auto a = maximize_bell(eval, opt);
        const auto b = maximize_bell(eval, opt);
        CHECK(a.value == b.value);
        CHECK(a.settings.mu_prime == b.settings.mu_prime);
        CHECK(a.iterations == b.iterations);
    }
    SUBCASE("frequency does not change the maximum") {
        const CatSpec spec{0.5, kPi / 2.0, kPi};
        const FockCutoff c = default_cutoff(0.5);
        OptimizerOptions opt;
        opt.search_radius = default_search_radius(0.5);
        const double t = 0.01;
        const auto r0 = maximize_bell(cat_product_expansion(cat_trajectory(spec, {0.0, 1.0, 100.0}, t), c), opt);
        const auto r1 = maximize_bell(cat_product_expansion(cat_trajectory(spec, {3.0, 1.0, 100.0}, t), c), opt);
        CHECK(std::abs(r0.value - r1.value) < 1e-6);
    }
    SUBCASE("larger cats violate more") {
        const ModelParams p{0.0, 1.0, 100.0};
        const double t = 0.3 / p.gamma;
        double best[2];
        int slot = 0;
        for (const double alpha : {0.5, 2.0}) {
            OptimizerOptions opt;
            opt.search_radius = default_search_radius(alpha);
            const auto traj = cat_trajectory({alpha, kPi / 2.0, kPi}, p, t);
            best[slot++] = maximize_bell(cat_product_expansion(traj, default_cutoff(alpha)), opt).value;
        }
        CHECK(best[0] > 2.0);
        CHECK(best[1] >= best[0]);
        CHECK(best[1] <= kTsirelson + 1e-9);
    }
    SUBCASE("separable path matches the generic one") {
        const auto traj = cat_trajectory({1.0, kPi / 2.0, kPi}, {0.0, 1.0, 6.0}, 0.1);
        const auto e = cat_product_expansion(traj, default_cutoff(1.0));
        const auto generic = parity_evaluator(e);
        const BellSettings s{Complex(0.1, -0.2), Complex(0.0, 0.3), Complex(-0.4, 0.1), 0.25};
        CHECK(std::abs(bell_measure(e, s) - bell_measure(generic, s)) < 1e-13);
        OptimizerOptions opt;
        opt.starts = 4;
        const auto fast = maximize_bell(e, opt);
        const auto slow = maximize_bell(generic, opt);
        CHECK(std::abs(fast.value - slow.value) < 1e-9);
        opt.mode = SettingsMode::all_free;
        opt.starts = 2;
        CHECK(std::abs(maximize_bell(e, opt).value - maximize_bell(generic, opt).value) < 1e-9);
    }
    SUBCASE("option checks") {
        const auto vac = parity_evaluator(TwoModeDensityMatrix::vacuum(FockCutoff(2)));
        OptimizerOptions opt;
        opt.starts = 0;
        CHECK_THROWS_AS(maximize_bell(vac, opt), Error);
    }
}
