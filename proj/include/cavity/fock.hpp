#pragma once

// Truncated two-mode Fock space: ladder operators, coherent states,
// density matrices, partial traces and phase-space displacements.
//
// Basis ordering is A-major: |n_A> (x) |n_B> sits at index n_A * (n_max + 1) + n_B.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "cavity/errors.hpp"

namespace cavity {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Highest retained Fock level per mode.
class FockCutoff {
public:
    explicit FockCutoff(int n_max);

    int n_max() const noexcept { return n_max_; }
    int mode_dim() const noexcept { return n_max_ + 1; }
    int dim() const noexcept { return mode_dim() * mode_dim(); }

    int index(int n_a, int n_b) const noexcept { return n_a * mode_dim() + n_b; }
    int level_a(int index) const noexcept { return index / mode_dim(); }
    int level_b(int index) const noexcept { return index % mode_dim(); }

    friend bool operator==(const FockCutoff&, const FockCutoff&) = default;

private:
    int n_max_;
};

/// ceil(|a|^2 + 6|a| + 10) where a is the largest coherent amplitude in play.
FockCutoff default_cutoff(double alpha_max);

enum class Mode { A, B };
enum class Ladder { annihilate, create, number };

/// Ladder operator on one mode, (n_max+1) square.
Matrix single_mode_operator(Ladder kind, int mode_dim);

/// Ladder operator on `mode` tensored with the identity on the other mode.
Matrix mode_operator(Ladder kind, Mode mode, FockCutoff cutoff);

Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);

struct ModeVector {
    Vector amplitudes;
    bool normalized = false;
    /// 1 - (norm before renormalization)^2; the Poisson tail beyond n_max.
    double truncation_deficit = 0.0;
};

/// Truncated coherent state, renormalized to unit norm.
/// Throws CutoffTooSmall unless |alpha|^2 <= n_max / 2.
ModeVector coherent_state_vector(Complex alpha, FockCutoff cutoff);

/// <a|b> for untruncated coherent states.
Complex coherent_overlap(Complex a, Complex b) noexcept;

/// Entrywise diagnostics used to enforce density-matrix invariants.
struct StateCheck {
    double hermiticity_error = 0.0;  // max |rho - rho^dagger|
    double trace_error = 0.0;        // |Tr rho - 1|
    double min_eigenvalue = 0.0;
};

inline constexpr double kHermiticityTolerance = 1e-10;
inline constexpr double kTraceTolerance = 1e-8;
inline constexpr double kEigenvalueFloor = -1e-8;

StateCheck inspect_state(const Matrix& rho);

/// Throws NotAState when any invariant of `check` is violated.
void require_state(const StateCheck& check, const char* what,
                   double eigenvalue_floor = kEigenvalueFloor);

class SingleModeDensityMatrix {
public:
    explicit SingleModeDensityMatrix(Matrix entries);

    const Matrix& matrix() const noexcept { return entries_; }
    int mode_dim() const noexcept { return static_cast<int>(entries_.rows()); }

private:
    Matrix entries_;
};

class TwoModeDensityMatrix {
public:
    /// Validates Hermiticity, unit trace and positivity (NotAState on failure).
    TwoModeDensityMatrix(Matrix entries, FockCutoff cutoff);
    /// Uses a check already computed for `entries`; still enforces the invariants.
    /// Integrator output may pass a looser eigenvalue floor.
    TwoModeDensityMatrix(Matrix entries, FockCutoff cutoff, const StateCheck& check,
                         double eigenvalue_floor = kEigenvalueFloor);

    static TwoModeDensityMatrix pure(const Vector& psi, FockCutoff cutoff);
    static TwoModeDensityMatrix fock(int n_a, int n_b, FockCutoff cutoff);
    static TwoModeDensityMatrix vacuum(FockCutoff cutoff) { return fock(0, 0, cutoff); }
    static TwoModeDensityMatrix product(const SingleModeDensityMatrix& a,
                                        const SingleModeDensityMatrix& b);

    const Matrix& matrix() const noexcept { return entries_; }
    FockCutoff cutoff() const noexcept { return cutoff_; }

    Complex element(int n_a, int n_b, int m_a, int m_b) const {
        return entries_(cutoff_.index(n_a, n_b), cutoff_.index(m_a, m_b));
    }
    double trace() const { return entries_.trace().real(); }

    /// Re Tr(rho op).
    double expectation(const Matrix& op) const;

private:
    Matrix entries_;
    FockCutoff cutoff_;
};

SingleModeDensityMatrix partial_trace(const TwoModeDensityMatrix& rho, Mode keep);

/// 1 - Tr(rho^2).
double linear_entropy(const SingleModeDensityMatrix& rho);

/// Exact matrix elements <m|exp(alpha a^dagger - alpha^* a)|n> for m, n <= n_max.
/// Throws CutoffTooSmall unless |alpha|^2 <= n_max / 4.
Matrix displacement_matrix(Complex alpha, FockCutoff cutoff);

/// Compression of D(alpha) Pi D(alpha)^dagger to levels <= n_max, Pi = (-1)^{a^dagger a}.
/// Equal to <m|D(2 alpha)|n> (-1)^n. Throws CutoffTooSmall unless |alpha|^2 <= n_max.
Matrix displaced_parity_matrix(Complex alpha, FockCutoff cutoff);

/// Indices of the two-mode basis grouped by total photon number n_A + n_B.
std::vector<std::vector<int>> number_sectors(FockCutoff cutoff);

}  // namespace cavity
