#include "cavity/fock.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cavity {

FockCutoff::FockCutoff(int n_max) : n_max_(n_max) {
    if (n_max < 1) {
        throw Error(ErrorKind::InvalidArgument, "Fock cutoff n_max must be >= 1");
    }
}

FockCutoff default_cutoff(double alpha_max) {
    const double a = std::abs(alpha_max);
    return FockCutoff(static_cast<int>(std::ceil(a * a + 6.0 * a + 10.0)));
}

Matrix single_mode_operator(Ladder kind, int mode_dim) {
    Matrix op = Matrix::Zero(mode_dim, mode_dim);
    for (int n = 1; n < mode_dim; ++n) {
        const double s = std::sqrt(static_cast<double>(n));
        switch (kind) {
            case Ladder::annihilate: op(n - 1, n) = s; break;
            case Ladder::create: op(n, n - 1) = s; break;
            case Ladder::number: op(n, n) = n; break;
        }
    }
    return op;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

Matrix mode_operator(Ladder kind, Mode mode, FockCutoff cutoff) {
    const int n = cutoff.mode_dim();
    const Matrix single = single_mode_operator(kind, n);
    const Matrix id = Matrix::Identity(n, n);
    return mode == Mode::A ? kron(single, id) : kron(id, single);
}

ModeVector coherent_state_vector(Complex alpha, FockCutoff cutoff) {
    const double mean = std::norm(alpha);
    if (mean > 0.5 * cutoff.n_max()) {
        std::ostringstream msg;
        msg << "coherent amplitude |alpha|^2 = " << mean << " exceeds n_max/2 = "
            << 0.5 * cutoff.n_max();
        throw Error(ErrorKind::CutoffTooSmall, msg.str());
    }
    const int dim = cutoff.mode_dim();
    ModeVector out;
    out.amplitudes.resize(dim);
    Complex c = std::exp(-0.5 * mean);
    out.amplitudes(0) = c;
    for (int n = 1; n < dim; ++n) {
        c *= alpha / std::sqrt(static_cast<double>(n));
        out.amplitudes(n) = c;
    }
    const double norm2 = out.amplitudes.squaredNorm();
    out.truncation_deficit = 1.0 - norm2;
    out.amplitudes /= std::sqrt(norm2);
    out.normalized = true;
    return out;
}

Complex coherent_overlap(Complex a, Complex b) noexcept {
    return std::exp(-0.5 * std::norm(a) - 0.5 * std::norm(b) + std::conj(a) * b);
}

StateCheck inspect_state(const Matrix& rho) {
    StateCheck check;
    if (rho.rows() == 0 || rho.rows() != rho.cols()) {
        check.trace_error = 1.0;
        check.hermiticity_error = 1.0;
        check.min_eigenvalue = -1.0;
        return check;
    }
    check.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    check.trace_error = std::abs(rho.trace() - 1.0);
    const Matrix herm = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
    check.min_eigenvalue = solver.eigenvalues().minCoeff();
    return check;
}

void require_state(const StateCheck& check, const char* what, double eigenvalue_floor) {
    std::ostringstream msg;
    if (check.hermiticity_error > kHermiticityTolerance) {
        msg << what << ": not Hermitian (deviation " << check.hermiticity_error << ")";
    } else if (check.trace_error > kTraceTolerance) {
        msg << what << ": trace deviates from 1 by " << check.trace_error;
    } else if (check.min_eigenvalue < eigenvalue_floor) {
        msg << what << ": negative eigenvalue " << check.min_eigenvalue;
    } else {
        return;
    }
    throw Error(ErrorKind::NotAState, msg.str());
}

SingleModeDensityMatrix::SingleModeDensityMatrix(Matrix entries) : entries_(std::move(entries)) {
    require_state(inspect_state(entries_), "single-mode density matrix");
}

TwoModeDensityMatrix::TwoModeDensityMatrix(Matrix entries, FockCutoff cutoff)
    : TwoModeDensityMatrix(entries, cutoff, inspect_state(entries)) {}

TwoModeDensityMatrix::TwoModeDensityMatrix(Matrix entries, FockCutoff cutoff,
                                           const StateCheck& check, double eigenvalue_floor)
    : entries_(std::move(entries)), cutoff_(cutoff) {
    if (entries_.rows() != cutoff_.dim() || entries_.cols() != cutoff_.dim()) {
        throw Error(ErrorKind::InvalidArgument, "density matrix dimension does not match cutoff");
    }
    require_state(check, "two-mode density matrix", eigenvalue_floor);
}

TwoModeDensityMatrix TwoModeDensityMatrix::pure(const Vector& psi, FockCutoff cutoff) {
    if (psi.size() != cutoff.dim()) {
        throw Error(ErrorKind::InvalidArgument, "state vector dimension does not match cutoff");
    }
    const Vector unit = psi / psi.norm();
    return TwoModeDensityMatrix(unit * unit.adjoint(), cutoff);
}

TwoModeDensityMatrix TwoModeDensityMatrix::fock(int n_a, int n_b, FockCutoff cutoff) {
    if (n_a < 0 || n_b < 0 || n_a > cutoff.n_max() || n_b > cutoff.n_max()) {
        throw Error(ErrorKind::CutoffTooSmall, "Fock level beyond cutoff");
    }
    Matrix m = Matrix::Zero(cutoff.dim(), cutoff.dim());
    const int i = cutoff.index(n_a, n_b);
    m(i, i) = 1.0;
    StateCheck exact;
    exact.min_eigenvalue = 0.0;
    return TwoModeDensityMatrix(std::move(m), cutoff, exact);
}

TwoModeDensityMatrix TwoModeDensityMatrix::product(const SingleModeDensityMatrix& a,
                                                   const SingleModeDensityMatrix& b) {
    if (a.mode_dim() != b.mode_dim()) {
        throw Error(ErrorKind::InvalidArgument, "product of modes with different cutoffs");
    }
    return TwoModeDensityMatrix(kron(a.matrix(), b.matrix()), FockCutoff(a.mode_dim() - 1));
}

double TwoModeDensityMatrix::expectation(const Matrix& op) const {
    // Tr(rho op) = sum_ij rho_ij op_ji
    return (entries_.transpose().cwiseProduct(op)).sum().real();
}

SingleModeDensityMatrix partial_trace(const TwoModeDensityMatrix& rho, Mode keep) {
    const FockCutoff c = rho.cutoff();
    const int n = c.mode_dim();
    const Matrix& m = rho.matrix();
    Matrix out = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            Complex s = 0.0;
            for (int j = 0; j < n; ++j) {
                s += keep == Mode::A ? m(c.index(i, j), c.index(k, j))
                                     : m(c.index(j, i), c.index(j, k));
            }
            out(i, k) = s;
        }
    }
    return SingleModeDensityMatrix(std::move(out));
}

double linear_entropy(const SingleModeDensityMatrix& rho) {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return 1.0 - rho.matrix().squaredNorm();
}

namespace {

// <m|D(beta)|n> through the associated Laguerre form, which stays accurate
// for large |beta| where direct series or recurrences on columns cancel badly.
Matrix displacement_elements(Complex beta, int dim) {
    Matrix out = Matrix::Zero(dim, dim);
    const double r = std::abs(beta);
    if (r == 0.0) {
        out.setIdentity();
        return out;
    }
    const double x = r * r;
    const double log_r = std::log(r);
    const Complex up = beta / r;               // phase of beta
    const Complex down = -std::conj(beta) / r;  // phase of -beta^*
    std::vector<double> lgam(dim + 1);
    for (int n = 0; n <= dim; ++n) lgam[n] = std::lgamma(n + 1.0);

    std::vector<double> lag(dim);
    for (int d = 0; d < dim; ++d) {
        // L_j^{(d)}(x) for j = 0 .. dim-1-d
        const int len = dim - d;
        lag[0] = 1.0;
        if (len > 1) lag[1] = 1.0 + d - x;
        for (int j = 1; j + 1 < len; ++j) {
            lag[j + 1] = ((2.0 * j + 1.0 + d - x) * lag[j] - (j + d) * lag[j - 1]) / (j + 1.0);
        }
        const Complex up_d = std::pow(up, d);
        const Complex down_d = std::pow(down, d);
        for (int lo = 0; lo < len; ++lo) {
            const int hi = lo + d;
            const double mag =
                std::exp(0.5 * (lgam[lo] - lgam[hi]) - 0.5 * x + d * log_r) * lag[lo];
            out(hi, lo) = mag * up_d;
            if (d > 0) out(lo, hi) = mag * down_d;
        }
    }
    return out;
}

}  // namespace

Matrix displacement_matrix(Complex alpha, FockCutoff cutoff) {
    if (std::norm(alpha) > 0.25 * cutoff.n_max()) {
        std::ostringstream msg;
        msg << "displacement |alpha|^2 = " << std::norm(alpha) << " exceeds n_max/4 = "
            << 0.25 * cutoff.n_max();
        throw Error(ErrorKind::CutoffTooSmall, msg.str());
    }
    return displacement_elements(alpha, cutoff.mode_dim());
}

Matrix displaced_parity_matrix(Complex alpha, FockCutoff cutoff) {
    if (std::norm(alpha) > cutoff.n_max()) {
        std::ostringstream msg;
        msg << "parity displacement |alpha|^2 = " << std::norm(alpha) << " exceeds n_max = "
            << cutoff.n_max();
        throw Error(ErrorKind::CutoffTooSmall, msg.str());
    }
    Matrix out = displacement_elements(2.0 * alpha, cutoff.mode_dim());
    for (Eigen::Index n = 1; n < out.cols(); n += 2) out.col(n) *= -1.0;
    return out;
}

std::vector<std::vector<int>> number_sectors(FockCutoff cutoff) {
    std::vector<std::vector<int>> sectors(2 * cutoff.n_max() + 1);
    for (int i = 0; i < cutoff.dim(); ++i) {
        sectors[cutoff.level_a(i) + cutoff.level_b(i)].push_back(i);
    }
    return sectors;
}

}  // namespace cavity
