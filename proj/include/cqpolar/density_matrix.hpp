#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "cqpolar/common.hpp"

// Density matrices and the handful of spectral helpers the rest of the
// library leans on. Spectral decompositions are always done with Eigen's
// self-adjoint solver; nothing here is iterative or approximate beyond
// floating point itself.

namespace cqpolar {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Validation tolerances. Hermiticity and trace are checked to 1e-10;
// eigenvalues in [-1e-10, 0) are clamped to zero, anything lower is an error.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-10;

inline Matrix psd_sqrt(const Matrix& m);

class DensityMatrix {
public:
    DensityMatrix() = default;

    // Validating constructor: Hermitian, positive semidefinite, unit trace.
    explicit DensityMatrix(const Matrix& m) : mat_(m) { validate(); }

    static DensityMatrix pure(const Vector& ket) {
        double nrm = ket.norm();
        if (nrm < 1e-12) throw StateError("pure state from (near-)zero vector");
        Vector k = ket / nrm;
        return DensityMatrix(k * k.adjoint(), unchecked_tag{});
    }

    static DensityMatrix diagonal(const std::vector<double>& probs) {
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(probs.size()),
                                static_cast<Eigen::Index>(probs.size()));
        for (std::size_t i = 0; i < probs.size(); ++i) m(i, i) = probs[i];
        return DensityMatrix(m);
    }

    static DensityMatrix maximally_mixed(int dim) {
        return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim),
                             unchecked_tag{});
    }

    const Matrix& matrix() const { return mat_; }
    Eigen::Index dim() const { return mat_.rows(); }

    // Eigenvalues clamped per the tolerance policy, ascending.
    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
        Eigen::VectorXd ev = es.eigenvalues();
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            if (ev(i) < 0.0) {
                if (ev(i) < kEigenvalueFloor)
                    throw StateError("density matrix eigenvalue " + std::to_string(ev(i)) +
                                     " below clamp floor");
                ev(i) = 0.0;
            }
        }
        return ev;
    }

    // Principal square root via spectral decomposition.
    Matrix sqrt() const { return psd_sqrt(mat_); }

private:
    struct unchecked_tag {};
    DensityMatrix(const Matrix& m, unchecked_tag) : mat_(m) {}

    void validate() const {
        if (mat_.rows() != mat_.cols() || mat_.rows() == 0)
            throw StateError("density matrix must be square and nonempty");
        double herm = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
        if (herm > kHermitianTol)
            throw StateError("density matrix not Hermitian (deviation " + std::to_string(herm) + ")");
        double tr = mat_.trace().real();
        if (std::abs(tr - 1.0) > kTraceTol)
            throw StateError("density matrix trace " + std::to_string(tr) + " != 1");
        eigenvalues(); // throws if any eigenvalue is below the clamp floor
    }

    Matrix mat_;
};

// Square root of a PSD matrix with the same clamping policy as DensityMatrix;
// kept as a free function since subnormalized branch payloads need it too.
inline Matrix psd_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double lam = ev(i);
        if (lam < 0.0) {
            double scale = std::max(1.0, std::abs(ev(ev.size() - 1)));
            if (lam < -1e-9 * scale)
                throw StateError("psd_sqrt: matrix has negative eigenvalue " + std::to_string(lam));
            lam = 0.0;
        }
        ev(i) = std::sqrt(lam);
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Partial trace over one factor of a bipartite system with dims (da, db).
// keep = 0 traces out B, keep = 1 traces out A.
inline Matrix partial_trace(const Matrix& m, int da, int db, int keep) {
    if (m.rows() != static_cast<Eigen::Index>(da) * db)
        throw StateError("partial_trace: dimension mismatch");
    if (keep == 0) {
        Matrix out = Matrix::Zero(da, da);
        for (int i = 0; i < da; ++i)
            for (int j = 0; j < da; ++j)
                for (int k = 0; k < db; ++k)
                    out(i, j) += m(i * db + k, j * db + k);
        return out;
    }
    Matrix out = Matrix::Zero(db, db);
    for (int k = 0; k < db; ++k)
        for (int l = 0; l < db; ++l)
            for (int i = 0; i < da; ++i)
                out(k, l) += m(i * db + k, i * db + l);
    return out;
}

} // namespace cqpolar
