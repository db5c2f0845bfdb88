#pragma once

#include <vector>

#include "cqpolar/density_matrix.hpp"

// Entropic and distinguishability quantities for binary-input cq ensembles,
// plus the classical channel table type they reduce to in the commuting case.
// All logarithms are base 2.

namespace cqpolar {

// Binary-input classical-quantum ensemble {p(x), rho_x}, x in {0,1}.
struct CqEnsemble {
    double p0 = 0.5, p1 = 0.5;
    DensityMatrix rho0, rho1;

    CqEnsemble() = default;
    CqEnsemble(double prob0, double prob1, DensityMatrix r0, DensityMatrix r1)
        : p0(prob0), p1(prob1), rho0(std::move(r0)), rho1(std::move(r1)) {
        if (p0 < -1e-12 || p1 < -1e-12 || std::abs(p0 + p1 - 1.0) > 1e-10)
            throw StateError("CqEnsemble prior does not sum to 1");
        if (rho0.dim() != rho1.dim())
            throw StateError("CqEnsemble states have mismatched dimensions");
        p0 = std::max(p0, 0.0);
        p1 = std::max(p1, 0.0);
    }
};

// Binary-input classical channel as rows p(y|x). Rows must sum to 1 (1e-12)
// and entries must be nonnegative.
struct ClassicalChannelTable {
    std::vector<double> row0, row1; // p(y|0), p(y|1)

    ClassicalChannelTable() = default;
    ClassicalChannelTable(std::vector<double> r0, std::vector<double> r1)
        : row0(std::move(r0)), row1(std::move(r1)) {
        if (row0.size() != row1.size() || row0.empty())
            throw StateError("channel table rows must be nonempty and equal length");
        for (const auto* r : {&row0, &row1}) {
            double s = 0.0;
            for (double v : *r) {
                if (v < -1e-15) throw StateError("channel table has negative entry");
                s += v;
            }
            if (std::abs(s - 1.0) > 1e-12)
                throw StateError("channel table row sums to " + std::to_string(s));
        }
    }

    std::size_t alphabet() const { return row0.size(); }

    // Diagonal embedding: the commuting cq ensemble this table induces.
    CqEnsemble embed(double p0 = 0.5, double p1 = 0.5) const {
        return CqEnsemble(p0, p1, DensityMatrix::diagonal(row0), DensityMatrix::diagonal(row1));
    }
};

// Erasure broadcast building block: BEC(eps) rows over outputs {0, 1, e}.
inline ClassicalChannelTable erasure_table(double eps) {
    if (eps < 0.0 || eps > 1.0) throw StateError("erasure probability outside [0,1]");
    return ClassicalChannelTable({1.0 - eps, 0.0, eps}, {0.0, 1.0 - eps, eps});
}

inline ClassicalChannelTable symmetric_flip_table(double p) {
    if (p < 0.0 || p > 1.0) throw StateError("flip probability outside [0,1]");
    return ClassicalChannelTable({1.0 - p, p}, {p, 1.0 - p});
}

// ---------------------------------------------------------------------------

inline double von_neumann_entropy(const DensityMatrix& rho) {
    Eigen::VectorXd ev = rho.eigenvalues();
    double h = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) h -= xlog2x(ev(i));
    return h;
}

// Root fidelity F(rho, sigma) = || sqrt(rho) sqrt(sigma) ||_1. With this
// convention commuting states give sum_i sqrt(p_i q_i) and the Bhattacharyya
// parameter below obeys Z(W+) = Z(W)^2 exactly.
double fidelity_sqrt(const DensityMatrix& rho, const DensityMatrix& sigma);

// squared convention F(rho,sigma)^2; the root convention is what Z uses
inline double fidelity_squared(const DensityMatrix& rho, const DensityMatrix& sigma) {
    double f = fidelity_sqrt(rho, sigma);
    return f * f;
}

inline double fidelity_sqrt(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw StateError("fidelity_sqrt: dimension mismatch");
    Matrix prod = rho.sqrt() * sigma.sqrt();
    Eigen::JacobiSVD<Matrix> svd(prod);
    return svd.singularValues().sum();
}

// Holevo information I(X;B) of a binary ensemble.
inline double holevo_information(const CqEnsemble& e) {
    DensityMatrix avg(e.p0 * e.rho0.matrix() + e.p1 * e.rho1.matrix());
    return von_neumann_entropy(avg) - e.p0 * von_neumann_entropy(e.rho0) -
           e.p1 * von_neumann_entropy(e.rho1);
}

// H(X|B) for the cq state sum_x p(x) |x><x| (x) rho_x, via H(X) - I(X;B).
inline double conditional_entropy_xb(const CqEnsemble& e) {
    return binary_entropy(e.p0) - holevo_information(e);
}

// Z(X|B) = 2 sqrt(p0 p1) F(rho0, rho1). For a uniform prior over a commuting
// pair this is the classical Bhattacharyya sum.
inline double bhattacharyya_z(const CqEnsemble& e) {
    return 2.0 * std::sqrt(e.p0 * e.p1) * fidelity_sqrt(e.rho0, e.rho1);
}

// ---------------------------------------------------------------------------
// Conditional mutual information I(X;B|Y) of a ccq state given as a labeled
// ensemble {p(x,y), rho_{x,y}}. Evaluated as H(XY) + H(YB) - H(Y) - H(XYB)
// on explicit block-diagonal embeddings of the classical labels.

struct LabeledState {
    int x = 0;
    int y = 0;
    double p = 0.0;
    DensityMatrix rho;
};

using LabeledEnsemble = std::vector<LabeledState>;

namespace detail {

// Block-diagonal matrix diag(w_k * M_k); weights need not be normalized here,
// callers pass a proper distribution.
inline Matrix block_diagonal(const std::vector<double>& w, const std::vector<Matrix>& blocks) {
    Eigen::Index total = 0;
    for (const auto& b : blocks) total += b.rows();
    Matrix out = Matrix::Zero(total, total);
    Eigen::Index at = 0;
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        out.block(at, at, blocks[k].rows(), blocks[k].rows()) = w[k] * blocks[k];
        at += blocks[k].rows();
    }
    return out;
}

} // namespace detail

inline double conditional_mutual_information(const LabeledEnsemble& ens) {
    if (ens.empty()) throw StateError("conditional_mutual_information: empty ensemble");
    double total = 0.0;
    Eigen::Index d = ens.front().rho.dim();
    int nx = 0, ny = 0;
    for (const auto& s : ens) {
        if (s.p < -1e-12) throw StateError("labeled ensemble has negative weight");
        if (s.rho.dim() != d) throw StateError("labeled ensemble mixes dimensions");
        total += s.p;
        nx = std::max(nx, s.x + 1);
        ny = std::max(ny, s.y + 1);
    }
    if (std::abs(total - 1.0) > 1e-10)
        throw StateError("labeled ensemble weights sum to " + std::to_string(total));

    // Marginals over the classical labels.
    std::vector<double> pxy(static_cast<std::size_t>(nx) * ny, 0.0);
    std::vector<double> py(ny, 0.0);
    std::vector<Matrix> rho_y(ny, Matrix::Zero(d, d)); // unconditioned p(x|y)-averaged states
    for (const auto& s : ens) {
        pxy[static_cast<std::size_t>(s.x) * ny + s.y] += s.p;
        py[s.y] += s.p;
        rho_y[s.y] += s.p * s.rho.matrix();
    }
    for (int y = 0; y < ny; ++y)
        if (py[y] > 0.0) rho_y[y] /= py[y];

    // H(XY) and H(Y): diagonal embeddings, i.e. Shannon entropies.
    double h_xy = shannon_entropy(pxy);
    double h_y = shannon_entropy(py);

    // H(YB) and H(XYB): genuine block-diagonal matrices over the labels.
    double h_yb = 0.0;
    {
        std::vector<Matrix> blocks;
        std::vector<double> w;
        for (int y = 0; y < ny; ++y)
            if (py[y] > 1e-14) {
                blocks.push_back(rho_y[y]);
                w.push_back(py[y]);
            }
        Matrix m = detail::block_diagonal(w, blocks);
        Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            h_yb -= xlog2x(std::max(es.eigenvalues()(i), 0.0));
    }
    double h_xyb = 0.0;
    {
        std::vector<Matrix> blocks;
        std::vector<double> w;
        for (const auto& s : ens)
            if (s.p > 1e-14) {
                blocks.push_back(s.rho.matrix());
                w.push_back(s.p);
            }
        Matrix m = detail::block_diagonal(w, blocks);
        Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
            h_xyb -= xlog2x(std::max(es.eigenvalues()(i), 0.0));
    }

    return h_xy + h_yb - h_y - h_xyb;
}

// Multi-ary Holevo information I(X;B), used by the rate-region evaluators.
inline double holevo_information(const std::vector<double>& prior,
                                 const std::vector<DensityMatrix>& states) {
    if (prior.size() != states.size() || prior.empty())
        throw StateError("holevo_information: prior/state size mismatch");
    Eigen::Index d = states.front().dim();
    Matrix avg = Matrix::Zero(d, d);
    double cond = 0.0, total = 0.0;
    for (std::size_t i = 0; i < prior.size(); ++i) {
        if (states[i].dim() != d) throw StateError("holevo_information: mixed dimensions");
        avg += prior[i] * states[i].matrix();
        cond += prior[i] * von_neumann_entropy(states[i]);
        total += prior[i];
    }
    if (std::abs(total - 1.0) > 1e-10)
        throw StateError("holevo_information: prior sums to " + std::to_string(total));
    Eigen::SelfAdjointEigenSolver<Matrix> es(avg, Eigen::EigenvaluesOnly);
    double h = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        h -= xlog2x(std::max(es.eigenvalues()(i), 0.0));
    return h - cond;
}

// Classical shortcuts for channel tables (these are what the diagonal
// embedding must reproduce).
inline double classical_mutual_information(const ClassicalChannelTable& t, double p0, double p1) {
    std::size_t m = t.alphabet();
    double i = 0.0;
    for (std::size_t y = 0; y < m; ++y) {
        double py = p0 * t.row0[y] + p1 * t.row1[y];
        i -= xlog2x(py);
        i += p0 * xlog2x(t.row0[y]) + p1 * xlog2x(t.row1[y]);
    }
    // i = H(Y) - H(Y|X)
    return i;
}

inline double classical_bhattacharyya_z(const ClassicalChannelTable& t, double p0, double p1) {
    double f = 0.0;
    for (std::size_t y = 0; y < t.alphabet(); ++y) f += std::sqrt(t.row0[y] * t.row1[y]);
    return 2.0 * std::sqrt(p0 * p1) * f;
}

} // namespace cqpolar
