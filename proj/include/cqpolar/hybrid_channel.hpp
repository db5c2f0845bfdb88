#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cqpolar/quantum_info.hpp"

// Exact synthesis of polarized channels. A HybridChannel is a binary-input
// channel whose output is a classical branch register (the accumulated
// prefix side information) plus a payload that is quantum in general and a
// single probability cell in the commuting case. Payloads are stored
// input-conditioned and subnormalized: branch b holds a pair (a0, a1) with
// tr a_x = P(b | X = x), so sum_b tr a_x = 1 for each input. Keeping the
// branch probability inside the payload is what lets nonuniform priors and
// input-dependent prefix statistics ride through the recursion unchanged.
//
// Both split operations are exact. The only reductions ever applied are
// per-branch support compression (an isometry) and merging of branches whose
// payload pairs are proportional (a sufficient-statistic collapse). Both
// preserve every quantity derived downstream: Z, Holevo information, and all
// further splits. Erasure-structured channels collapse to a handful of
// branches under merging, which is what makes exact blocklength-1024 runs of
// the erasure family cheap.

namespace cqpolar {

struct SynthesisBudget {
    int max_branches = 4096;       // merged branch count (classical: alphabet)
    int max_total_dimension = 4096; // sum of per-branch payload dimensions
    // raw pair count allowed while building a split before merging
    long max_raw_branches = 1 << 22;
};

struct HybridBranch {
    Matrix a0, a1; // subnormalized payloads, tr a_x = P(branch | x)

    double weight(double p0, double p1) const {
        return p0 * a0.trace().real() + p1 * a1.trace().real();
    }
};

enum class PayloadKind { classical_table, quantum };

class HybridChannel {
public:
    double p0 = 0.5, p1 = 0.5;     // input prior of this (synthesized) channel
    std::vector<HybridBranch> branches;
    PayloadKind kind = PayloadKind::classical_table;
    SynthesisBudget budget;
    int depth = 0;                 // number of splits applied so far

    HybridChannel() = default;

    static HybridChannel from_table(const ClassicalChannelTable& t, double p0 = 0.5,
                                    double p1 = 0.5, SynthesisBudget b = {}) {
        HybridChannel w;
        w.p0 = p0;
        w.p1 = p1;
        w.kind = PayloadKind::classical_table;
        w.budget = b;
        for (std::size_t y = 0; y < t.alphabet(); ++y) {
            HybridBranch br;
            br.a0 = Matrix::Constant(1, 1, t.row0[y]);
            br.a1 = Matrix::Constant(1, 1, t.row1[y]);
            w.branches.push_back(std::move(br));
        }
        w.tidy();
        return w;
    }

    static HybridChannel from_ensemble(const CqEnsemble& e, SynthesisBudget b = {}) {
        HybridChannel w;
        w.p0 = e.p0;
        w.p1 = e.p1;
        w.kind = PayloadKind::quantum;
        w.budget = b;
        HybridBranch br;
        br.a0 = e.rho0.matrix();
        br.a1 = e.rho1.matrix();
        w.branches.push_back(std::move(br));
        w.tidy();
        return w;
    }

    // Source with trivial output: polarizing this tracks Z(U_i | U^{i-1}).
    static HybridChannel from_source(double p1_, SynthesisBudget b = {}) {
        return from_table(ClassicalChannelTable({1.0}, {1.0}), 1.0 - p1_, p1_, b);
    }

    int total_dimension() const {
        int d = 0;
        for (const auto& br : branches) d += static_cast<int>(br.a0.rows());
        return d;
    }

    // Per-input branch mass must be 1; every branch pair shares a dimension.
    void validate(double tol = 1e-9) const {
        double t0 = 0.0, t1 = 0.0;
        for (const auto& br : branches) {
            if (br.a0.rows() != br.a0.cols() || br.a0.rows() != br.a1.rows())
                throw StateError("hybrid branch payload pair has mismatched dimensions");
            t0 += br.a0.trace().real();
            t1 += br.a1.trace().real();
        }
        if (std::abs(t0 - 1.0) > tol || std::abs(t1 - 1.0) > tol)
            throw StateError("hybrid branch masses sum to (" + std::to_string(t0) + ", " +
                             std::to_string(t1) + "), expected 1");
        if (p0 < -1e-12 || p1 < -1e-12 || std::abs(p0 + p1 - 1.0) > 1e-10)
            throw StateError("hybrid channel prior invalid");
    }

    void tidy();
    void check_budget() const {
        if (static_cast<int>(branches.size()) > budget.max_branches)
            throw BudgetError("branch count " + std::to_string(branches.size()) +
                                  " exceeds budget " + std::to_string(budget.max_branches),
                              depth);
        if (total_dimension() > budget.max_total_dimension)
            throw BudgetError("total payload dimension " + std::to_string(total_dimension()) +
                                  " exceeds budget " + std::to_string(budget.max_total_dimension),
                              depth);
    }
};

namespace detail {

// Compress a branch pair onto the joint support of its payloads and put it in
// a canonical basis (eigenbasis of a0 + sqrt(2) a1, descending, phase-fixed).
// The slightly asymmetric mix breaks ties that a plain average would leave
// degenerate, which helps equivalent branches land on identical matrices.
inline void compress_branch(HybridBranch& br) {
    Eigen::Index d = br.a0.rows();
    if (d <= 1) return;
    Matrix mix = br.a0 + std::sqrt(2.0) * br.a1;
    Eigen::SelfAdjointEigenSolver<Matrix> es(mix);
    double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
    if (lmax <= 0.0) return; // caller drops zero-mass branches
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < d; ++i)
        if (es.eigenvalues()(i) > 1e-12 * lmax) keep.push_back(i);
    // descending eigenvalue order, each column phase-fixed on its largest entry
    Matrix basis(d, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
        Vector col = es.eigenvectors().col(keep[keep.size() - 1 - k]);
        Eigen::Index imax = 0;
        for (Eigen::Index i = 1; i < d; ++i)
            if (std::abs(col(i)) > std::abs(col(imax))) imax = i;
        Complex ph = col(imax) / std::abs(col(imax));
        basis.col(static_cast<Eigen::Index>(k)) = col / ph;
    }
    br.a0 = basis.adjoint() * br.a0 * basis;
    br.a1 = basis.adjoint() * br.a1 * basis;
}

// Bucketing key for proportional-pair merging: the pair normalized by its
// total mass, rounded. Collisions are verified before merging, so a missed
// merge only costs budget, never correctness.
inline std::string branch_merge_key(const HybridBranch& br) {
    double s = br.a0.trace().real() + br.a1.trace().real();
    if (s <= 0.0) return "zero";
    std::string key;
    key.reserve(static_cast<std::size_t>(br.a0.size()) * 8 + 8);
    auto push = [&key](double v) {
        // round to 9 digits; exact structures produce bit-identical values
        long long q = static_cast<long long>(std::llround(v * 1e9));
        key.append(reinterpret_cast<const char*>(&q), sizeof q);
    };
    push(static_cast<double>(br.a0.rows()));
    for (const Matrix* m : {&br.a0, &br.a1})
        for (Eigen::Index j = 0; j < m->cols(); ++j)
            for (Eigen::Index i = 0; i < m->rows(); ++i) {
                push((*m)(i, j).real() / s);
                push((*m)(i, j).imag() / s);
            }
    return key;
}

inline bool branches_proportional(const HybridBranch& a, const HybridBranch& b, double tol = 1e-8) {
    if (a.a0.rows() != b.a0.rows()) return false;
    double sa = a.a0.trace().real() + a.a1.trace().real();
    double sb = b.a0.trace().real() + b.a1.trace().real();
    if (sa <= 0.0 || sb <= 0.0) return false;
    double d = 0.0;
    d = std::max(d, ((a.a0 / sa) - (b.a0 / sb)).cwiseAbs().maxCoeff());
    d = std::max(d, ((a.a1 / sa) - (b.a1 / sb)).cwiseAbs().maxCoeff());
    return d <= tol;
}

} // namespace detail

// Drop zero-mass branches, compress supports, merge proportional branches.
inline void HybridChannel::tidy() {
    std::map<std::string, std::vector<HybridBranch>> buckets;
    for (auto& br : branches) {
        double mass = br.a0.trace().real() + br.a1.trace().real();
        if (mass < 1e-15) continue;
        detail::compress_branch(br);
        auto& bucket = buckets[detail::branch_merge_key(br)];
        bool merged = false;
        for (auto& rep : bucket)
            if (detail::branches_proportional(rep, br)) {
                rep.a0 += br.a0;
                rep.a1 += br.a1;
                merged = true;
                break;
            }
        if (!merged) bucket.push_back(std::move(br));
    }
    branches.clear();
    for (auto& [key, bucket] : buckets)
        for (auto& br : bucket) branches.push_back(std::move(br));
    check_budget();
}

// ---------------------------------------------------------------------------
// Single-step transforms. Two independent uses of W with iid inputs X1, X2;
// U1 = X1 + X2 is the minus input (future input marginalized under its
// induced conditional), U2 = X2 is the plus input (U1 revealed into the
// branch register). With one input branch the label set is unchanged by the
// minus step and gains the bit u1 under the plus step; in general the two
// uses' registers pair up and merging collapses what symmetry allows.

inline HybridChannel split_minus(const HybridChannel& w) {
    long raw = static_cast<long>(w.branches.size()) * static_cast<long>(w.branches.size());
    if (raw > w.budget.max_raw_branches)
        throw BudgetError("minus split would form " + std::to_string(raw) + " raw branch pairs",
                          w.depth);
    HybridChannel out;
    out.kind = w.kind;
    out.budget = w.budget;
    out.depth = w.depth + 1;
    out.p0 = w.p0 * w.p0 + w.p1 * w.p1;
    out.p1 = 2.0 * w.p0 * w.p1;
    // P(u2 | u1) = p(u1 xor u2) p(u2) / p_minus(u1)
    double cond[2][2];
    const double pr[2] = {w.p0, w.p1};
    const double prm[2] = {out.p0, out.p1};
    for (int u1 = 0; u1 < 2; ++u1)
        for (int u2 = 0; u2 < 2; ++u2)
            cond[u1][u2] = prm[u1] > 0.0 ? pr[u1 ^ u2] * pr[u2] / prm[u1] : 0.0;
    for (const auto& b1 : w.branches)
        for (const auto& b2 : w.branches) {
            const Matrix* pick1[2] = {&b1.a0, &b1.a1};
            const Matrix* pick2[2] = {&b2.a0, &b2.a1};
            HybridBranch nb;
            for (int u1 = 0; u1 < 2; ++u1) {
                Matrix acc = Matrix::Zero(b1.a0.rows() * b2.a0.rows(), b1.a0.rows() * b2.a0.rows());
                for (int u2 = 0; u2 < 2; ++u2)
                    if (cond[u1][u2] > 0.0)
                        acc += cond[u1][u2] * kron(*pick1[u1 ^ u2], *pick2[u2]);
                (u1 == 0 ? nb.a0 : nb.a1) = std::move(acc);
            }
            out.branches.push_back(std::move(nb));
        }
    out.tidy();
    return out;
}

inline HybridChannel split_plus(const HybridChannel& w) {
    long raw = 2L * static_cast<long>(w.branches.size()) * static_cast<long>(w.branches.size());
    if (raw > w.budget.max_raw_branches)
        throw BudgetError("plus split would form " + std::to_string(raw) + " raw branch pairs",
                          w.depth);
    HybridChannel out;
    out.kind = w.kind;
    out.budget = w.budget;
    out.depth = w.depth + 1;
    out.p0 = w.p0; // U2 = X2 keeps the prior
    out.p1 = w.p1;
    const double pr[2] = {w.p0, w.p1};
    for (int u1 = 0; u1 < 2; ++u1)
        for (const auto& b1 : w.branches)
            for (const auto& b2 : w.branches) {
                const Matrix* pick1[2] = {&b1.a0, &b1.a1};
                const Matrix* pick2[2] = {&b2.a0, &b2.a1};
                HybridBranch nb;
                // P(u1 | u2) = p(u1 xor u2); u1 becomes part of the label
                nb.a0 = pr[u1] * kron(*pick1[u1], *pick2[0]);
                nb.a1 = pr[u1 ^ 1] * kron(*pick1[u1 ^ 1], *pick2[1]);
                out.branches.push_back(std::move(nb));
            }
    out.tidy();
    return out;
}

// ---------------------------------------------------------------------------
// Channel quantities.

namespace detail {

inline double block_entropy(const Matrix& m) {
    if (m.rows() == 1) return -xlog2x(std::max(m(0, 0).real(), 0.0));
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    double h = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        h -= xlog2x(std::max(es.eigenvalues()(i), 0.0));
    return h;
}

inline double block_fidelity(const Matrix& a, const Matrix& b) {
    if (a.rows() == 1)
        return std::sqrt(std::max(a(0, 0).real(), 0.0) * std::max(b(0, 0).real(), 0.0));
    Matrix prod = psd_sqrt(a) * psd_sqrt(b);
    Eigen::JacobiSVD<Matrix> svd(prod);
    return svd.singularValues().sum();
}

} // namespace detail

// Z(X | L, B) = 2 sqrt(p0 p1) sum_b || sqrt(a_{b,0}) sqrt(a_{b,1}) ||_1.
inline double channel_Z(const HybridChannel& w) {
    double f = 0.0;
    for (const auto& br : w.branches) f += detail::block_fidelity(br.a0, br.a1);
    return 2.0 * std::sqrt(w.p0 * w.p1) * f;
}

// Holevo information I(X ; L, B), the branch register included in the output.
inline double channel_I(const HybridChannel& w) {
    double h_avg = 0.0, h_cond = 0.0;
    for (const auto& br : w.branches) {
        Matrix avg = w.p0 * br.a0 + w.p1 * br.a1;
        h_avg += detail::block_entropy(avg);
        h_cond += w.p0 * detail::block_entropy(br.a0) + w.p1 * detail::block_entropy(br.a1);
    }
    return h_avg - h_cond;
}

// ---------------------------------------------------------------------------
// Recursive synthesis. Channel i of blocklength N applies splits along the
// binary expansion of i-1, most significant bit first, 0 = minus, 1 = plus.

inline HybridChannel synthesize(const HybridChannel& w, std::size_t n, std::size_t i) {
    int levels = log2_exact(n);
    if (i < 1 || i > n) throw Error("synthesize: index out of range");
    HybridChannel cur = w;
    std::size_t path = i - 1;
    for (int b = levels - 1; b >= 0; --b)
        cur = ((path >> b) & 1) ? split_plus(cur) : split_minus(cur);
    return cur;
}

// Depth-first walk over all N synthesized channels in index order. Memory
// stays O(log N) channels; the visitor sees (i, W_N^(i)) with i in 1..N.
inline void for_each_synthesized(const HybridChannel& w, std::size_t n,
                                 const std::function<void(std::size_t, const HybridChannel&)>& fn) {
    log2_exact(n);
    std::function<void(const HybridChannel&, std::size_t, std::size_t)> walk =
        [&](const HybridChannel& node, std::size_t size, std::size_t first) {
            if (size == 1) {
                fn(first, node);
                return;
            }
            walk(split_minus(node), size / 2, first);
            walk(split_plus(node), size / 2, first + size / 2);
        };
    walk(w, n, 1);
}

} // namespace cqpolar
