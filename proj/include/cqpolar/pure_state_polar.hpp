#pragma once

#include <cstdint>
#include <vector>

#include "cqpolar/common.hpp"

// Exact polarization quantities for binary pure-state channels x -> |psi_x>
// under the uniform prior. The synthesized outputs are coset mixtures of
// product states whose Gram and cross-Gram matrices are group matrices over
// F_2^m, so a fast Walsh-Hadamard transform diagonalizes them: singular
// values and spectra come out of an O(m 2^m) pass instead of a density
// matrix of dimension 2^N. All 2^(i-1) prefix branches of channel i are
// pairwise equivalent (prefix shifts cancel in every inner-product
// difference), so one transform per index gives the exact branch average.
//
// Only the overlap s = |<psi_0|psi_1>| enters; a global phase rotation of
// |psi_1> makes it real without changing the channel.

namespace cqpolar {

namespace detail {

// Row u (1-based) of F^{tensor n} as a column bitmask: entry (u, x) is 1
// exactly when the bit pattern of x-1 is contained in that of u-1.
inline std::vector<std::uint64_t> kernel_power_rows(std::size_t n) {
    if (n > 64) throw Error("pure-state engine supports blocklength up to 64");
    std::vector<std::uint64_t> rows(n, 0);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t x = 0; x < n; ++x)
            if ((x & ~u) == 0) rows[u] |= std::uint64_t{1} << x;
    return rows;
}

// In-place unnormalized fast Walsh-Hadamard transform.
inline void walsh_hadamard(std::vector<double>& v) {
    for (std::size_t half = 1; half < v.size(); half <<= 1)
        for (std::size_t base = 0; base < v.size(); base += 2 * half)
            for (std::size_t j = base; j < base + half; ++j) {
                double a = v[j], b = v[j + half];
                v[j] = a + b;
                v[j + half] = a - b;
            }
}

// Table over z in F_2^m of s^{wt(offset xor z . rows)}, filled by Gray-code
// enumeration so each step costs one row xor and a popcount.
inline std::vector<double> coset_weight_table(double overlap, std::uint64_t offset,
                                              const std::uint64_t* rows, std::size_t m,
                                              std::size_t n, std::size_t max_table) {
    if (m >= 63 || (std::size_t{1} << m) > max_table)
        throw BudgetError("pure-state coset table of 2^" + std::to_string(m) +
                              " entries exceeds the table budget",
                          static_cast<int>(m));
    std::vector<double> pw(n + 1, 1.0);
    for (std::size_t k = 1; k <= n; ++k) pw[k] = pw[k - 1] * overlap;
    std::vector<double> h(std::size_t{1} << m);
    std::uint64_t cw = offset;
    h[0] = pw[static_cast<std::size_t>(__builtin_popcountll(cw))];
    for (std::size_t k = 1; k < h.size(); ++k) {
        cw ^= rows[__builtin_ctzll(k)];
        h[k ^ (k >> 1)] = pw[static_cast<std::size_t>(__builtin_popcountll(cw))];
    }
    return h;
}

} // namespace detail

struct PureStateProfile {
    std::vector<double> z;    // Z(U_i | U^{i-1}, B^N), exact
    std::vector<double> info; // I(U_i ; U^{i-1}, B^N), exact, bits
};

// Exact Z of synthesized channel i (1-based) at blocklength n for overlap s.
// The cross-Gram between the two coset ensembles has entries
// s^{wt(g_i xor (v xor w) G_fut)} / 2^m with G_fut the rows below i, so its
// nuclear norm is the mean absolute Walsh spectrum of one coset row.
inline double pure_state_z(double overlap, std::size_t n, std::size_t i,
                           std::size_t max_table = std::size_t{1} << 22) {
    log2_exact(n);
    if (i < 1 || i > n) throw Error("pure_state_z: index out of range");
    if (overlap < 0.0 || overlap > 1.0) throw Error("overlap must lie in [0, 1]");
    auto rows = detail::kernel_power_rows(n);
    std::size_t m = n - i;
    auto h = detail::coset_weight_table(overlap, rows[i - 1], rows.data() + i, m, n, max_table);
    detail::walsh_hadamard(h);
    double acc = 0.0;
    for (double v : h) acc += std::abs(v);
    return acc / static_cast<double>(h.size());
}

namespace detail {

inline double spectrum_entropy(std::vector<double>& table) {
    walsh_hadamard(table);
    double h = 0.0, scale = 1.0 / static_cast<double>(table.size());
    for (double v : table) h -= xlog2x(std::max(v * scale, 0.0));
    return h;
}

} // namespace detail

// Exact Holevo information of synthesized channel i. Both the per-input and
// the input-averaged output states are coset mixtures; their spectra are the
// Walsh spectra of the future-row and row-i-extended weight tables.
inline double pure_state_info(double overlap, std::size_t n, std::size_t i,
                              std::size_t max_table = std::size_t{1} << 22) {
    log2_exact(n);
    if (i < 1 || i > n) throw Error("pure_state_info: index out of range");
    auto rows = detail::kernel_power_rows(n);
    std::size_t m = n - i;
    // joint table ranges over (u_i, future): rows i..n of the kernel power
    auto joint = detail::coset_weight_table(overlap, 0, rows.data() + (i - 1), m + 1, n,
                                            2 * max_table);
    auto single = detail::coset_weight_table(overlap, 0, rows.data() + i, m, n, max_table);
    return detail::spectrum_entropy(joint) - detail::spectrum_entropy(single);
}

inline PureStateProfile pure_state_profile(double overlap, std::size_t n,
                                           std::size_t max_table = std::size_t{1} << 22) {
    PureStateProfile p;
    p.z.reserve(n);
    p.info.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        p.z.push_back(pure_state_z(overlap, n, i, max_table));
        p.info.push_back(pure_state_info(overlap, n, i, max_table));
    }
    return p;
}

} // namespace cqpolar
