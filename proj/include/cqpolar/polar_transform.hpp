#pragma once

#include <cstdint>
#include <vector>

#include "cqpolar/common.hpp"

// The polar transform G_N = B_N F^{(x)n} over GF(2), F = [[1,0],[1,1]],
// B_N the bit-reversal permutation. Everything is zero-based internally;
// report formats convert to one-based at the edge.

namespace cqpolar {

using BitVector = std::vector<std::uint8_t>;

// perm[i] = bit-reversal of i within log2(N) bits. An involution.
inline std::vector<std::size_t> bit_reversal_permutation(std::size_t n) {
    int bits = log2_exact(n);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0, v = i;
        for (int b = 0; b < bits; ++b) {
            r = (r << 1) | (v & 1);
            v >>= 1;
        }
        perm[i] = r;
    }
    return perm;
}

namespace detail {

// In-place F^{(x)n} butterfly on a row vector: x_j = XOR of u_i over i
// covering j. O(N log N).
inline void kernel_butterfly(BitVector& v) {
    std::size_t n = v.size();
    for (std::size_t half = 1; half < n; half <<= 1)
        for (std::size_t base = 0; base < n; base += 2 * half)
            for (std::size_t j = 0; j < half; ++j)
                v[base + j] ^= v[base + j + half];
}

} // namespace detail

// x = u G_N. Butterfly then bit-reversal reorder (the two commute with the
// opposite grouping, so this equals B_N-first as well).
inline BitVector polar_encode(const BitVector& u) {
    std::size_t n = u.size();
    if (!is_power_of_two(n)) throw Error("polar_encode: length must be a power of two");
    BitVector t = u;
    detail::kernel_butterfly(t);
    auto perm = bit_reversal_permutation(n);
    BitVector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = t[perm[i]];
    return x;
}

// G_N is an involution over GF(2), so the inverse transform is the transform.
inline BitVector polar_decode_inverse(const BitVector& x) { return polar_encode(x); }

} // namespace cqpolar
