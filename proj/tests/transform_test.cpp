#include <gtest/gtest.h>

#include "cqpolar/cqpolar.hpp"

using namespace cqpolar;

namespace {

// Dense GF(2) reference: G = F^{(x)n} with output columns bit-reversed,
// built by iterated Kronecker products rather than any bit trickery.
struct DenseTransform {
    std::size_t n;
    std::vector<std::vector<std::uint8_t>> m; // m[row][col]

    explicit DenseTransform(std::size_t n_) : n(n_) {
        m = {{1}};
        const std::uint8_t f[2][2] = {{1, 0}, {1, 1}};
        std::size_t size = 1;
        while (size < n) {
            std::vector<std::vector<std::uint8_t>> next(2 * size,
                                                        std::vector<std::uint8_t>(2 * size, 0));
            for (std::size_t i = 0; i < 2 * size; ++i)
                for (std::size_t j = 0; j < 2 * size; ++j)
                    next[i][j] = f[i / size][j / size] & m[i % size][j % size];
            m = std::move(next);
            size *= 2;
        }
    }

    BitVector apply(const BitVector& u) const {
        auto perm = bit_reversal_permutation(n);
        BitVector t(n, 0), x(n);
        for (std::size_t c = 0; c < n; ++c)
            for (std::size_t r = 0; r < n; ++r) t[c] ^= u[r] & m[r][c];
        for (std::size_t j = 0; j < n; ++j) x[j] = t[perm[j]];
        return x;
    }
};

BitVector random_bits(std::size_t n, std::uint64_t seed) {
    BitVector v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = seed_to_bit(derive_seed(seed, j)) ? 1 : 0;
    return v;
}

} // namespace

TEST(PolarTransform, MatchesDenseKroneckerOracle) {
    for (std::size_t n : {1u, 2u, 4u, 8u}) {
        DenseTransform dense(n);
        for (std::size_t word = 0; word < (std::size_t{1} << n); ++word) {
            BitVector u(n);
            for (std::size_t j = 0; j < n; ++j) u[j] = (word >> j) & 1;
            EXPECT_EQ(polar_encode(u), dense.apply(u)) << "n=" << n << " word=" << word;
        }
    }
}

TEST(PolarTransform, InvolutionExhaustiveSmallBlocks) {
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u}) {
        for (std::size_t word = 0; word < (std::size_t{1} << n); ++word) {
            BitVector u(n);
            for (std::size_t j = 0; j < n; ++j) u[j] = (word >> j) & 1;
            ASSERT_EQ(polar_encode(polar_encode(u)), u) << "n=" << n << " word=" << word;
        }
    }
}

TEST(PolarTransform, InvolutionRandomLargeBlock) {
    const std::size_t n = std::size_t{1} << 16;
    for (int t = 0; t < 50; ++t) {
        BitVector u = random_bits(n, 0x9000 + t);
        ASSERT_EQ(polar_encode(polar_encode(u)), u) << "trial " << t;
    }
}

TEST(PolarTransform, Linearity) {
    const std::size_t n = 64;
    for (int t = 0; t < 20; ++t) {
        BitVector a = random_bits(n, 0xa000 + t);
        BitVector b = random_bits(n, 0xb000 + t);
        BitVector s(n);
        for (std::size_t j = 0; j < n; ++j) s[j] = a[j] ^ b[j];
        BitVector ea = polar_encode(a), eb = polar_encode(b), es = polar_encode(s);
        for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(es[j], ea[j] ^ eb[j]);
    }
}

TEST(PolarTransform, BitReversalPermutation) {
    auto perm = bit_reversal_permutation(8);
    std::vector<std::size_t> expect = {0, 4, 2, 6, 1, 5, 3, 7};
    EXPECT_EQ(perm, expect);
    for (std::size_t n : {2u, 16u, 64u}) {
        auto p = bit_reversal_permutation(n);
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(p[p[i]], i);
    }
}

TEST(PolarTransform, RejectsNonPowerOfTwo) {
    EXPECT_THROW(polar_encode(BitVector(3)), Error);
    EXPECT_THROW(polar_encode(BitVector(0)), Error);
    EXPECT_THROW(bit_reversal_permutation(12), Error);
}

TEST(PolarTransform, DecodeInverseIsEncode) {
    BitVector u = random_bits(32, 0xc0de);
    EXPECT_EQ(polar_decode_inverse(polar_encode(u)), u);
}
