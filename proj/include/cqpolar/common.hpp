#pragma once

#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

// Shared plumbing: error taxonomy, deterministic seed derivation, small
// numeric helpers used across the library.

namespace cqpolar {

// Base error for everything raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A matrix or ensemble failed validation (not Hermitian, trace off, ...).
class StateError : public Error {
public:
    explicit StateError(const std::string& what) : Error(what) {}
};

// A synthesis or search exceeded its configured budget. Carries how far we got.
class BudgetError : public Error {
public:
    BudgetError(const std::string& what, int depth_reached = -1)
        : Error(what), depth(depth_reached) {}
    int depth; // synthesis depth reached before the budget tripped, -1 if n/a
};

// A requested construction cannot exist (e.g. chaining sets don't fit).
class InfeasibleError : public Error {
public:
    InfeasibleError(const std::string& what, long deficit_ = 0)
        : Error(what), deficit(deficit_) {}
    long deficit; // how many indices / bits were missing
};

// Bad user-facing configuration (CLI maps this to its own exit code).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// ---------------------------------------------------------------------------
// Deterministic seed derivation. All randomness in the library flows from
// named 64-bit seeds through this mixer, so runs are reproducible and
// independent of thread scheduling.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derive a stream seed from a base seed and up to three stream coordinates
// (e.g. layer, block, trial). Chained mixing keeps coordinates independent.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(base ^ 0x243f6a8885a308d3ULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

// Uniform double in [0,1) from a derived seed, for randomized rounding that
// both encoder and decoders must reproduce bit-for-bit.
inline double seed_to_unit(std::uint64_t s) {
    return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
}

inline int seed_to_bit(std::uint64_t s) {
    return static_cast<int>(splitmix64(s) >> 63);
}

// ---------------------------------------------------------------------------
// Numeric helpers. Entropies are in bits throughout.

inline double xlog2x(double x) {
    // Treat tiny weights as zero mass; keeps entropy sums stable when
    // eigenvalues carry O(1e-16) solver noise.
    if (x <= 1e-14) return 0.0;
    return x * std::log2(x);
}

inline double binary_entropy(double p) {
    return -xlog2x(p) - xlog2x(1.0 - p);
}

// Shannon entropy of an unnormalized nonnegative weight vector (weights that
// are exactly a distribution give the usual entropy).
inline double shannon_entropy(const std::vector<double>& w) {
    double h = 0.0;
    for (double x : w) h -= xlog2x(x);
    return h;
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline int log2_exact(std::size_t n) {
    if (!is_power_of_two(n)) throw Error("length " + std::to_string(n) + " is not a power of two");
    int k = 0;
    while ((std::size_t{1} << k) < n) ++k;
    return k;
}

// FNV-1a over a byte string; used to stamp output files with a config hash.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace cqpolar
