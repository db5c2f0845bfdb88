#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "cqpolar/polar_transform.hpp"

// Successive-cancellation engine over the halves recursion of the kernel
// power. Leaf tables are unnormalized weights t[j][x] = prior(x) * W(y_j | x)
// in physical transmit order; the engine handles the bit-reversal wiring of
// polar_encode internally. Several tracks (channel posterior, source
// regeneration, genie side information) can run in lockstep: each position's
// committed bit, chosen by the visitor from all tracks' posteriors, feeds
// every track's later combines. Posteriors are exact for any iid input prior
// baked into the leaf tables, not just the uniform one.

namespace cqpolar {

using LeafTable = std::array<double, 2>;

// index is 1-based to match channel/profile indexing everywhere else
using ScVisitor = std::function<std::uint8_t(std::size_t, double, double)>;
using MultiScVisitor = std::function<std::uint8_t(std::size_t, const std::vector<LeafTable>&)>;

namespace sc {

inline LeafTable normalized(const LeafTable& t) {
    double s = t[0] + t[1];
    if (!(s > 0.0)) return {0.5, 0.5}; // dead branch, keep the pass alive
    return {t[0] / s, t[1] / s};
}

inline std::uint8_t map_decision(double q0, double q1) { return q1 > q0 ? 1 : 0; }

inline std::uint8_t sampled_bit(std::uint64_t seed, std::size_t i, double q1) {
    return seed_to_unit(derive_seed(seed, i)) < q1 ? 1 : 0;
}

} // namespace sc

class ScEngine {
public:
    explicit ScEngine(std::size_t block) : n_(block) {
        if (!is_power_of_two(block) || block == 0)
            throw StateError("block length must be a positive power of two");
        levels_ = log2_exact(block);
        perm_ = bit_reversal_permutation(block);
        u_.assign(n_, 0);
        x_.assign(n_, 0);
    }

    std::size_t block() const { return n_; }

    // physical[k][j] is track k's table for transmit position j (0-based).
    // Returns the committed bits u_1..u_N in commitment order.
    BitVector run_multi(const std::vector<std::vector<LeafTable>>& physical,
                        const MultiScVisitor& visitor) {
        std::size_t tracks = physical.size();
        if (tracks == 0) throw StateError("need at least one track");
        for (const auto& p : physical)
            if (p.size() != n_) throw StateError("leaf table count must equal block length");
        ensure_buffers(tracks);
        for (std::size_t k = 0; k < tracks; ++k)
            for (std::size_t j = 0; j < n_; ++j) top_[k][j] = physical[k][perm_[j]];
        counter_ = 0;
        post_.assign(tracks, {0.5, 0.5});
        std::vector<const LeafTable*> cur(tracks);
        for (std::size_t k = 0; k < tracks; ++k) cur[k] = top_[k].data();
        process(0, cur, x_.data(), visitor);
        return u_;
    }

    BitVector run(const std::vector<LeafTable>& physical, const ScVisitor& visitor) {
        std::vector<std::vector<LeafTable>> one{physical};
        return run_multi(one, [&](std::size_t i, const std::vector<LeafTable>& post) {
            return visitor(i, post[0][0], post[0][1]);
        });
    }

    const BitVector& input() const { return u_; }

    BitVector codeword() const {
        BitVector x(n_);
        for (std::size_t i = 0; i < n_; ++i) x[i] = x_[perm_[i]];
        return x;
    }

private:
    std::size_t n_, levels_, counter_ = 0;
    std::vector<std::size_t> perm_;
    BitVector u_, x_; // x_ kept in engine order until codeword() permutes
    std::vector<std::vector<LeafTable>> top_;
    std::vector<std::vector<std::vector<LeafTable>>> buf_; // [track][depth][pos]
    std::vector<LeafTable> post_;

    void ensure_buffers(std::size_t tracks) {
        if (top_.size() == tracks) return;
        top_.assign(tracks, std::vector<LeafTable>(n_));
        buf_.assign(tracks, {});
        for (auto& levels : buf_) {
            levels.resize(levels_);
            for (std::size_t d = 0; d < levels_; ++d) levels[d].resize(n_ >> (d + 1));
        }
    }

    void process(std::size_t depth, std::vector<const LeafTable*>& cur, std::uint8_t* xseg,
                 const MultiScVisitor& visitor) {
        std::size_t size = n_ >> depth;
        std::size_t tracks = cur.size();
        if (size == 1) {
            for (std::size_t k = 0; k < tracks; ++k) post_[k] = sc::normalized(cur[k][0]);
            std::uint8_t b = visitor(counter_ + 1, post_) & 1u;
            u_[counter_++] = b;
            xseg[0] = b;
            return;
        }
        std::size_t h = size / 2;
        std::vector<const LeafTable*> child(tracks);
        for (std::size_t k = 0; k < tracks; ++k) {
            const LeafTable* t = cur[k];
            LeafTable* c = buf_[k][depth].data();
            for (std::size_t j = 0; j < h; ++j)
                c[j] = sc::normalized({t[j][0] * t[j + h][0] + t[j][1] * t[j + h][1],
                                       t[j][0] * t[j + h][1] + t[j][1] * t[j + h][0]});
            child[k] = c;
        }
        process(depth + 1, child, xseg, visitor);
        for (std::size_t k = 0; k < tracks; ++k) {
            const LeafTable* t = cur[k];
            LeafTable* c = buf_[k][depth].data();
            for (std::size_t j = 0; j < h; ++j) {
                std::uint8_t a = xseg[j];
                c[j] = sc::normalized({t[j][a] * t[j + h][0], t[j][a ^ 1] * t[j + h][1]});
            }
            child[k] = c;
        }
        process(depth + 1, child, xseg + h, visitor);
        for (std::size_t j = 0; j < h; ++j) xseg[j] ^= xseg[j + h];
    }
};

} // namespace cqpolar
