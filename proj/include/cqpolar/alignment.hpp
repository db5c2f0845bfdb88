#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "cqpolar/polarized_sets.hpp"

// Set algebra of the chaining construction: the five working index sets, the
// block-chaining schedule that aligns them across k blocks, closed-form rate
// accounting, and the count model of recursive pairwise alignment.

namespace cqpolar {

struct SetBundle {
    std::size_t n = 0;
    IndexSet I_sup2; // superposition indices the second receiver decodes
    IndexSet I_v1;   // superposition indices the first receiver decodes
    IndexSet I_bin2; // second user's binning-layer information set
    IndexSet I_1;    // first user's information set
    IndexSet F_1;    // encoder-determined layer-1 indices the first receiver cannot decode

    void validate() const {
        for (const IndexSet* s : {&I_sup2, &I_v1, &I_bin2, &I_1, &F_1}) {
            if (s->n != n) throw StateError("set bundle blocklength mismatch");
            s->validate();
        }
    }
};

struct BundleOptions {
    // Second intersection member of I_bin2 / I_1: false conditions the low
    // set on the same layer as the high set (consistent with the rate
    // algebra), true keeps the superposition-layer conditioning as printed.
    bool literal_second_member = false;
};

inline SetBundle derive_set_bundle(const ProfileSet& ps, const Threshold& t,
                                   const BundleOptions& opt = {}) {
    std::size_t n = ps.v.n;
    for (const PolarizationProfile* p : {&ps.v, &ps.v_b1, &ps.v_b2, &ps.v1_v, &ps.v2_v,
                                         &ps.v1_v_b1, &ps.v2_v_b2, &ps.v1_v_v2}) {
        if (p->n != n) throw StateError("profiles in a set bundle must share n");
        p->validate();
    }
    SetBundle b;
    b.n = n;
    IndexSet hv = high_set(ps.v, t);
    b.I_sup2 = hv.intersect(low_set(ps.v_b2, t));
    b.I_v1 = hv.intersect(low_set(ps.v_b1, t));
    if (opt.literal_second_member) {
        b.I_bin2 = high_set(ps.v2_v, t).intersect(low_set(ps.v_b2, t));
        b.I_1 = high_set(ps.v1_v, t).intersect(low_set(ps.v_b1, t));
    } else {
        b.I_bin2 = high_set(ps.v2_v, t).intersect(low_set(ps.v2_v_b2, t));
        b.I_1 = high_set(ps.v1_v, t).intersect(low_set(ps.v1_v_b1, t));
    }
    b.F_1 = low_set(ps.v1_v_v2, t)
                .intersect(high_set(ps.v1_v, t))
                .intersect(high_set(ps.v1_v_b1, t));
    return b;
}

enum class Direction { forward, backward };

inline const char* direction_name(Direction d) {
    return d == Direction::forward ? "forward" : "backward";
}

struct ChainingSchedule {
    std::size_t k = 2;
    IndexSet B2;   // I_sup2 \ I_v1: carried again in the previous block's B1
    IndexSet B1;   // subset of I_1 repeating the next block's B2 content
    IndexSet Rbin; // subset of I_1 repeating the next block's F_1 content
    IndexSet F1;
    Direction encode_v = Direction::forward;
    Direction encode_v1 = Direction::backward;
    Direction encode_v2 = Direction::forward;
    Direction rx1_v = Direction::forward;
    Direction rx1_v1 = Direction::forward;
    Direction rx2_v = Direction::backward;
    Direction rx2_v2 = Direction::backward;

    void validate(const SetBundle& bundle) const {
        if (k < 2) throw StateError("chaining needs at least two blocks");
        if (B1.size() != B2.size()) throw StateError("|B1| must equal |B2|");
        if (Rbin.size() != F1.size()) throw StateError("|Rbin| must equal |F1|");
        if (!B1.intersect(Rbin).empty()) throw StateError("B1 and Rbin must be disjoint");
        if (B1.unite(Rbin).minus(bundle.I_1).size() != 0)
            throw StateError("B1 and Rbin must lie inside I_1");
    }
};

// B1/Rbin selection: lowest selection_z first (ties by index), restricted to
// `eligible` when provided (build_code passes the encoder-free positions so
// forcing repeated content there leaves the input distribution intact).
inline ChainingSchedule build_schedule(const SetBundle& bundle, std::size_t k,
                                       const IndexSet& eligible = {},
                                       const std::vector<double>& selection_z = {}) {
    bundle.validate();
    if (k < 2) throw ConfigError("block count must be at least 2");
    ChainingSchedule s;
    s.k = k;
    s.B2 = bundle.I_sup2.minus(bundle.I_v1);
    s.F1 = bundle.F_1;
    IndexSet pool = eligible.n == 0 ? bundle.I_1 : eligible.intersect(bundle.I_1);
    std::size_t need = s.B2.size() + s.F1.size();
    if (pool.size() < need)
        throw InfeasibleError("chaining needs " + std::to_string(need) +
                                  " repeat positions, only " + std::to_string(pool.size()) +
                                  " available in the first user's information set",
                              static_cast<long>(need - pool.size()));
    std::vector<std::size_t> order = pool.idx;
    if (!selection_z.empty()) {
        if (selection_z.size() != bundle.n)
            throw StateError("selection profile length must equal blocklength");
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (selection_z[a - 1] != selection_z[b - 1])
                return selection_z[a - 1] < selection_z[b - 1];
            return a < b;
        });
    }
    s.B1 = IndexSet(bundle.n, {order.begin(), order.begin() + s.B2.size()});
    s.Rbin = IndexSet(bundle.n,
                      {order.begin() + s.B2.size(), order.begin() + s.B2.size() + s.F1.size()});
    s.validate(bundle);
    return s;
}

struct RateAccounting {
    std::size_t n = 0, k = 0;
    double r1 = 0.0, r2 = 0.0;               // set-count formulas, block count ignored
    double r1_finite = 0.0, r2_finite = 0.0; // with the k-block edge correction
};

// R1 = (|I_1| - |B1| - |Rbin|)/n, R2 = (|I_sup2| + |I_bin2|)/n. The only edge
// cost at finite k is the first block's B2 positions, which carry shared
// randomness instead of message bits, so R2 loses |B2|/(nk); the last block's
// frozen B1/Rbin were never message positions.
inline RateAccounting rate_accounting(const SetBundle& bundle, const ChainingSchedule& schedule,
                                      std::size_t k, std::size_t n) {
    if (n != bundle.n) throw StateError("rate accounting blocklength mismatch");
    if (k != schedule.k) throw StateError("rate accounting block count mismatch");
    schedule.validate(bundle);
    RateAccounting r;
    r.n = n;
    r.k = k;
    double dn = static_cast<double>(n);
    r.r1 = (static_cast<double>(bundle.I_1.size()) - static_cast<double>(schedule.B1.size()) -
            static_cast<double>(schedule.Rbin.size())) /
           dn;
    r.r2 = (static_cast<double>(bundle.I_sup2.size()) + static_cast<double>(bundle.I_bin2.size())) /
           dn;
    r.r1_finite = r.r1;
    r.r2_finite = r.r2 - static_cast<double>(schedule.B2.size()) / (dn * static_cast<double>(k));
    return r;
}

// ---------------------------------------------------------------------------
// Generic pairwise alignment, count model. Two incompatible types (good for
// one user only); each round doubles the block and pairs opposite types
// across the copies, and a pair carries one bit both users decode, so both
// members leave the pool.

struct AlignmentRound {
    int round = 0;
    std::size_t originals = 1;        // original blocks per super-block (2^round)
    std::size_t type1 = 0, type2 = 0; // unpaired counts per super-block
    double per_original_block = 0.0;
};

inline std::vector<AlignmentRound> recursive_alignment(std::size_t type1, std::size_t type2,
                                                       int rounds) {
    if (rounds < 0) throw ConfigError("alignment round count must be nonnegative");
    std::vector<AlignmentRound> out;
    std::size_t a = type1, b = type2, blocks = 1;
    out.push_back({0, 1, a, b, static_cast<double>(a + b)});
    for (int j = 1; j <= rounds; ++j) {
        a *= 2;
        b *= 2;
        std::size_t m = std::min(a, b);
        a -= m;
        b -= m;
        blocks *= 2;
        out.push_back({j, blocks, a, b,
                       static_cast<double>(a + b) / static_cast<double>(blocks)});
    }
    return out;
}

} // namespace cqpolar
