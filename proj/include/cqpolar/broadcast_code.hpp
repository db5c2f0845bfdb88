#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cqpolar/alignment.hpp"
#include "cqpolar/polar_transform.hpp"

// The full three-layer broadcast code: role assignment per polar index,
// chained encoding across k blocks, the two successive-cancellation
// receivers, the analytic error bound, and common-message allocation.
//
// Position roles per layer:
//   message        information positions carrying payload bits
//   chained        B1/Rbin positions repeating the next block's B2/F_1
//                  content (frozen to shared randomness in the last block)
//   sampled        low-entropy positions drawn from the exact SC conditional
//                  with shared randomness; receivers that know the
//                  conditioning regenerate them, receiver 1 decides the
//                  layer-1 ones it cannot regenerate
//   shared_random  high-entropy non-message positions and unpolarized
//                  overhead, filled from the shared seed
//
// Within a block every layer is processed in natural index order; blocks are
// chained so that B1 of block j repeats B2 of block j+1 and Rbin of block j
// repeats F_1 of block j+1. Encoding runs the first user's layer backward
// over blocks, so the repeated content already exists when it is copied.
// The first block freezes B2/F_1 to shared randomness, the last freezes
// B1/Rbin.

namespace cqpolar {

enum class PositionRole : std::uint8_t { message, chained, shared_random, sampled };

inline const char* role_name(PositionRole r) {
    switch (r) {
    case PositionRole::message: return "message";
    case PositionRole::chained: return "chained";
    case PositionRole::shared_random: return "shared-random";
    default: return "sampled";
    }
}

struct CodeOptions {
    Threshold thresholds{};
    std::size_t k = 2;
    std::uint64_t shared_seed = 0x8aa5f3c627bd914eULL;
    bool force_swap = false;           // swap receivers even when not required
    bool literal_second_member = false; // see BundleOptions
    double message_fraction = 1.0;     // keep this fraction of each message set
    ProfileOptions profile{};
};

struct BroadcastPolarCode {
    std::size_t n = 0, k = 2;
    bool swapped = false; // internal receiver 1 is the caller's receiver 2
    std::uint64_t shared_seed = 0;
    double message_fraction = 1.0;
    BroadcastChannelSpec spec; // internal orientation
    AuxiliaryStructure aux;
    Threshold thresholds;
    ProfileSet profiles;
    SetBundle bundle;
    ChainingSchedule schedule;

    std::array<std::vector<PositionRole>, 3> role;   // [layer][i-1], layers v, v1, v2
    std::array<std::size_t, 3> overhead = {0, 0, 0}; // unpolarized positions per layer

    // message position lists, sorted 1-based; the *_first lists are the first
    // block's active subsets (B2 members are frozen there)
    std::vector<std::size_t> sup_msg, sup_msg_first;   // layer 0, second user
    std::vector<std::size_t> common_pos, common_first; // layer 0, common message
    std::vector<std::size_t> msg1;                     // layer 1
    std::vector<std::size_t> msg2bin;                  // layer 2

    std::size_t m1_bits() const { return k * msg1.size(); }
    std::size_t m2_bits() const {
        return sup_msg_first.size() + (k - 1) * sup_msg.size() + k * msg2bin.size();
    }
    std::size_t m0_bits() const { return common_first.size() + (k - 1) * common_pos.size(); }

    // operational rates actually carried by message bits
    double rate1() const { return static_cast<double>(msg1.size()) / static_cast<double>(n); }
    double rate2() const {
        return static_cast<double>(m2_bits()) / static_cast<double>(k * n);
    }
    double rate0() const {
        return static_cast<double>(m0_bits()) / static_cast<double>(k * n);
    }

    RateAccounting accounting() const { return rate_accounting(bundle, schedule, k, n); }

    std::array<std::array<std::size_t, 4>, 3> role_counts() const {
        std::array<std::array<std::size_t, 4>, 3> c{};
        for (int l = 0; l < 3; ++l)
            for (auto r : role[l]) ++c[l][static_cast<std::size_t>(r)];
        return c;
    }
};

namespace detail {

// keep floor(fraction * |pool|) positions with the smallest z, ties by index
inline std::vector<std::size_t> keep_fraction(const IndexSet& pool, const std::vector<double>& z,
                                              double fraction) {
    std::vector<std::size_t> order = pool.idx;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (z[a - 1] != z[b - 1]) return z[a - 1] < z[b - 1];
        return a < b;
    });
    auto keep = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(order.size()) + 1e-9));
    keep = std::min(keep, order.size());
    order.resize(keep);
    std::sort(order.begin(), order.end());
    return order;
}

inline std::vector<std::size_t> without(const std::vector<std::size_t>& list, const IndexSet& cut) {
    std::vector<std::size_t> out;
    out.reserve(list.size());
    for (auto i : list)
        if (!cut.contains(i)) out.push_back(i);
    return out;
}

// rank lookup over a sorted list when queried with ascending indices
struct RankCursor {
    const std::vector<std::size_t>* v = nullptr;
    std::size_t pos = 0;
    void reset(const std::vector<std::size_t>& vec) {
        v = &vec;
        pos = 0;
    }
    std::optional<std::size_t> match(std::size_t i) {
        while (v && pos < v->size() && (*v)[pos] < i) ++pos;
        if (v && pos < v->size() && (*v)[pos] == i) return pos;
        return std::nullopt;
    }
};

// stream offsets, block-major
inline std::size_t sup_base(const BroadcastPolarCode& c, std::size_t bn) {
    return bn == 1 ? 0 : c.sup_msg_first.size() + (bn - 2) * c.sup_msg.size();
}
inline std::size_t common_base(const BroadcastPolarCode& c, std::size_t bn) {
    return bn == 1 ? 0 : c.common_first.size() + (bn - 2) * c.common_pos.size();
}
inline std::size_t bin_base(const BroadcastPolarCode& c, std::size_t bn) {
    return c.sup_msg_first.size() + (c.k - 1) * c.sup_msg.size() + (bn - 1) * c.msg2bin.size();
}
inline std::size_t m1_base(const BroadcastPolarCode& c, std::size_t bn) {
    return (bn - 1) * c.msg1.size();
}

inline std::uint8_t srand_bit(const BroadcastPolarCode& c, int layer, std::size_t bn,
                              std::size_t i) {
    return seed_to_bit(derive_seed(c.shared_seed, 1 + static_cast<std::uint64_t>(layer), bn, i))
               ? 1
               : 0;
}
inline std::uint64_t sample_seed(const BroadcastPolarCode& c, int layer, std::size_t bn) {
    return derive_seed(c.shared_seed, 11 + static_cast<std::uint64_t>(layer), bn);
}

// p(y | v) of one receiver's marginal, averaged over (v1, v2) | v
inline std::array<std::vector<double>, 2> layer0_likelihood(const BroadcastChannelSpec& spec,
                                                            const AuxiliaryStructure& aux,
                                                            int receiver) {
    ClassicalChannelTable t = spec.marginal_table(receiver);
    std::size_t m = t.alphabet();
    std::array<std::vector<double>, 2> out = {std::vector<double>(m, 0.0),
                                              std::vector<double>(m, 0.0)};
    for (int v = 0; v < 2; ++v) {
        double pv = v ? aux.p_v : 1.0 - aux.p_v;
        if (pv <= 0.0) {
            std::fill(out[v].begin(), out[v].end(), 1.0 / static_cast<double>(m));
            continue;
        }
        for (int v1 = 0; v1 < 2; ++v1)
            for (int v2 = 0; v2 < 2; ++v2) {
                double pj = aux.joint(v, v1, v2);
                if (pj <= 0.0) continue;
                const auto& row = aux.x_of(v, v1, v2) ? t.row1 : t.row0;
                for (std::size_t y = 0; y < m; ++y) out[v][y] += pj / pv * row[y];
            }
    }
    return out;
}

// P(v1, y1 | v) for receiver 1's private layer
inline std::array<std::array<std::vector<double>, 2>, 2>
layer1_posterior_table(const BroadcastChannelSpec& spec, const AuxiliaryStructure& aux) {
    ClassicalChannelTable t = spec.marginal_table(1);
    std::size_t m = t.alphabet();
    std::array<std::array<std::vector<double>, 2>, 2> out;
    for (int v = 0; v < 2; ++v)
        for (int v1 = 0; v1 < 2; ++v1) out[v][v1].assign(m, 0.0);
    for (int v = 0; v < 2; ++v)
        for (int v1 = 0; v1 < 2; ++v1)
            for (int v2 = 0; v2 < 2; ++v2) {
                double q2 = v2 ? aux.p_v2_given_v[v] : 1.0 - aux.p_v2_given_v[v];
                double q1 = v1 ? aux.p_v1_given_vv2[v][v2] : 1.0 - aux.p_v1_given_vv2[v][v2];
                if (q2 * q1 <= 0.0) continue;
                const auto& row = aux.x_of(v, v1, v2) ? t.row1 : t.row0;
                for (std::size_t y = 0; y < m; ++y) out[v][v1][y] += q2 * q1 * row[y];
            }
    return out;
}

// P(v2, y2 | v) for receiver 2's private layer
inline std::array<std::array<std::vector<double>, 2>, 2>
layer2_posterior_table(const BroadcastChannelSpec& spec, const AuxiliaryStructure& aux) {
    ClassicalChannelTable t = spec.marginal_table(2);
    std::size_t m = t.alphabet();
    std::array<std::array<std::vector<double>, 2>, 2> out;
    for (int v = 0; v < 2; ++v)
        for (int v2 = 0; v2 < 2; ++v2) out[v][v2].assign(m, 0.0);
    for (int v = 0; v < 2; ++v)
        for (int v2 = 0; v2 < 2; ++v2) {
            double q2 = v2 ? aux.p_v2_given_v[v] : 1.0 - aux.p_v2_given_v[v];
            for (int v1 = 0; v1 < 2; ++v1) {
                double q1 = v1 ? aux.p_v1_given_vv2[v][v2] : 1.0 - aux.p_v1_given_vv2[v][v2];
                if (q2 * q1 <= 0.0) continue;
                const auto& row = aux.x_of(v, v1, v2) ? t.row1 : t.row0;
                for (std::size_t y = 0; y < m; ++y) out[v][v2][y] += q2 * q1 * row[y];
            }
        }
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Construction.

inline BroadcastPolarCode build_code(const BroadcastChannelSpec& spec_in,
                                     const AuxiliaryStructure& aux_in, std::size_t n,
                                     const CodeOptions& opt = {}) {
    spec_in.validate();
    aux_in.validate();
    opt.thresholds.validate();
    log2_exact(n);
    if (opt.k < 2) throw ConfigError("block count must be at least 2");
    if (!(opt.message_fraction > 0.0 && opt.message_fraction <= 1.0))
        throw ConfigError("message fraction must lie in (0,1]");

    // the construction assumes receiver 2 is the stronger one for the
    // superposition layer; otherwise swap and record the relabeling
    double iv_b1 = channel_I(
        induced_cq_channel(spec_in, aux_in, LayerId::v, {false, false, 1}, opt.profile.budget));
    double iv_b2 = channel_I(
        induced_cq_channel(spec_in, aux_in, LayerId::v, {false, false, 2}, opt.profile.budget));
    bool swap = opt.force_swap || iv_b1 > iv_b2 + 1e-12;

    BroadcastPolarCode code;
    code.n = n;
    code.k = opt.k;
    code.swapped = swap;
    code.shared_seed = opt.shared_seed;
    code.message_fraction = opt.message_fraction;
    code.thresholds = opt.thresholds;
    code.spec = swap ? spec_in.swap_receivers() : spec_in;
    code.aux = swap ? aux_in.swap_receivers() : aux_in;
    code.profiles = compute_profile_set(code.spec, code.aux, n, opt.profile);
    code.bundle = derive_set_bundle(code.profiles, opt.thresholds,
                                    BundleOptions{opt.literal_second_member});

    // repeat positions must be encoder-free, so restrict the pool to the
    // layer-1 positions that are high-entropy given (V, V2)
    IndexSet enc_high = high_set(code.profiles.v1_v_v2, opt.thresholds);
    IndexSet eligible = code.bundle.I_1.intersect(enc_high);
    code.schedule = build_schedule(code.bundle, opt.k, eligible, code.profiles.v1_v_b1.z);

    // message sets, trimmed to the requested fraction (smallest Z first)
    code.sup_msg =
        detail::keep_fraction(code.bundle.I_sup2, code.profiles.v_b2.z, opt.message_fraction);
    IndexSet chained1 = code.schedule.B1.unite(code.schedule.Rbin);
    code.msg1 = detail::keep_fraction(eligible.minus(chained1), code.profiles.v1_v_b1.z,
                                      opt.message_fraction);
    code.msg2bin =
        detail::keep_fraction(code.bundle.I_bin2, code.profiles.v2_v_b2.z, opt.message_fraction);
    code.sup_msg_first = detail::without(code.sup_msg, code.schedule.B2);
    code.common_first.clear();

    // role maps; sampled before message so a threshold tie resolves to message
    IndexSet low_v = low_set(code.profiles.v, opt.thresholds);
    IndexSet low_enc1 = low_set(code.profiles.v1_v_v2, opt.thresholds);
    IndexSet low_2 = low_set(code.profiles.v2_v, opt.thresholds);
    for (int l = 0; l < 3; ++l) code.role[l].assign(n, PositionRole::shared_random);
    for (auto i : low_v.idx) code.role[0][i - 1] = PositionRole::sampled;
    for (auto i : code.sup_msg) code.role[0][i - 1] = PositionRole::message;
    for (auto i : low_enc1.idx) code.role[1][i - 1] = PositionRole::sampled;
    for (auto i : code.msg1) code.role[1][i - 1] = PositionRole::message;
    for (auto i : chained1.idx) code.role[1][i - 1] = PositionRole::chained;
    for (auto i : low_2.idx) code.role[2][i - 1] = PositionRole::sampled;
    for (auto i : code.msg2bin) code.role[2][i - 1] = PositionRole::message;

    code.overhead[0] = unpolarized_set(code.profiles.v, opt.thresholds).size();
    code.overhead[1] = unpolarized_set(code.profiles.v1_v_v2, opt.thresholds).size();
    code.overhead[2] = unpolarized_set(code.profiles.v2_v, opt.thresholds).size();
    return code;
}

// Move superposition message positions into the common message, most reliable
// for receiver 2 first. Bit counts move with the positions, so the total of
// common plus second-user superposition bits is conserved.
inline void allocate_common(BroadcastPolarCode& code, std::size_t positions) {
    std::size_t cap = code.sup_msg.size();
    if (positions > cap)
        throw InfeasibleError("common allocation of " + std::to_string(positions) +
                                  " positions per block exceeds the " + std::to_string(cap) +
                                  " available superposition message positions",
                              static_cast<long>(positions - cap));
    std::vector<std::size_t> order = code.sup_msg;
    const auto& z = code.profiles.v_b2.z;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (z[a - 1] != z[b - 1]) return z[a - 1] < z[b - 1];
        return a < b;
    });
    order.resize(positions);
    std::sort(order.begin(), order.end());
    std::vector<std::size_t> merged = code.common_pos;
    merged.insert(merged.end(), order.begin(), order.end());
    std::sort(merged.begin(), merged.end());
    code.common_pos = merged;
    std::vector<std::size_t> rest;
    rest.reserve(code.sup_msg.size() - positions);
    std::set_difference(code.sup_msg.begin(), code.sup_msg.end(), order.begin(), order.end(),
                        std::back_inserter(rest));
    code.sup_msg = rest;
    code.sup_msg_first = detail::without(code.sup_msg, code.schedule.B2);
    code.common_first = detail::without(code.common_pos, code.schedule.B2);
}

// ---------------------------------------------------------------------------
// Encoding.

struct EncodeResult {
    std::vector<BitVector> u0, u1, u2; // committed layer bits per block, natural order
    std::vector<BitVector> v0, v1, v2; // physical layer symbols per block
    BitVector x;                       // k*n channel inputs, block-major
};

inline EncodeResult encode(const BroadcastPolarCode& code, const BitVector& m1,
                           const BitVector& m2, const BitVector& m0 = {}) {
    if (m1.size() != code.m1_bits()) throw ConfigError("first user's message length mismatch");
    if (m2.size() != code.m2_bits()) throw ConfigError("second user's message length mismatch");
    BitVector m0v = m0;
    if (m0v.empty()) m0v.assign(code.m0_bits(), 0);
    if (m0v.size() != code.m0_bits()) throw ConfigError("common message length mismatch");

    std::size_t n = code.n, k = code.k;
    EncodeResult enc;
    enc.u0.resize(k);
    enc.u1.resize(k);
    enc.u2.resize(k);
    enc.v0.resize(k);
    enc.v1.resize(k);
    enc.v2.resize(k);
    ScEngine engine(n);
    const auto& aux = code.aux;

    // superposition layer, blocks forward
    std::vector<LeafTable> leaves(n, LeafTable{1.0 - aux.p_v, aux.p_v});
    for (std::size_t bn = 1; bn <= k; ++bn) {
        std::size_t b = bn - 1;
        detail::RankCursor cur_sup, cur_common;
        cur_sup.reset(bn == 1 ? code.sup_msg_first : code.sup_msg);
        cur_common.reset(bn == 1 ? code.common_first : code.common_pos);
        std::uint64_t sseed = detail::sample_seed(code, 0, bn);
        enc.u0[b] = engine.run(leaves, [&](std::size_t i, double, double q1) -> std::uint8_t {
            switch (code.role[0][i - 1]) {
            case PositionRole::message:
                if (bn == 1 && code.schedule.B2.contains(i))
                    return detail::srand_bit(code, 0, bn, i);
                if (auto r = cur_common.match(i)) return m0v[detail::common_base(code, bn) + *r];
                if (auto r = cur_sup.match(i)) return m2[detail::sup_base(code, bn) + *r];
                throw StateError("message position missing from its stream list");
            case PositionRole::sampled: return sc::sampled_bit(sseed, i, q1) ? 1 : 0;
            default: return detail::srand_bit(code, 0, bn, i);
            }
        });
        enc.v0[b] = engine.codeword();
    }

    // second user's layer, blocks forward
    for (std::size_t bn = 1; bn <= k; ++bn) {
        std::size_t b = bn - 1;
        for (std::size_t j = 0; j < n; ++j) {
            double q = aux.p_v2_given_v[enc.v0[b][j]];
            leaves[j] = {1.0 - q, q};
        }
        detail::RankCursor cur_bin;
        cur_bin.reset(code.msg2bin);
        std::uint64_t sseed = detail::sample_seed(code, 2, bn);
        enc.u2[b] = engine.run(leaves, [&](std::size_t i, double, double q1) -> std::uint8_t {
            switch (code.role[2][i - 1]) {
            case PositionRole::message: {
                auto r = cur_bin.match(i);
                if (!r) throw StateError("message position missing from its stream list");
                return m2[detail::bin_base(code, bn) + *r];
            }
            case PositionRole::sampled: return sc::sampled_bit(sseed, i, q1) ? 1 : 0;
            default: return detail::srand_bit(code, 2, bn, i);
            }
        });
        enc.v2[b] = engine.codeword();
    }

    // first user's layer, blocks backward so repeated content already exists
    for (std::size_t bn = k; bn >= 1; --bn) {
        std::size_t b = bn - 1;
        for (std::size_t j = 0; j < n; ++j) {
            double q = aux.p_v1_given_vv2[enc.v0[b][j]][enc.v2[b][j]];
            leaves[j] = {1.0 - q, q};
        }
        detail::RankCursor cur_msg, cur_b1, cur_rbin;
        cur_msg.reset(code.msg1);
        cur_b1.reset(code.schedule.B1.idx);
        cur_rbin.reset(code.schedule.Rbin.idx);
        std::uint64_t sseed = detail::sample_seed(code, 1, bn);
        enc.u1[b] = engine.run(leaves, [&](std::size_t i, double, double q1) -> std::uint8_t {
            switch (code.role[1][i - 1]) {
            case PositionRole::message: {
                auto r = cur_msg.match(i);
                if (!r) throw StateError("message position missing from its stream list");
                return m1[detail::m1_base(code, bn) + *r];
            }
            case PositionRole::chained: {
                if (bn == k) return detail::srand_bit(code, 1, bn, i);
                if (auto r = cur_b1.match(i)) return enc.u0[b + 1][code.schedule.B2.idx[*r] - 1];
                if (auto r = cur_rbin.match(i)) return enc.u1[b + 1][code.schedule.F1.idx[*r] - 1];
                throw StateError("chained position missing from B1 and Rbin");
            }
            case PositionRole::sampled:
                if (bn == 1 && code.schedule.F1.contains(i))
                    return detail::srand_bit(code, 1, bn, i);
                return sc::sampled_bit(sseed, i, q1) ? 1 : 0;
            default: return detail::srand_bit(code, 1, bn, i);
            }
        });
        enc.v1[b] = engine.codeword();
        if (bn == 1) break;
    }

    enc.x.resize(k * n);
    for (std::size_t b = 0; b < k; ++b)
        for (std::size_t j = 0; j < n; ++j)
            enc.x[b * n + j] = aux.x_of(enc.v0[b][j], enc.v1[b][j], enc.v2[b][j]);
    return enc;
}

// ---------------------------------------------------------------------------
// Transmission over the classical joint table.

struct ChannelOutputs {
    std::vector<std::size_t> y1, y2; // marginal symbols, block-major, length k*n
};

inline ChannelOutputs transmit(const BroadcastPolarCode& code, const BitVector& x,
                               std::uint64_t noise_seed) {
    if (!code.spec.classical) throw ConfigError("transmission requires a classical channel spec");
    if (x.size() != code.k * code.n) throw ConfigError("channel input length mismatch");
    ChannelOutputs out;
    out.y1.resize(x.size());
    out.y2.resize(x.size());
    for (std::size_t g = 0; g < x.size(); ++g) {
        const auto& row = code.spec.rows[x[g]];
        double r = seed_to_unit(derive_seed(noise_seed, g + 1));
        std::size_t y = row.size() - 1;
        double cdf = 0.0;
        for (std::size_t cand = 0; cand < row.size(); ++cand) {
            cdf += row[cand];
            if (r < cdf) {
                y = cand;
                break;
            }
        }
        out.y1[g] = y / code.spec.y2_count;
        out.y2[g] = y % code.spec.y2_count;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Receivers.

struct Receiver1Result {
    BitVector m1, m0;
    std::vector<BitVector> u0, u1; // committed estimates per block
};

inline Receiver1Result decode_receiver1(const BroadcastPolarCode& code,
                                        const std::vector<std::size_t>& y1) {
    if (!code.spec.classical) throw ConfigError("decoding requires a classical channel spec");
    std::size_t n = code.n, k = code.k;
    if (y1.size() != k * n) throw ConfigError("received sequence length mismatch");
    const auto& aux = code.aux;
    auto l0 = detail::layer0_likelihood(code.spec, aux, 1);
    auto l1 = detail::layer1_posterior_table(code.spec, aux);

    Receiver1Result res;
    res.m1.resize(code.m1_bits());
    res.m0.resize(code.m0_bits());
    res.u0.resize(k);
    res.u1.resize(k);
    ScEngine engine(n);
    std::vector<std::vector<LeafTable>> tracks(2, std::vector<LeafTable>(n));
    std::vector<LeafTable> single(n);
    std::vector<std::uint8_t> b1_prev(code.schedule.B1.size());
    std::vector<std::uint8_t> rbin_prev(code.schedule.Rbin.size());
    std::vector<std::uint8_t> b1_cur(b1_prev.size()), rbin_cur(rbin_prev.size());

    for (std::size_t bn = 1; bn <= k; ++bn) {
        std::size_t b = bn - 1;
        // superposition layer: channel track plus prior-only source track
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t y = y1[b * n + j];
            tracks[0][j] = {(1.0 - aux.p_v) * l0[0][y], aux.p_v * l0[1][y]};
            tracks[1][j] = {1.0 - aux.p_v, aux.p_v};
        }
        detail::RankCursor cur_sup, cur_common, cur_b2;
        cur_sup.reset(bn == 1 ? code.sup_msg_first : code.sup_msg);
        cur_common.reset(bn == 1 ? code.common_first : code.common_pos);
        cur_b2.reset(code.schedule.B2.idx);
        std::uint64_t sseed = detail::sample_seed(code, 0, bn);
        res.u0[b] = engine.run_multi(
            tracks, [&](std::size_t i, const std::vector<LeafTable>& post) -> std::uint8_t {
                std::uint8_t bit;
                switch (code.role[0][i - 1]) {
                case PositionRole::message:
                    if (auto r = cur_b2.match(i))
                        bit = bn == 1 ? detail::srand_bit(code, 0, bn, i) : b1_prev[*r];
                    else
                        bit = sc::map_decision(post[0][0], post[0][1]);
                    break;
                case PositionRole::sampled:
                    bit = sc::sampled_bit(sseed, i, post[1][1]) ? 1 : 0;
                    break;
                default: bit = detail::srand_bit(code, 0, bn, i);
                }
                if (code.role[0][i - 1] == PositionRole::message)
                    if (auto r = cur_common.match(i))
                        res.m0[detail::common_base(code, bn) + *r] = bit;
                return bit;
            });
        BitVector v0 = engine.codeword();

        // first user's layer: single channel track, the conditional source
        // distribution is unavailable without the second user's layer
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t y = y1[b * n + j];
            single[j] = {l1[v0[j]][0][y], l1[v0[j]][1][y]};
        }
        detail::RankCursor cur_msg, cur_b1, cur_rbin, cur_f1;
        cur_msg.reset(code.msg1);
        cur_b1.reset(code.schedule.B1.idx);
        cur_rbin.reset(code.schedule.Rbin.idx);
        cur_f1.reset(code.schedule.F1.idx);
        res.u1[b] = engine.run(single, [&](std::size_t i, double q0, double q1) -> std::uint8_t {
            switch (code.role[1][i - 1]) {
            case PositionRole::message: {
                std::uint8_t bit = sc::map_decision(q0, q1);
                auto r = cur_msg.match(i);
                res.m1[detail::m1_base(code, bn) + *r] = bit;
                return bit;
            }
            case PositionRole::chained: {
                if (bn == k) return detail::srand_bit(code, 1, bn, i);
                std::uint8_t bit = sc::map_decision(q0, q1);
                if (auto r = cur_b1.match(i)) b1_cur[*r] = bit;
                if (auto r = cur_rbin.match(i)) rbin_cur[*r] = bit;
                return bit;
            }
            case PositionRole::sampled:
                if (auto r = cur_f1.match(i))
                    return bn == 1 ? detail::srand_bit(code, 1, bn, i) : rbin_prev[*r];
                return sc::map_decision(q0, q1);
            default: return detail::srand_bit(code, 1, bn, i);
            }
        });
        std::swap(b1_prev, b1_cur);
        std::swap(rbin_prev, rbin_cur);
    }
    return res;
}

struct Receiver2Result {
    BitVector m2, m0;
    std::vector<BitVector> u0, u2; // committed estimates per block
};

inline Receiver2Result decode_receiver2(const BroadcastPolarCode& code,
                                        const std::vector<std::size_t>& y2) {
    if (!code.spec.classical) throw ConfigError("decoding requires a classical channel spec");
    std::size_t n = code.n, k = code.k;
    if (y2.size() != k * n) throw ConfigError("received sequence length mismatch");
    const auto& aux = code.aux;
    auto l0 = detail::layer0_likelihood(code.spec, aux, 2);
    auto l2 = detail::layer2_posterior_table(code.spec, aux);

    Receiver2Result res;
    res.m2.resize(code.m2_bits());
    res.m0.resize(code.m0_bits());
    res.u0.resize(k);
    res.u2.resize(k);
    ScEngine engine(n);
    std::vector<std::vector<LeafTable>> tracks(2, std::vector<LeafTable>(n));

    // blocks are independent for this receiver; processed backward to match
    // the schedule's direction tag
    for (std::size_t bn = k; bn >= 1; --bn) {
        std::size_t b = bn - 1;
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t y = y2[b * n + j];
            tracks[0][j] = {(1.0 - aux.p_v) * l0[0][y], aux.p_v * l0[1][y]};
            tracks[1][j] = {1.0 - aux.p_v, aux.p_v};
        }
        detail::RankCursor cur_sup, cur_common;
        cur_sup.reset(bn == 1 ? code.sup_msg_first : code.sup_msg);
        cur_common.reset(bn == 1 ? code.common_first : code.common_pos);
        std::uint64_t sseed = detail::sample_seed(code, 0, bn);
        res.u0[b] = engine.run_multi(
            tracks, [&](std::size_t i, const std::vector<LeafTable>& post) -> std::uint8_t {
                std::uint8_t bit;
                switch (code.role[0][i - 1]) {
                case PositionRole::message:
                    if (bn == 1 && code.schedule.B2.contains(i))
                        bit = detail::srand_bit(code, 0, bn, i);
                    else
                        bit = sc::map_decision(post[0][0], post[0][1]);
                    break;
                case PositionRole::sampled:
                    bit = sc::sampled_bit(sseed, i, post[1][1]) ? 1 : 0;
                    break;
                default: bit = detail::srand_bit(code, 0, bn, i);
                }
                if (code.role[0][i - 1] == PositionRole::message) {
                    if (auto r = cur_common.match(i))
                        res.m0[detail::common_base(code, bn) + *r] = bit;
                    else if (auto r2 = cur_sup.match(i))
                        res.m2[detail::sup_base(code, bn) + *r2] = bit;
                }
                return bit;
            });
        BitVector v0 = engine.codeword();

        // second user's layer: channel track plus conditional source track
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t y = y2[b * n + j];
            double q = aux.p_v2_given_v[v0[j]];
            tracks[0][j] = {l2[v0[j]][0][y], l2[v0[j]][1][y]};
            tracks[1][j] = {1.0 - q, q};
        }
        detail::RankCursor cur_bin;
        cur_bin.reset(code.msg2bin);
        std::uint64_t sseed2 = detail::sample_seed(code, 2, bn);
        res.u2[b] = engine.run_multi(
            tracks, [&](std::size_t i, const std::vector<LeafTable>& post) -> std::uint8_t {
                switch (code.role[2][i - 1]) {
                case PositionRole::message: {
                    std::uint8_t bit = sc::map_decision(post[0][0], post[0][1]);
                    auto r = cur_bin.match(i);
                    res.m2[detail::bin_base(code, bn) + *r] = bit;
                    return bit;
                }
                case PositionRole::sampled:
                    return sc::sampled_bit(sseed2, i, post[1][1]) ? 1 : 0;
                default: return detail::srand_bit(code, 2, bn, i);
                }
            });
        if (bn == 1) break;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Full round trip.

struct TransmissionRecord {
    BitVector m1, m2, m0;
    EncodeResult enc;
    std::vector<std::size_t> y1, y2;
    Receiver1Result rx1;
    Receiver2Result rx2;
    bool ok1 = false, ok2 = false, ok0 = false;
    // per-receiver count of blocks whose message slice decoded wrong
    std::size_t bad_blocks1 = 0, bad_blocks2 = 0;
};

namespace detail {

inline bool slice_equal(const BitVector& a, const BitVector& b, std::size_t base,
                        std::size_t len) {
    for (std::size_t s = 0; s < len; ++s)
        if (a[base + s] != b[base + s]) return false;
    return true;
}

} // namespace detail

inline TransmissionRecord simulate_transmission(const BroadcastPolarCode& code,
                                                std::uint64_t message_seed,
                                                std::uint64_t noise_seed) {
    TransmissionRecord r;
    r.m1.resize(code.m1_bits());
    r.m2.resize(code.m2_bits());
    r.m0.resize(code.m0_bits());
    for (std::size_t s = 0; s < r.m1.size(); ++s)
        r.m1[s] = seed_to_bit(derive_seed(message_seed, 1, s + 1)) ? 1 : 0;
    for (std::size_t s = 0; s < r.m2.size(); ++s)
        r.m2[s] = seed_to_bit(derive_seed(message_seed, 2, s + 1)) ? 1 : 0;
    for (std::size_t s = 0; s < r.m0.size(); ++s)
        r.m0[s] = seed_to_bit(derive_seed(message_seed, 3, s + 1)) ? 1 : 0;
    r.enc = encode(code, r.m1, r.m2, r.m0);
    auto y = transmit(code, r.enc.x, noise_seed);
    r.y1 = std::move(y.y1);
    r.y2 = std::move(y.y2);
    r.rx1 = decode_receiver1(code, r.y1);
    r.rx2 = decode_receiver2(code, r.y2);
    r.ok1 = r.rx1.m1 == r.m1;
    r.ok2 = r.rx2.m2 == r.m2;
    r.ok0 = r.rx1.m0 == r.m0 && r.rx2.m0 == r.m0;
    for (std::size_t bn = 1; bn <= code.k; ++bn) {
        if (!detail::slice_equal(r.rx1.m1, r.m1, detail::m1_base(code, bn), code.msg1.size()))
            ++r.bad_blocks1;
        std::size_t sup_len = bn == 1 ? code.sup_msg_first.size() : code.sup_msg.size();
        bool sup_ok = detail::slice_equal(r.rx2.m2, r.m2, detail::sup_base(code, bn), sup_len);
        bool bin_ok = detail::slice_equal(r.rx2.m2, r.m2, detail::bin_base(code, bn),
                                          code.msg2bin.size());
        if (!(sup_ok && bin_ok)) ++r.bad_blocks2;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Analytic error bound: per block, the sum of Z over the positions each
// receiver actually decides under successive cancellation. Chained positions
// and regenerated samples contribute nothing for the receiver that knows
// them.

struct ErrorBoundReport {
    double rx1_superposition = 0.0, rx1_private = 0.0;
    double rx2_superposition = 0.0, rx2_private = 0.0;
    bool from_exact_profiles = true;

    double rx1() const { return rx1_superposition + rx1_private; }
    double rx2() const { return rx2_superposition + rx2_private; }
};

inline ErrorBoundReport analyze_error_bound(const BroadcastPolarCode& code) {
    ErrorBoundReport r;
    for (auto list : {&code.sup_msg, &code.common_pos})
        for (auto i : *list) {
            r.rx2_superposition += code.profiles.v_b2.z[i - 1];
            if (!code.schedule.B2.contains(i)) r.rx1_superposition += code.profiles.v_b1.z[i - 1];
        }
    for (std::size_t i = 1; i <= code.n; ++i) {
        auto role = code.role[1][i - 1];
        bool decided = role == PositionRole::message ||
                       (role == PositionRole::sampled && !code.schedule.F1.contains(i));
        if (decided) r.rx1_private += code.profiles.v1_v_b1.z[i - 1];
    }
    for (auto i : code.msg2bin) r.rx2_private += code.profiles.v2_v_b2.z[i - 1];
    r.from_exact_profiles = code.profiles.v_b1.exact && code.profiles.v_b2.exact &&
                            code.profiles.v1_v_b1.exact && code.profiles.v2_v_b2.exact;
    return r;
}

} // namespace cqpolar
