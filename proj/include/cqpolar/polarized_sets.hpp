#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cqpolar/broadcast_channel.hpp"
#include "cqpolar/pure_state_polar.hpp"
#include "cqpolar/sc_engine.hpp"

// Per-index Z profiles and the high/low index sets cut from them. Exact
// profiles walk the hybrid synthesis; uniform-prior pure-state channels take
// the closed spectral route; classical instances that outgrow the synthesis
// budget fall back to a genie-aided Monte Carlo estimate of the same
// successive-cancellation Bhattacharyya quantity.

namespace cqpolar {

struct Threshold {
    double delta_high = 0.99;
    double delta_low = 0.01;

    void validate() const {
        if (!(delta_low > 0.0 && delta_low < 1.0 && delta_high > 0.0 && delta_high < 1.0 &&
              delta_low <= delta_high))
            throw ConfigError("thresholds must satisfy 0 < delta_low <= delta_high < 1");
    }
};

struct PolarizationProfile {
    std::size_t n = 0;
    std::vector<double> z;          // z[i - 1] = Z of synthesized index i
    bool exact = true;
    int samples = 0;                // Monte Carlo only
    std::vector<double> half_width; // 95% normal-approximation, Monte Carlo only
    std::string context;            // conditioning descriptor, e.g. "v1|v,b1"

    std::string method() const { return exact ? "exact" : "monte-carlo"; }

    void validate() const {
        if (z.size() != n) throw StateError("profile length mismatch");
        for (double v : z)
            if (!(v >= -1e-9 && v <= 1.0 + 1e-6))
                throw StateError("profile Z value outside [0,1]: " + std::to_string(v));
        if (!exact && samples <= 0) throw StateError("monte-carlo profile needs samples > 0");
    }
};

class IndexSet {
public:
    std::size_t n = 0;
    std::vector<std::size_t> idx; // sorted distinct values in [1..n]

    IndexSet() = default;
    explicit IndexSet(std::size_t n_) : n(n_) {}
    IndexSet(std::size_t n_, std::vector<std::size_t> v) : n(n_), idx(std::move(v)) {
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        validate();
    }

    static IndexSet full(std::size_t n_) {
        IndexSet s(n_);
        s.idx.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) s.idx[i] = i + 1;
        return s;
    }

    void validate() const {
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (idx[k] < 1 || idx[k] > n) throw StateError("index set entry out of range");
            if (k > 0 && idx[k] <= idx[k - 1]) throw StateError("index set not sorted distinct");
        }
    }

    std::size_t size() const { return idx.size(); }
    bool empty() const { return idx.empty(); }
    bool contains(std::size_t i) const {
        return std::binary_search(idx.begin(), idx.end(), i);
    }

    IndexSet intersect(const IndexSet& o) const {
        require_same_n(o);
        IndexSet r(n);
        std::set_intersection(idx.begin(), idx.end(), o.idx.begin(), o.idx.end(),
                              std::back_inserter(r.idx));
        return r;
    }
    IndexSet unite(const IndexSet& o) const {
        require_same_n(o);
        IndexSet r(n);
        std::set_union(idx.begin(), idx.end(), o.idx.begin(), o.idx.end(),
                       std::back_inserter(r.idx));
        return r;
    }
    IndexSet minus(const IndexSet& o) const {
        require_same_n(o);
        IndexSet r(n);
        std::set_difference(idx.begin(), idx.end(), o.idx.begin(), o.idx.end(),
                            std::back_inserter(r.idx));
        return r;
    }
    IndexSet complement() const {
        IndexSet r(n);
        std::size_t k = 0;
        for (std::size_t i = 1; i <= n; ++i) {
            if (k < idx.size() && idx[k] == i) {
                ++k;
                continue;
            }
            r.idx.push_back(i);
        }
        return r;
    }

private:
    void require_same_n(const IndexSet& o) const {
        if (n != o.n) throw StateError("index set blocklength mismatch");
    }
};

inline IndexSet high_set(const PolarizationProfile& p, const Threshold& t) {
    t.validate();
    IndexSet s(p.n);
    for (std::size_t i = 1; i <= p.n; ++i)
        if (p.z[i - 1] >= t.delta_high) s.idx.push_back(i);
    return s;
}

inline IndexSet low_set(const PolarizationProfile& p, const Threshold& t) {
    t.validate();
    IndexSet s(p.n);
    for (std::size_t i = 1; i <= p.n; ++i)
        if (p.z[i - 1] <= t.delta_low) s.idx.push_back(i);
    return s;
}

// neither high nor low: finite-n overhead positions
inline IndexSet unpolarized_set(const PolarizationProfile& p, const Threshold& t) {
    return high_set(p, t).unite(low_set(p, t)).complement();
}

// ---------------------------------------------------------------------------
// Profile computation.

struct ProfileOptions {
    bool allow_mc = true;  // permit classical Monte Carlo fallback on budget misses
    bool force_mc = false; // skip the exact attempt (test/diagnostic path)
    int samples = 2000;
    std::uint64_t seed = 0x1d872b41caf01f2dULL;
    int threads = 1;
    SynthesisBudget budget;
    std::size_t max_pure_table = std::size_t{1} << 22;
};

namespace detail {

inline PolarizationProfile exact_profile(const HybridChannel& base, std::size_t n,
                                         std::string context) {
    PolarizationProfile p;
    p.n = n;
    p.exact = true;
    p.context = std::move(context);
    p.z.assign(n, 0.0);
    for_each_synthesized(base, n,
                         [&](std::size_t i, const HybridChannel& w) { p.z[i - 1] = channel_Z(w); });
    return p;
}

// uniform-prior single-branch channel with two pure payloads: the spectral
// engine applies and returns their overlap
inline std::optional<double> pure_uniform_overlap(const HybridChannel& w) {
    if (w.kind != PayloadKind::quantum || w.branches.size() != 1) return std::nullopt;
    if (std::abs(w.p0 - 0.5) > 1e-12 || std::abs(w.p1 - 0.5) > 1e-12) return std::nullopt;
    const auto& br = w.branches.front();
    auto is_pure_unit = [](const Matrix& m) {
        double tr = m.trace().real();
        double tr2 = (m * m).trace().real();
        return std::abs(tr - 1.0) <= 1e-10 && std::abs(tr2 - 1.0) <= 1e-9;
    };
    if (!is_pure_unit(br.a0) || !is_pure_unit(br.a1)) return std::nullopt;
    return block_fidelity(br.a0, br.a1);
}

inline PolarizationProfile pure_profile(double overlap, std::size_t n, std::string context,
                                        std::size_t max_table) {
    PolarizationProfile p;
    p.n = n;
    p.exact = true;
    p.context = std::move(context);
    p.z.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) p.z.push_back(pure_state_z(overlap, n, i, max_table));
    return p;
}

// Genie-aided Monte Carlo: sample iid inputs and observations, run the exact
// SC pass along the true bits, and average 2 sqrt(q0 q1) of the per-index
// posterior. Trials are grouped in fixed-size chunks whose partial sums are
// reduced in chunk order, so results do not depend on the thread count.
inline PolarizationProfile mc_profile(const ClassicalChannelTable& t, double p1, std::size_t n,
                                      const ProfileOptions& opt, std::string context) {
    if (opt.samples <= 0) throw ConfigError("monte-carlo sample count must be positive");
    log2_exact(n);
    const int T = opt.samples;
    const double p0 = 1.0 - p1;
    constexpr int kChunk = 64;
    const int chunks = (T + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> csum(chunks), csumsq(chunks);

    auto run_chunk = [&](int c) {
        ScEngine engine(n);
        std::vector<double>& sum = csum[c];
        std::vector<double>& sumsq = csumsq[c];
        sum.assign(n, 0.0);
        sumsq.assign(n, 0.0);
        BitVector v(n);
        std::vector<LeafTable> leaves(n);
        int lo = c * kChunk, hi = std::min(T, lo + kChunk);
        for (int trial = lo; trial < hi; ++trial) {
            std::uint64_t ts = derive_seed(opt.seed, static_cast<std::uint64_t>(trial) + 1);
            for (std::size_t j = 0; j < n; ++j) {
                v[j] = seed_to_unit(derive_seed(ts, j, 1)) < p1 ? 1 : 0;
                const auto& row = v[j] ? t.row1 : t.row0;
                double r = seed_to_unit(derive_seed(ts, j, 2));
                std::size_t y = row.size() - 1;
                double cdf = 0.0;
                for (std::size_t cand = 0; cand < row.size(); ++cand) {
                    cdf += row[cand];
                    if (r < cdf) {
                        y = cand;
                        break;
                    }
                }
                leaves[j] = {p0 * t.row0[y], p1 * t.row1[y]};
            }
            BitVector u = polar_encode(v);
            engine.run(leaves, [&](std::size_t i, double q0, double q1) {
                double zi = 2.0 * std::sqrt(q0 * q1);
                sum[i - 1] += zi;
                sumsq[i - 1] += zi * zi;
                return u[i - 1];
            });
        }
    };

    int workers = std::max(1, opt.threads);
    if (workers == 1) {
        for (int c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) run_chunk(c);
            });
        for (auto& th : pool) th.join();
    }

    PolarizationProfile p;
    p.n = n;
    p.exact = false;
    p.samples = T;
    p.context = std::move(context);
    p.z.assign(n, 0.0);
    p.half_width.assign(n, 0.0);
    std::vector<double> sq(n, 0.0);
    for (int c = 0; c < chunks; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            p.z[i] += csum[c][i];
            sq[i] += csumsq[c][i];
        }
    for (std::size_t i = 0; i < n; ++i) {
        double mean = p.z[i] / T;
        p.z[i] = mean;
        if (T > 1) {
            double var = std::max(0.0, (sq[i] - T * mean * mean) / (T - 1));
            p.half_width[i] = 1.96 * std::sqrt(var / T);
        }
    }
    return p;
}

} // namespace detail

inline PolarizationProfile source_profile(double p1, std::size_t n, const ProfileOptions& opt = {}) {
    if (p1 < 0.0 || p1 > 1.0) throw ConfigError("source parameter outside [0,1]");
    if (opt.force_mc)
        return detail::mc_profile(ClassicalChannelTable({1.0}, {1.0}), p1, n, opt, "v");
    return detail::exact_profile(HybridChannel::from_source(p1, opt.budget), n, "v");
}

inline PolarizationProfile channel_profile(const ClassicalChannelTable& t, double p1,
                                           std::size_t n, const ProfileOptions& opt = {}) {
    if (!opt.force_mc) {
        try {
            return detail::exact_profile(HybridChannel::from_table(t, 1.0 - p1, p1, opt.budget), n,
                                         "x|b");
        } catch (const BudgetError&) {
            if (!opt.allow_mc) throw;
        }
    }
    return detail::mc_profile(t, p1, n, opt, "x|b");
}

inline PolarizationProfile channel_profile(const CqEnsemble& e, std::size_t n,
                                           const ProfileOptions& opt = {}) {
    if (opt.force_mc)
        throw ConfigError("no Monte Carlo estimator for quantum outputs; use the exact path");
    auto base = HybridChannel::from_ensemble(e, opt.budget);
    if (auto s = detail::pure_uniform_overlap(base); s && n <= 64)
        return detail::pure_profile(*s, n, "x|b", opt.max_pure_table);
    return detail::exact_profile(base, n, "x|b");
}

// Profile of one auxiliary layer given other layers and optionally a
// receiver's channel output. The conditioning layers and output behave as
// iid per-position side information, so this reduces exactly to the profile
// of the induced channel.
inline PolarizationProfile conditional_profile(const BroadcastChannelSpec& spec,
                                               const AuxiliaryStructure& aux, LayerId target,
                                               const Conditioning& cond, std::size_t n,
                                               const ProfileOptions& opt = {}) {
    std::string ctx = std::string(layer_name(target)) + "|" + cond.describe();
    bool mc_possible = (spec.classical || cond.receiver == 0) && opt.allow_mc;
    if (!opt.force_mc) {
        try {
            auto w = induced_cq_channel(spec, aux, target, cond, opt.budget);
            if (w.kind == PayloadKind::quantum)
                if (auto s = detail::pure_uniform_overlap(w); s && n <= 64)
                    return detail::pure_profile(*s, n, ctx, opt.max_pure_table);
            return detail::exact_profile(w, n, ctx);
        } catch (const BudgetError&) {
            if (!mc_possible) throw;
        }
    }
    auto it = induced_classical_table(spec, aux, target, cond);
    return detail::mc_profile(it.table, it.p1, n, opt, ctx);
}

// The eight profiles the set definitions draw from.
struct ProfileSet {
    PolarizationProfile v;        // Z(U_(0),i | prefix)
    PolarizationProfile v_b1;     // Z(U_(0),i | prefix, B1)
    PolarizationProfile v_b2;     // Z(U_(0),i | prefix, B2)
    PolarizationProfile v1_v;     // Z(U_(1),i | prefix, V)
    PolarizationProfile v2_v;     // Z(U_(2),i | prefix, V)
    PolarizationProfile v1_v_b1;  // Z(U_(1),i | prefix, V, B1)
    PolarizationProfile v2_v_b2;  // Z(U_(2),i | prefix, V, B2)
    PolarizationProfile v1_v_v2;  // Z(U_(1),i | prefix, V, V2)
};

inline ProfileSet compute_profile_set(const BroadcastChannelSpec& spec,
                                      const AuxiliaryStructure& aux, std::size_t n,
                                      const ProfileOptions& opt = {}) {
    ProfileSet ps;
    ps.v = conditional_profile(spec, aux, LayerId::v, {}, n, opt);
    ps.v_b1 = conditional_profile(spec, aux, LayerId::v, {false, false, 1}, n, opt);
    ps.v_b2 = conditional_profile(spec, aux, LayerId::v, {false, false, 2}, n, opt);
    ps.v1_v = conditional_profile(spec, aux, LayerId::v1, {true, false, 0}, n, opt);
    ps.v2_v = conditional_profile(spec, aux, LayerId::v2, {true, false, 0}, n, opt);
    ps.v1_v_b1 = conditional_profile(spec, aux, LayerId::v1, {true, false, 1}, n, opt);
    ps.v2_v_b2 = conditional_profile(spec, aux, LayerId::v2, {true, false, 2}, n, opt);
    ps.v1_v_v2 = conditional_profile(spec, aux, LayerId::v1, {true, true, 0}, n, opt);
    return ps;
}

} // namespace cqpolar
