#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "cqpolar/broadcast_channel.hpp"

// Achievable-rate evaluation for a fixed auxiliary structure, the two corner
// points the chained construction approaches, and exhaustive search over the
// binary auxiliary family. All quantities are Holevo informations of induced
// ensembles; for classical channels they reduce to Shannon informations
// computed on raw probability arrays, which is what makes the grid search
// affordable.

namespace cqpolar {

struct RatePoint {
    double r0 = 0.0, r1 = 0.0, r2 = 0.0;
};

struct RegionQuantities {
    double i_v_b1 = 0.0, i_v_b2 = 0.0;     // I(V;B_l)
    double i_vv1_b1 = 0.0, i_vv2_b2 = 0.0; // I(V,V_l;B_l)
    double i_v1v2_v = 0.0;                 // I(V1;V2|V)

    double i_v1_b1_given_v() const { return i_vv1_b1 - i_v_b1; }
    double i_v2_b2_given_v() const { return i_vv2_b2 - i_v_b2; }
};

namespace detail {

// mutual information between a grouping of the eight (v,v1,v2) events and one
// receiver's output, from the unnormalized joint p(group, y)
inline double grouped_mi(const std::vector<std::vector<double>>& pgy) {
    std::size_t m = pgy.empty() ? 0 : pgy.front().size();
    std::vector<double> py(m, 0.0);
    std::vector<double> pg(pgy.size(), 0.0);
    for (std::size_t g = 0; g < pgy.size(); ++g)
        for (std::size_t y = 0; y < m; ++y) {
            py[y] += pgy[g][y];
            pg[g] += pgy[g][y];
        }
    double mi = 0.0;
    for (std::size_t g = 0; g < pgy.size(); ++g)
        for (std::size_t y = 0; y < m; ++y) {
            double p = pgy[g][y];
            if (p > 0.0) mi += p * std::log2(p / (pg[g] * py[y]));
        }
    return mi;
}

// I(V1;V2|V) from the joint over (v, v1, v2)
inline double binning_from_joint(const std::array<double, 8>& joint) {
    double acc = 0.0;
    for (int v = 0; v < 2; ++v) {
        double pv = 0.0;
        for (int c = 0; c < 4; ++c) pv += joint[v * 4 + c];
        if (pv <= 0.0) continue;
        double h12 = 0.0, m1[2] = {0.0, 0.0}, m2[2] = {0.0, 0.0};
        for (int v1 = 0; v1 < 2; ++v1)
            for (int v2 = 0; v2 < 2; ++v2) {
                double p = joint[v * 4 + v1 * 2 + v2] / pv;
                h12 -= xlog2x(p);
                m1[v1] += p;
                m2[v2] += p;
            }
        double h1 = -xlog2x(m1[0]) - xlog2x(m1[1]);
        double h2 = -xlog2x(m2[0]) - xlog2x(m2[1]);
        acc += pv * (h1 + h2 - h12);
    }
    return std::max(acc, 0.0);
}

// receiver-marginal tables or states, hoisted out of per-cell evaluation
struct BroadcastTables {
    bool classical = true;
    std::array<std::vector<double>, 2> w1, w2; // rows per input x
    std::array<DensityMatrix, 2> s1 = {DensityMatrix::diagonal({1.0}),
                                       DensityMatrix::diagonal({1.0})};
    std::array<DensityMatrix, 2> s2 = {DensityMatrix::diagonal({1.0}),
                                       DensityMatrix::diagonal({1.0})};
};

inline BroadcastTables precompute_tables(const BroadcastChannelSpec& spec) {
    spec.validate();
    BroadcastTables t;
    t.classical = spec.classical;
    if (spec.classical) {
        auto t1 = spec.marginal_table(1), t2 = spec.marginal_table(2);
        t.w1 = {t1.row0, t1.row1};
        t.w2 = {t2.row0, t2.row1};
    } else {
        t.s1 = {spec.marginal_state(1, 0), spec.marginal_state(1, 1)};
        t.s2 = {spec.marginal_state(2, 0), spec.marginal_state(2, 1)};
    }
    return t;
}

inline RegionQuantities quantities_from(const BroadcastTables& t, const std::array<double, 8>& joint,
                                        const std::array<std::uint8_t, 8>& phi) {
    RegionQuantities q;
    q.i_v1v2_v = binning_from_joint(joint);
    if (t.classical) {
        std::size_t m1 = t.w1[0].size(), m2 = t.w2[0].size();
        // groups (v, v1) toward receiver 1 and (v, v2) toward receiver 2
        std::vector<std::vector<double>> g1(4, std::vector<double>(m1, 0.0));
        std::vector<std::vector<double>> g2(4, std::vector<double>(m2, 0.0));
        for (int c = 0; c < 8; ++c) {
            double p = joint[c];
            if (p <= 0.0) continue;
            int v = c >> 2, v1 = (c >> 1) & 1, v2 = c & 1;
            const auto& r1 = t.w1[phi[c]];
            const auto& r2 = t.w2[phi[c]];
            for (std::size_t y = 0; y < m1; ++y) g1[v * 2 + v1][y] += p * r1[y];
            for (std::size_t y = 0; y < m2; ++y) g2[v * 2 + v2][y] += p * r2[y];
        }
        q.i_vv1_b1 = grouped_mi(g1);
        q.i_vv2_b2 = grouped_mi(g2);
        std::vector<std::vector<double>> v1rows(2, std::vector<double>(m1, 0.0));
        std::vector<std::vector<double>> v2rows(2, std::vector<double>(m2, 0.0));
        for (int g = 0; g < 4; ++g) {
            for (std::size_t y = 0; y < m1; ++y) v1rows[g >> 1][y] += g1[g][y];
            for (std::size_t y = 0; y < m2; ++y) v2rows[g >> 1][y] += g2[g][y];
        }
        q.i_v_b1 = grouped_mi(v1rows);
        q.i_v_b2 = grouped_mi(v2rows);
    } else {
        Eigen::Index d1 = t.s1[0].dim(), d2 = t.s2[0].dim();
        std::vector<Matrix> g1(4, Matrix::Zero(d1, d1)), g2(4, Matrix::Zero(d2, d2));
        std::vector<double> p1(4, 0.0), p2(4, 0.0);
        for (int c = 0; c < 8; ++c) {
            double p = joint[c];
            if (p <= 0.0) continue;
            int v = c >> 2, v1 = (c >> 1) & 1, v2 = c & 1;
            g1[v * 2 + v1] += p * t.s1[phi[c]].matrix();
            p1[v * 2 + v1] += p;
            g2[v * 2 + v2] += p * t.s2[phi[c]].matrix();
            p2[v * 2 + v2] += p;
        }
        auto holevo_groups = [](std::vector<Matrix>& g, std::vector<double>& pr) {
            std::vector<double> prior;
            std::vector<DensityMatrix> states;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (pr[i] <= 0.0) continue;
                prior.push_back(pr[i]);
                states.emplace_back(Matrix(g[i] / pr[i]));
            }
            return holevo_information(prior, states);
        };
        q.i_vv1_b1 = holevo_groups(g1, p1);
        q.i_vv2_b2 = holevo_groups(g2, p2);
        std::vector<Matrix> h1(2, Matrix::Zero(d1, d1)), h2(2, Matrix::Zero(d2, d2));
        std::vector<double> q1(2, 0.0), q2v(2, 0.0);
        for (int g = 0; g < 4; ++g) {
            h1[g >> 1] += g1[g];
            q1[g >> 1] += p1[g];
            h2[g >> 1] += g2[g];
            q2v[g >> 1] += p2[g];
        }
        q.i_v_b1 = holevo_groups(h1, q1);
        q.i_v_b2 = holevo_groups(h2, q2v);
    }
    return q;
}

inline std::array<double, 8> joint_of(const AuxiliaryStructure& aux) {
    std::array<double, 8> j{};
    for (int c = 0; c < 8; ++c) j[c] = aux.joint(c >> 2, (c >> 1) & 1, c & 1);
    return j;
}

} // namespace detail

inline RegionQuantities region_quantities(const BroadcastChannelSpec& spec,
                                          const AuxiliaryStructure& aux) {
    aux.validate();
    return detail::quantities_from(detail::precompute_tables(spec), detail::joint_of(aux),
                                   aux.phi);
}

// ---------------------------------------------------------------------------
// Bounds.

struct RegionBounds {
    // private-message bounds: R1, R2, and the two sum constraints
    double r1_max = 0.0, r2_max = 0.0, sum_a = 0.0, sum_b = 0.0;
    // common-message bounds, populated by evaluate_common_region
    double r0_max = 0.0, r01_max = 0.0, r02_max = 0.0, sum0_a = 0.0, sum0_b = 0.0;
    bool includes_common = false;
    bool clamped = false; // some bound was negative before clamping

    bool admits(const RatePoint& p, double tol = 1e-12) const {
        bool ok = p.r1 <= r1_max + tol && p.r2 <= r2_max + tol &&
                  p.r1 + p.r2 <= sum_a + tol && p.r1 + p.r2 <= sum_b + tol;
        if (includes_common)
            ok = ok && p.r0 <= r0_max + tol && p.r0 + p.r1 <= r01_max + tol &&
                 p.r0 + p.r2 <= r02_max + tol && p.r0 + p.r1 + p.r2 <= sum0_a + tol &&
                 p.r0 + p.r1 + p.r2 <= sum0_b + tol;
        return ok;
    }
};

namespace detail {

inline double clamp_rate(double x, bool& clamped) {
    if (x < 0.0) {
        clamped = true;
        return 0.0;
    }
    return x;
}

inline RegionBounds private_bounds(const RegionQuantities& q) {
    RegionBounds b;
    b.r1_max = clamp_rate(q.i_vv1_b1, b.clamped);
    b.r2_max = clamp_rate(q.i_vv2_b2, b.clamped);
    b.sum_a = clamp_rate(q.i_vv1_b1 + q.i_v2_b2_given_v() - q.i_v1v2_v, b.clamped);
    b.sum_b = clamp_rate(q.i_vv2_b2 + q.i_v1_b1_given_v() - q.i_v1v2_v, b.clamped);
    return b;
}

} // namespace detail

inline RegionBounds evaluate_private_region(const BroadcastChannelSpec& spec,
                                            const AuxiliaryStructure& aux) {
    return detail::private_bounds(region_quantities(spec, aux));
}

inline RegionBounds evaluate_common_region(const BroadcastChannelSpec& spec,
                                           const AuxiliaryStructure& aux) {
    RegionQuantities q = region_quantities(spec, aux);
    RegionBounds b = detail::private_bounds(q);
    b.includes_common = true;
    b.r0_max = detail::clamp_rate(std::min(q.i_v_b1, q.i_v_b2), b.clamped);
    b.r01_max = b.r1_max;
    b.r02_max = b.r2_max;
    b.sum0_a = b.sum_a;
    b.sum0_b = b.sum_b;
    return b;
}

// ---------------------------------------------------------------------------
// Corner points.

struct CornerOptions {
    // Corner A's R1 as the printed intermediate difference form rather than
    // the self-consistent final form (they disagree for asymmetric instances).
    bool literal_middle_line = false;
};

struct CornerPoints {
    RatePoint a, b;
    bool roles_swapped = false; // evaluated with receivers exchanged
    bool clamped = false;
};

namespace detail {

inline CornerPoints corners_from(const RegionQuantities& qin, const CornerOptions& opt) {
    CornerPoints c;
    RegionQuantities q = qin;
    // the superposition layer must point at the receiver with the larger
    // I(V;B); otherwise exchange roles and swap the rate labels back
    c.roles_swapped = q.i_v_b1 > q.i_v_b2 + 1e-12;
    if (c.roles_swapped) {
        std::swap(q.i_v_b1, q.i_v_b2);
        std::swap(q.i_vv1_b1, q.i_vv2_b2);
    }
    double a1 = opt.literal_middle_line
                    ? q.i_v1_b1_given_v() - q.i_v1v2_v
                    : q.i_vv1_b1 - q.i_v1v2_v - q.i_v_b2;
    c.a.r1 = clamp_rate(a1, c.clamped);
    c.a.r2 = clamp_rate(q.i_vv2_b2, c.clamped);
    c.b.r1 = clamp_rate(q.i_vv1_b1, c.clamped);
    c.b.r2 = clamp_rate(q.i_v2_b2_given_v() - q.i_v1v2_v, c.clamped);
    if (c.roles_swapped) {
        std::swap(c.a.r1, c.a.r2);
        std::swap(c.b.r1, c.b.r2);
    }
    return c;
}

} // namespace detail

inline CornerPoints corner_points(const BroadcastChannelSpec& spec, const AuxiliaryStructure& aux,
                                  const CornerOptions& opt = {}) {
    return detail::corners_from(region_quantities(spec, aux), opt);
}

// ---------------------------------------------------------------------------
// Exhaustive auxiliary search: interior probability grid for the seven
// Bernoulli parameters times all 256 deterministic maps phi.

struct SearchOptions {
    int resolution = 9;
    int threads = 1;
    CornerOptions corner{};
};

struct SearchResult {
    AuxiliaryStructure aux;
    CornerPoints corners;
    RatePoint best; // the better of the two corners
    double objective = 0.0;
    std::uint64_t cells = 0;
};

inline SearchResult search_auxiliaries(const BroadcastChannelSpec& spec,
                                       const SearchOptions& opt = {}) {
    spec.validate();
    if (opt.resolution < 1) throw ConfigError("search resolution must be positive");
    std::uint64_t params = 1;
    for (int t = 0; t < 7; ++t) params *= static_cast<std::uint64_t>(opt.resolution);
    std::uint64_t cells = params * 256;
    if (!spec.classical && cells > 2'000'000)
        throw ConfigError("quantum auxiliary search over " + std::to_string(cells) +
                          " cells is not affordable; lower the resolution");

    detail::BroadcastTables tables = detail::precompute_tables(spec);
    std::vector<double> grid(opt.resolution);
    for (int t = 0; t < opt.resolution; ++t)
        grid[t] = static_cast<double>(t + 1) / static_cast<double>(opt.resolution + 1);

    struct Best {
        double objective = -1.0;
        std::uint64_t cell = 0;
        AuxiliaryStructure aux;
        CornerPoints corners;
        RatePoint point;
    };

    auto scan = [&](std::uint64_t lo, std::uint64_t hi, Best& best) {
        for (std::uint64_t pi = lo; pi < hi; ++pi) {
            std::uint64_t rest = pi;
            std::array<int, 7> digit{};
            for (int t = 6; t >= 0; --t) {
                digit[t] = static_cast<int>(rest % opt.resolution);
                rest /= opt.resolution;
            }
            AuxiliaryStructure aux;
            aux.p_v = grid[digit[0]];
            aux.p_v2_given_v = {grid[digit[1]], grid[digit[2]]};
            aux.p_v1_given_vv2 = {{{grid[digit[3]], grid[digit[4]]},
                                   {grid[digit[5]], grid[digit[6]]}}};
            std::array<double, 8> joint = detail::joint_of(aux);
            double binning = detail::binning_from_joint(joint);
            for (int f = 0; f < 256; ++f) {
                for (int c = 0; c < 8; ++c) aux.phi[c] = static_cast<std::uint8_t>((f >> c) & 1);
                RegionQuantities q = detail::quantities_from(tables, joint, aux.phi);
                q.i_v1v2_v = binning;
                CornerPoints cp = detail::corners_from(q, opt.corner);
                double oa = cp.a.r1 + cp.a.r2, ob = cp.b.r1 + cp.b.r2;
                const RatePoint& pt = ob > oa ? cp.b : cp.a;
                double obj = std::max(oa, ob);
                std::uint64_t cell = pi * 256 + static_cast<std::uint64_t>(f);
                if (obj > best.objective ||
                    (obj == best.objective && cell < best.cell) || best.objective < 0.0) {
                    best.objective = obj;
                    best.cell = cell;
                    best.aux = aux;
                    best.corners = cp;
                    best.point = pt;
                }
            }
        }
    };

    int workers = std::max(1, opt.threads);
    std::vector<Best> bests(workers);
    if (workers == 1) {
        scan(0, params, bests[0]);
    } else {
        std::uint64_t chunk = (params + workers - 1) / workers;
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            std::uint64_t lo = std::min<std::uint64_t>(params, w * chunk);
            std::uint64_t hi = std::min<std::uint64_t>(params, lo + chunk);
            pool.emplace_back([&, lo, hi, w] { scan(lo, hi, bests[w]); });
        }
        for (auto& th : pool) th.join();
    }

    Best best;
    for (const auto& b : bests) {
        if (b.objective < 0.0) continue;
        if (b.objective > best.objective ||
            (b.objective == best.objective && b.cell < best.cell) || best.objective < 0.0)
            best = b;
    }
    SearchResult out;
    out.aux = best.aux;
    out.corners = best.corners;
    out.best = best.point;
    out.objective = best.objective;
    out.cells = cells;
    return out;
}

} // namespace cqpolar
