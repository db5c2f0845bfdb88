#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cqpolar/hybrid_channel.hpp"

// Two-user broadcast channels and the binary auxiliary structure (V, V1, V2)
// with X = phi(V, V1, V2). The joint factorizes as p_V p_{V2|V} p_{V1|V,V2},
// so V1 and V2 may be conditionally dependent, which is what binning pays
// I(V1;V2|V) for. induced_cq_channel turns any (target layer, conditioning
// layers, receiver) combination into a HybridChannel whose branch register
// holds the conditioning-layer values; every polarized-set profile and every
// region quantity is computed on such induced channels.

namespace cqpolar {

enum class LayerId { v = 0, v1 = 1, v2 = 2 };

inline const char* layer_name(LayerId l) {
    switch (l) {
    case LayerId::v: return "v";
    case LayerId::v1: return "v1";
    default: return "v2";
    }
}

struct AuxiliaryStructure {
    double p_v = 0.5;                                   // P(V = 1)
    std::array<double, 2> p_v2_given_v = {0.5, 0.5};    // P(V2 = 1 | V = v)
    std::array<std::array<double, 2>, 2> p_v1_given_vv2 = {{{0.5, 0.5}, {0.5, 0.5}}};
    std::array<std::uint8_t, 8> phi = {0, 0, 0, 0, 1, 1, 1, 1}; // index v*4 + v1*2 + v2

    void validate() const {
        auto ok = [](double p) { return p >= -1e-12 && p <= 1.0 + 1e-12; };
        if (!ok(p_v) || !ok(p_v2_given_v[0]) || !ok(p_v2_given_v[1]))
            throw ConfigError("auxiliary probabilities outside [0,1]");
        for (int v = 0; v < 2; ++v)
            for (int v2 = 0; v2 < 2; ++v2)
                if (!ok(p_v1_given_vv2[v][v2]))
                    throw ConfigError("auxiliary probabilities outside [0,1]");
        for (auto b : phi)
            if (b > 1) throw ConfigError("phi values must be bits");
    }

    std::uint8_t x_of(int v, int v1, int v2) const { return phi[v * 4 + v1 * 2 + v2]; }

    double joint(int v, int v1, int v2) const {
        double pv = v ? p_v : 1.0 - p_v;
        double pv2 = v2 ? p_v2_given_v[v] : 1.0 - p_v2_given_v[v];
        double pv1 = v1 ? p_v1_given_vv2[v][v2] : 1.0 - p_v1_given_vv2[v][v2];
        return pv * pv2 * pv1;
    }

    double layer_value_probability(LayerId layer, int value) const {
        double acc = 0.0;
        for (int v = 0; v < 2; ++v)
            for (int v1 = 0; v1 < 2; ++v1)
                for (int v2 = 0; v2 < 2; ++v2) {
                    int t = layer == LayerId::v ? v : layer == LayerId::v1 ? v1 : v2;
                    if (t == value) acc += joint(v, v1, v2);
                }
        return acc;
    }

    double input_bias() const { // P(X = 1)
        double acc = 0.0;
        for (int c = 0; c < 8; ++c)
            if (phi[c]) acc += joint(c >> 2, (c >> 1) & 1, c & 1);
        return acc;
    }

    // I(V1;V2|V) in bits, the binning penalty of the region formulas
    double binning_penalty() const {
        double acc = 0.0;
        for (int v = 0; v < 2; ++v) {
            double pv = v ? p_v : 1.0 - p_v;
            if (pv <= 0.0) continue;
            double h_joint = 0.0, p1_marg = 0.0;
            for (int v2 = 0; v2 < 2; ++v2) {
                double q2 = v2 ? p_v2_given_v[v] : 1.0 - p_v2_given_v[v];
                for (int v1 = 0; v1 < 2; ++v1) {
                    double q1 = v1 ? p_v1_given_vv2[v][v2] : 1.0 - p_v1_given_vv2[v][v2];
                    h_joint -= xlog2x(q2 * q1);
                    if (v1) p1_marg += q2 * q1;
                }
            }
            double h2 = binary_entropy(p_v2_given_v[v]);
            acc += pv * (binary_entropy(p1_marg) + h2 - h_joint);
        }
        return std::max(acc, 0.0);
    }

    // exchange the receivers' private layers: V1' = V2, V2' = V1, with the
    // factorization rebuilt by Bayes so the joint is preserved
    AuxiliaryStructure swap_receivers() const {
        AuxiliaryStructure s;
        s.p_v = p_v;
        for (int v = 0; v < 2; ++v) {
            double m1 = 0.0; // P(old V1 = 1 | v)
            for (int v2 = 0; v2 < 2; ++v2) {
                double q2 = v2 ? p_v2_given_v[v] : 1.0 - p_v2_given_v[v];
                m1 += q2 * p_v1_given_vv2[v][v2];
            }
            s.p_v2_given_v[v] = m1;
            for (int a = 0; a < 2; ++a) { // new V2' = old V2 given (v, new V2 = old V1 = a)
                double pa = a ? m1 : 1.0 - m1;
                double num = 0.0;
                for (int v2 = 0; v2 < 2; ++v2) {
                    double q2 = v2 ? p_v2_given_v[v] : 1.0 - p_v2_given_v[v];
                    double q1 = a ? p_v1_given_vv2[v][v2] : 1.0 - p_v1_given_vv2[v][v2];
                    if (v2) num += q2 * q1;
                }
                s.p_v1_given_vv2[v][a] = pa > 0.0 ? num / pa : 0.5;
            }
        }
        for (int v = 0; v < 2; ++v)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    s.phi[v * 4 + a * 2 + b] = phi[v * 4 + b * 2 + a];
        return s;
    }
};

// Binary-input broadcast channel, either a joint classical table p(y1,y2|x)
// or a joint cq map x -> rho_x on B1 (x) B2. Receivers see marginals.
struct BroadcastChannelSpec {
    bool classical = true;
    std::string name = "custom";
    // classical kind: joint rows indexed y1 * y2_count + y2
    std::size_t y1_count = 0, y2_count = 0;
    std::array<std::vector<double>, 2> rows;
    // quantum kind
    Eigen::Index dim1 = 0, dim2 = 0;
    std::vector<DensityMatrix> states; // size 2 when quantum

    void validate() const {
        if (classical) {
            if (y1_count == 0 || y2_count == 0) throw ConfigError("empty output alphabet");
            for (int x = 0; x < 2; ++x) {
                if (rows[x].size() != y1_count * y2_count)
                    throw ConfigError("joint table size mismatch");
                double s = 0.0;
                for (double p : rows[x]) {
                    if (p < -1e-12) throw ConfigError("negative channel probability");
                    s += p;
                }
                if (std::abs(s - 1.0) > 1e-12) throw ConfigError("channel row does not sum to 1");
            }
        } else {
            if (states.size() != 2) throw ConfigError("quantum spec needs one state per input");
            for (const auto& st : states)
                if (st.dim() != dim1 * dim2)
                    throw ConfigError("joint state dimension does not match dim1*dim2");
        }
    }

    ClassicalChannelTable marginal_table(int receiver) const {
        std::vector<double> r0, r1;
        std::size_t m = receiver == 1 ? y1_count : y2_count;
        r0.assign(m, 0.0);
        r1.assign(m, 0.0);
        for (std::size_t a = 0; a < y1_count; ++a)
            for (std::size_t b = 0; b < y2_count; ++b) {
                std::size_t y = receiver == 1 ? a : b;
                r0[y] += rows[0][a * y2_count + b];
                r1[y] += rows[1][a * y2_count + b];
            }
        return ClassicalChannelTable(r0, r1);
    }

    DensityMatrix marginal_state(int receiver, int x) const {
        return DensityMatrix(
            partial_trace(states[x].matrix(), dim1, dim2, receiver == 1 ? 0 : 1));
    }

    BroadcastChannelSpec swap_receivers() const {
        BroadcastChannelSpec s = *this;
        s.name = name + "-swapped";
        if (classical) {
            s.y1_count = y2_count;
            s.y2_count = y1_count;
            for (int x = 0; x < 2; ++x)
                for (std::size_t a = 0; a < y1_count; ++a)
                    for (std::size_t b = 0; b < y2_count; ++b)
                        s.rows[x][b * y1_count + a] = rows[x][a * y2_count + b];
        } else {
            s.dim1 = dim2;
            s.dim2 = dim1;
            for (int x = 0; x < 2; ++x) {
                Matrix m(dim1 * dim2, dim1 * dim2);
                for (Eigen::Index i1 = 0; i1 < dim1; ++i1)
                    for (Eigen::Index j1 = 0; j1 < dim2; ++j1)
                        for (Eigen::Index i2 = 0; i2 < dim1; ++i2)
                            for (Eigen::Index j2 = 0; j2 < dim2; ++j2)
                                m(j1 * dim1 + i1, j2 * dim1 + i2) =
                                    states[x].matrix()(i1 * dim2 + j1, i2 * dim2 + j2);
                s.states[x] = DensityMatrix(m);
            }
        }
        return s;
    }
};

// ---------------------------------------------------------------------------
// Built-in channel catalog. All four are product channels (independent noise
// per receiver).

inline BroadcastChannelSpec product_classical(const ClassicalChannelTable& t1,
                                              const ClassicalChannelTable& t2,
                                              std::string name) {
    BroadcastChannelSpec s;
    s.classical = true;
    s.name = std::move(name);
    s.y1_count = t1.alphabet();
    s.y2_count = t2.alphabet();
    for (int x = 0; x < 2; ++x) {
        const auto& r1 = x ? t1.row1 : t1.row0;
        const auto& r2 = x ? t2.row1 : t2.row0;
        s.rows[x].resize(s.y1_count * s.y2_count);
        for (std::size_t a = 0; a < s.y1_count; ++a)
            for (std::size_t b = 0; b < s.y2_count; ++b)
                s.rows[x][a * s.y2_count + b] = r1[a] * r2[b];
    }
    return s;
}

inline BroadcastChannelSpec product_quantum(const std::array<DensityMatrix, 2>& r1,
                                            const std::array<DensityMatrix, 2>& r2,
                                            std::string name) {
    BroadcastChannelSpec s;
    s.classical = false;
    s.name = std::move(name);
    s.dim1 = r1[0].dim();
    s.dim2 = r2[0].dim();
    s.states.push_back(DensityMatrix(kron(r1[0].matrix(), r2[0].matrix())));
    s.states.push_back(DensityMatrix(kron(r1[1].matrix(), r2[1].matrix())));
    return s;
}

inline BroadcastChannelSpec erasure_broadcast(double e1, double e2) {
    return product_classical(erasure_table(e1), erasure_table(e2), "erasure-broadcast");
}

inline BroadcastChannelSpec symmetric_flip_broadcast(double p1, double p2) {
    return product_classical(symmetric_flip_table(p1), symmetric_flip_table(p2),
                             "symmetric-flip-broadcast");
}

// input x maps to |0> or cos(angle)|0> + sin(angle)|1>, overlap cos(angle)
inline BroadcastChannelSpec pure_state_qubit_broadcast(double angle1, double angle2) {
    auto pair_for = [](double a) {
        Vector zero(2), tilted(2);
        zero << 1.0, 0.0;
        tilted << std::cos(a), std::sin(a);
        return std::array<DensityMatrix, 2>{DensityMatrix::pure(zero), DensityMatrix::pure(tilted)};
    };
    return product_quantum(pair_for(angle1), pair_for(angle2), "pure-state-qubit-broadcast");
}

inline BroadcastChannelSpec amplitude_damping_qubit_broadcast(double g1, double g2) {
    auto pair_for = [](double g) {
        return std::array<DensityMatrix, 2>{DensityMatrix::diagonal({1.0, 0.0}),
                                            DensityMatrix::diagonal({g, 1.0 - g})};
    };
    return product_quantum(pair_for(g1), pair_for(g2), "amplitude-damping-qubit-broadcast");
}

// ---------------------------------------------------------------------------
// Induced channels.

struct Conditioning {
    bool on_v = false;
    bool on_v2 = false;
    int receiver = 0; // 0 = no channel output in the conditioning

    std::string describe() const {
        std::string s;
        if (on_v) s += "v";
        if (on_v2) s += s.empty() ? "v2" : ",v2";
        if (receiver) s += (s.empty() ? "b" : ",b") + std::to_string(receiver);
        return s.empty() ? "none" : s;
    }
};

inline void check_combination(LayerId target, const Conditioning& c) {
    if (c.receiver < 0 || c.receiver > 2) throw ConfigError("receiver must be 0, 1, or 2");
    bool ok = false;
    switch (target) {
    case LayerId::v: ok = !c.on_v && !c.on_v2; break;
    case LayerId::v2: ok = !c.on_v2; break;
    case LayerId::v1: ok = c.on_v || !c.on_v2; break; // v2 alone is not a scheme channel
    }
    if (!ok)
        throw ConfigError(std::string("unsupported conditioning for layer ") +
                          layer_name(target));
}

// Effective binary-input channel for one layer: input is the layer value with
// its marginal prior, the branch register holds the conditioning layers, and
// the payload is the receiver's output state averaged over the layers that
// are neither input nor conditioning.
inline HybridChannel induced_cq_channel(const BroadcastChannelSpec& spec,
                                        const AuxiliaryStructure& aux, LayerId target,
                                        const Conditioning& cond, SynthesisBudget budget = {}) {
    spec.validate();
    aux.validate();
    check_combination(target, cond);
    int side_count = (cond.on_v ? 2 : 1) * (cond.on_v2 ? 2 : 1);
    bool quantum = !spec.classical && cond.receiver != 0;
    std::size_t ycount = cond.receiver == 0
                             ? 1
                             : (cond.receiver == 1 ? spec.y1_count : spec.y2_count);
    Eigen::Index pd = 1;
    std::array<DensityMatrix, 2> mstates = {DensityMatrix::diagonal({1.0}),
                                            DensityMatrix::diagonal({1.0})};
    ClassicalChannelTable mtable = ClassicalChannelTable({1.0}, {1.0});
    if (cond.receiver != 0) {
        if (quantum) {
            mstates = {spec.marginal_state(cond.receiver, 0), spec.marginal_state(cond.receiver, 1)};
            pd = mstates[0].dim();
        } else {
            mtable = spec.marginal_table(cond.receiver);
        }
    } else {
        ycount = 1;
    }

    // acc[s][t]: either a pd x pd matrix or a length-ycount probability row
    std::vector<std::array<Matrix, 2>> qacc;
    std::vector<std::array<std::vector<double>, 2>> cacc;
    if (quantum)
        qacc.assign(side_count, {Matrix::Zero(pd, pd), Matrix::Zero(pd, pd)});
    else
        cacc.assign(side_count,
                    {std::vector<double>(ycount, 0.0), std::vector<double>(ycount, 0.0)});

    double pt[2] = {0.0, 0.0};
    for (int v = 0; v < 2; ++v)
        for (int v1 = 0; v1 < 2; ++v1)
            for (int v2 = 0; v2 < 2; ++v2) {
                double p = aux.joint(v, v1, v2);
                if (p <= 0.0) continue;
                int t = target == LayerId::v ? v : target == LayerId::v1 ? v1 : v2;
                int s = (cond.on_v ? v : 0) * (cond.on_v2 ? 2 : 1) + (cond.on_v2 ? v2 : 0);
                int x = aux.x_of(v, v1, v2);
                pt[t] += p;
                if (quantum) {
                    qacc[s][t] += p * mstates[x].matrix();
                } else if (cond.receiver != 0) {
                    const auto& row = x ? mtable.row1 : mtable.row0;
                    for (std::size_t y = 0; y < ycount; ++y) cacc[s][t][y] += p * row[y];
                } else {
                    cacc[s][t][0] += p;
                }
            }

    HybridChannel w;
    w.kind = quantum ? PayloadKind::quantum : PayloadKind::classical_table;
    w.budget = budget;
    w.p0 = pt[0];
    w.p1 = pt[1];
    auto scaled = [&](int s, int t, std::size_t y) -> double {
        // a degenerate layer marginal leaves the opposite column's statistics
        int src = pt[t] > 1e-12 ? t : 1 - t;
        return cacc[s][src][y] / std::max(pt[src], 1e-300);
    };
    if (quantum) {
        for (int s = 0; s < side_count; ++s) {
            HybridBranch br;
            int s0 = pt[0] > 1e-12 ? 0 : 1, s1 = pt[1] > 1e-12 ? 1 : 0;
            br.a0 = qacc[s][s0] / std::max(pt[s0], 1e-300);
            br.a1 = qacc[s][s1] / std::max(pt[s1], 1e-300);
            w.branches.push_back(std::move(br));
        }
    } else {
        for (int s = 0; s < side_count; ++s)
            for (std::size_t y = 0; y < ycount; ++y) {
                HybridBranch br;
                br.a0 = Matrix::Constant(1, 1, scaled(s, 0, y));
                br.a1 = Matrix::Constant(1, 1, scaled(s, 1, y));
                w.branches.push_back(std::move(br));
            }
    }
    w.tidy();
    w.validate();
    return w;
}

// Flattened classical view of the same induced channel, for the Monte Carlo
// path: outputs enumerate (side value, receiver symbol) pairs.
struct InducedTable {
    ClassicalChannelTable table;
    double p0 = 0.5, p1 = 0.5;
    int side_count = 1;
    std::size_t y_count = 1;
};

inline InducedTable induced_classical_table(const BroadcastChannelSpec& spec,
                                            const AuxiliaryStructure& aux, LayerId target,
                                            const Conditioning& cond) {
    if (!spec.classical && cond.receiver != 0)
        throw ConfigError("classical view requires a classical channel spec");
    spec.validate();
    aux.validate();
    check_combination(target, cond);
    int side_count = (cond.on_v ? 2 : 1) * (cond.on_v2 ? 2 : 1);
    std::size_t ycount = cond.receiver == 0
                             ? 1
                             : (cond.receiver == 1 ? spec.y1_count : spec.y2_count);
    ClassicalChannelTable mtable = cond.receiver == 0 ? ClassicalChannelTable({1.0}, {1.0})
                                                      : spec.marginal_table(cond.receiver);
    std::vector<std::array<double, 2>> acc(side_count * ycount, {0.0, 0.0});
    double pt[2] = {0.0, 0.0};
    for (int v = 0; v < 2; ++v)
        for (int v1 = 0; v1 < 2; ++v1)
            for (int v2 = 0; v2 < 2; ++v2) {
                double p = aux.joint(v, v1, v2);
                if (p <= 0.0) continue;
                int t = target == LayerId::v ? v : target == LayerId::v1 ? v1 : v2;
                int s = (cond.on_v ? v : 0) * (cond.on_v2 ? 2 : 1) + (cond.on_v2 ? v2 : 0);
                int x = aux.x_of(v, v1, v2);
                pt[t] += p;
                const auto& row = x ? mtable.row1 : mtable.row0;
                for (std::size_t y = 0; y < ycount; ++y) acc[s * ycount + y][t] += p * row[y];
            }
    InducedTable out;
    out.side_count = side_count;
    out.y_count = ycount;
    out.p0 = pt[0];
    out.p1 = pt[1];
    std::vector<double> r0(acc.size()), r1(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        int s0 = pt[0] > 1e-12 ? 0 : 1, s1 = pt[1] > 1e-12 ? 1 : 0;
        r0[i] = acc[i][s0] / std::max(pt[s0], 1e-300);
        r1[i] = acc[i][s1] / std::max(pt[s1], 1e-300);
    }
    out.table = ClassicalChannelTable(r0, r1);
    return out;
}

} // namespace cqpolar
