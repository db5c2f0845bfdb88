#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cqpolar/cqpolar.hpp"

using namespace cqpolar;

namespace {

double uniform01(std::uint64_t seed, std::uint64_t k) { return seed_to_unit(derive_seed(seed, k)); }

// probabilities kept inside [0.1, 0.9] so no layer marginal degenerates
AuxiliaryStructure random_aux(std::uint64_t seed) {
    AuxiliaryStructure a;
    a.p_v = 0.1 + 0.8 * uniform01(seed, 0);
    for (int v = 0; v < 2; ++v) {
        a.p_v2_given_v[v] = 0.1 + 0.8 * uniform01(seed, 1 + v);
        for (int v2 = 0; v2 < 2; ++v2)
            a.p_v1_given_vv2[v][v2] = 0.1 + 0.8 * uniform01(seed, 3 + 2 * v + v2);
    }
    for (int c = 0; c < 8; ++c) a.phi[c] = seed_to_bit(derive_seed(seed, 16 + c));
    return a;
}

// non-product joint table p(y1, y2 | x), normalized random cells
BroadcastChannelSpec random_classical_spec(std::uint64_t seed, std::size_t m1, std::size_t m2) {
    BroadcastChannelSpec s;
    s.classical = true;
    s.name = "random";
    s.y1_count = m1;
    s.y2_count = m2;
    for (int x = 0; x < 2; ++x) {
        s.rows[x].resize(m1 * m2);
        double tot = 0.0;
        for (std::size_t c = 0; c < m1 * m2; ++c) {
            s.rows[x][c] = uniform01(seed, 100 * x + c) + 1e-3;
            tot += s.rows[x][c];
        }
        for (auto& p : s.rows[x]) p /= tot;
    }
    return s;
}

DensityMatrix random_state(std::uint64_t seed, Eigen::Index d) {
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            a(i, j) = Complex(uniform01(seed, 2 * (i * d + j)) - 0.5,
                              uniform01(seed, 2 * (i * d + j) + 1) - 0.5);
    Matrix rho = a * a.adjoint();
    return DensityMatrix(rho / rho.trace().real());
}

// joint cq spec on C^d1 (x) C^d2 with entangled-looking random states
BroadcastChannelSpec random_quantum_spec(std::uint64_t seed, Eigen::Index d1, Eigen::Index d2) {
    BroadcastChannelSpec s;
    s.classical = false;
    s.name = "random-quantum";
    s.dim1 = d1;
    s.dim2 = d2;
    s.states.push_back(random_state(derive_seed(seed, 0), d1 * d2));
    s.states.push_back(random_state(derive_seed(seed, 1), d1 * d2));
    return s;
}

int target_value(LayerId t, int v, int v1, int v2) {
    return t == LayerId::v ? v : t == LayerId::v1 ? v1 : v2;
}

int side_value(const Conditioning& c, int v, int v2) {
    return (c.on_v ? v : 0) * (c.on_v2 ? 2 : 1) + (c.on_v2 ? v2 : 0);
}

// the eight layer/conditioning combinations the coding scheme uses
struct Combo {
    LayerId target;
    Conditioning cond;
};

std::vector<Combo> scheme_combos() {
    return {{LayerId::v, {}},
            {LayerId::v, {false, false, 1}},
            {LayerId::v, {false, false, 2}},
            {LayerId::v2, {true, false, 0}},
            {LayerId::v2, {true, false, 2}},
            {LayerId::v1, {true, false, 0}},
            {LayerId::v1, {true, false, 1}},
            {LayerId::v1, {true, true, 0}}};
}

// Z and I of an induced layer channel by direct enumeration of the joint
// distribution p(t, s, y) over target bit, conditioning cell, and receiver
// symbol, marginalizing the broadcast table by hand.
struct ClassicalEnumeration {
    double z = 0.0, info = 0.0;

    ClassicalEnumeration(const BroadcastChannelSpec& spec, const AuxiliaryStructure& aux,
                         LayerId target, const Conditioning& cond) {
        int sides = (cond.on_v ? 2 : 1) * (cond.on_v2 ? 2 : 1);
        std::size_t ycount =
            cond.receiver == 0 ? 1 : (cond.receiver == 1 ? spec.y1_count : spec.y2_count);
        std::vector<std::array<double, 2>> joint(sides * ycount, {0.0, 0.0});
        for (int v = 0; v < 2; ++v)
            for (int v1 = 0; v1 < 2; ++v1)
                for (int v2 = 0; v2 < 2; ++v2) {
                    double p = aux.joint(v, v1, v2);
                    int t = target_value(target, v, v1, v2);
                    int s = side_value(cond, v, v2);
                    int x = aux.x_of(v, v1, v2);
                    for (std::size_t y = 0; y < ycount; ++y) {
                        double py = 1.0;
                        if (cond.receiver == 1) {
                            py = 0.0;
                            for (std::size_t b = 0; b < spec.y2_count; ++b)
                                py += spec.rows[x][y * spec.y2_count + b];
                        } else if (cond.receiver == 2) {
                            py = 0.0;
                            for (std::size_t a = 0; a < spec.y1_count; ++a)
                                py += spec.rows[x][a * spec.y2_count + y];
                        }
                        joint[s * ycount + y][t] += p * py;
                    }
                }
        double pt0 = 0.0, pt1 = 0.0, h_out = 0.0, h_joint = 0.0;
        for (const auto& cell : joint) {
            pt0 += cell[0];
            pt1 += cell[1];
            z += 2.0 * std::sqrt(cell[0] * cell[1]);
            h_out -= xlog2x(cell[0] + cell[1]);
            h_joint -= xlog2x(cell[0]);
            h_joint -= xlog2x(cell[1]);
        }
        info = binary_entropy(pt1) + h_out - h_joint;
    }
};

// quantum counterpart: per conditioning cell s accumulate the subnormalized
// receiver states a_t = sum p(s, y-marginal | t) rho_x, then Z from pairwise
// fidelities and I from a block-diagonal Holevo quantity
struct QuantumEnumeration {
    double z = 0.0, info = 0.0;

    QuantumEnumeration(const BroadcastChannelSpec& spec, const AuxiliaryStructure& aux,
                       LayerId target, const Conditioning& cond) {
        int sides = (cond.on_v ? 2 : 1) * (cond.on_v2 ? 2 : 1);
        Eigen::Index pd = cond.receiver == 1 ? spec.dim1 : spec.dim2;
        std::vector<std::array<Matrix, 2>> acc(
            sides, {Matrix::Zero(pd, pd), Matrix::Zero(pd, pd)});
        double pt[2] = {0.0, 0.0};
        for (int v = 0; v < 2; ++v)
            for (int v1 = 0; v1 < 2; ++v1)
                for (int v2 = 0; v2 < 2; ++v2) {
                    double p = aux.joint(v, v1, v2);
                    int t = target_value(target, v, v1, v2);
                    int s = side_value(cond, v, v2);
                    int x = aux.x_of(v, v1, v2);
                    Matrix m = partial_trace(spec.states[x].matrix(), spec.dim1, spec.dim2,
                                             cond.receiver == 1 ? 0 : 1);
                    acc[s][t] += p * m;
                    pt[t] += p;
                }
        std::vector<double> w0(sides), w1(sides);
        std::vector<Matrix> blk0(sides), blk1(sides);
        for (int s = 0; s < sides; ++s) {
            double q0 = acc[s][0].trace().real(), q1 = acc[s][1].trace().real();
            DensityMatrix r0(acc[s][0] / std::max(q0, 1e-300));
            DensityMatrix r1(acc[s][1] / std::max(q1, 1e-300));
            z += 2.0 * std::sqrt(q0 * q1) * fidelity_sqrt(r0, r1);
            w0[s] = q0 / pt[0];
            w1[s] = q1 / pt[1];
            blk0[s] = r0.matrix();
            blk1[s] = r1.matrix();
        }
        DensityMatrix s0(detail::block_diagonal(w0, blk0)), s1(detail::block_diagonal(w1, blk1));
        info = holevo_information({pt[0], pt[1]}, {s0, s1});
    }
};

} // namespace

TEST(BroadcastChannel, AuxiliaryMarginalsAndBias) {
    for (int k = 0; k < 50; ++k) {
        AuxiliaryStructure a = random_aux(derive_seed(0xa0c1, k));
        double tot = 0.0, bias = 0.0;
        for (int v = 0; v < 2; ++v)
            for (int v1 = 0; v1 < 2; ++v1)
                for (int v2 = 0; v2 < 2; ++v2) {
                    tot += a.joint(v, v1, v2);
                    if (a.x_of(v, v1, v2)) bias += a.joint(v, v1, v2);
                }
        EXPECT_NEAR(tot, 1.0, 1e-14);
        EXPECT_NEAR(a.input_bias(), bias, 1e-14);
        for (LayerId l : {LayerId::v, LayerId::v1, LayerId::v2})
            EXPECT_NEAR(a.layer_value_probability(l, 0) + a.layer_value_probability(l, 1), 1.0,
                        1e-14);
        EXPECT_NEAR(a.layer_value_probability(LayerId::v, 1), a.p_v, 1e-14);
    }
}

TEST(BroadcastChannel, BinningPenaltyMatchesJointEntropyOracle) {
    for (int k = 0; k < 50; ++k) {
        AuxiliaryStructure a = random_aux(derive_seed(0xb1a5, k));
        // I(V1;V2|V) recomputed from the flat 8-cell joint distribution
        double cmi = 0.0;
        for (int v = 0; v < 2; ++v) {
            double pv = 0.0, q1[2] = {0.0, 0.0}, q2[2] = {0.0, 0.0};
            double cells[2][2];
            for (int v1 = 0; v1 < 2; ++v1)
                for (int v2 = 0; v2 < 2; ++v2) {
                    cells[v1][v2] = a.joint(v, v1, v2);
                    pv += cells[v1][v2];
                    q1[v1] += cells[v1][v2];
                    q2[v2] += cells[v1][v2];
                }
            for (int v1 = 0; v1 < 2; ++v1)
                for (int v2 = 0; v2 < 2; ++v2)
                    cmi += xlog2x(cells[v1][v2]);
            for (int b = 0; b < 2; ++b) cmi -= xlog2x(q1[b]) + xlog2x(q2[b]);
            cmi += xlog2x(pv);
        }
        EXPECT_NEAR(a.binning_penalty(), std::max(cmi, 0.0), 1e-11) << "k=" << k;
    }
    // independent V1, V2 given V: penalty exactly zero
    AuxiliaryStructure ind;
    ind.p_v1_given_vv2 = {{{0.3, 0.3}, {0.8, 0.8}}};
    EXPECT_NEAR(ind.binning_penalty(), 0.0, 1e-14);
    // perfectly correlated pair: penalty is one bit
    AuxiliaryStructure cor;
    cor.p_v1_given_vv2 = {{{0.0, 1.0}, {0.0, 1.0}}};
    EXPECT_NEAR(cor.binning_penalty(), 1.0, 1e-12);
}

TEST(BroadcastChannel, SwapReceiversPreservesJointAndPhi) {
    for (int k = 0; k < 30; ++k) {
        AuxiliaryStructure a = random_aux(derive_seed(0x5a44, k));
        AuxiliaryStructure s = a.swap_receivers();
        for (int v = 0; v < 2; ++v)
            for (int b1 = 0; b1 < 2; ++b1)
                for (int b2 = 0; b2 < 2; ++b2) {
                    EXPECT_NEAR(s.joint(v, b1, b2), a.joint(v, b2, b1), 1e-13);
                    EXPECT_EQ(s.x_of(v, b1, b2), a.x_of(v, b2, b1));
                }
        AuxiliaryStructure twice = s.swap_receivers();
        for (int v = 0; v < 2; ++v)
            for (int b1 = 0; b1 < 2; ++b1)
                for (int b2 = 0; b2 < 2; ++b2)
                    EXPECT_NEAR(twice.joint(v, b1, b2), a.joint(v, b1, b2), 1e-13);
        EXPECT_EQ(twice.phi, a.phi);
        EXPECT_NEAR(s.binning_penalty(), a.binning_penalty(), 1e-11);
        EXPECT_NEAR(s.input_bias(), a.input_bias(), 1e-13);
    }
}

TEST(BroadcastChannel, SwapReceiversHandlesDegenerateLayer) {
    AuxiliaryStructure a;
    a.p_v1_given_vv2 = {{{0.0, 0.0}, {0.0, 0.0}}}; // V1 identically zero
    AuxiliaryStructure s = a.swap_receivers();
    for (int v = 0; v < 2; ++v)
        for (int b1 = 0; b1 < 2; ++b1)
            for (int b2 = 0; b2 < 2; ++b2)
                EXPECT_NEAR(s.joint(v, b1, b2), a.joint(v, b2, b1), 1e-13);
}

TEST(BroadcastChannel, SpecSwapClassical) {
    BroadcastChannelSpec spec = erasure_broadcast(0.3, 0.5);
    BroadcastChannelSpec sw = spec.swap_receivers();
    EXPECT_EQ(sw.y1_count, spec.y2_count);
    EXPECT_EQ(sw.y2_count, spec.y1_count);
    for (int x = 0; x < 2; ++x)
        for (std::size_t a = 0; a < spec.y1_count; ++a)
            for (std::size_t b = 0; b < spec.y2_count; ++b)
                EXPECT_DOUBLE_EQ(sw.rows[x][b * spec.y1_count + a],
                                 spec.rows[x][a * spec.y2_count + b]);
    ClassicalChannelTable m1 = sw.marginal_table(1), t2 = spec.marginal_table(2);
    for (std::size_t y = 0; y < m1.alphabet(); ++y) {
        EXPECT_DOUBLE_EQ(m1.row0[y], t2.row0[y]);
        EXPECT_DOUBLE_EQ(m1.row1[y], t2.row1[y]);
    }
    BroadcastChannelSpec twice = sw.swap_receivers();
    EXPECT_EQ(twice.rows[0], spec.rows[0]);
    EXPECT_EQ(twice.rows[1], spec.rows[1]);
}

TEST(BroadcastChannel, SpecSwapQuantum) {
    BroadcastChannelSpec spec = random_quantum_spec(0x9b3e, 2, 3);
    BroadcastChannelSpec sw = spec.swap_receivers();
    EXPECT_EQ(sw.dim1, 3);
    EXPECT_EQ(sw.dim2, 2);
    for (int x = 0; x < 2; ++x) {
        EXPECT_NEAR((sw.marginal_state(1, x).matrix() - spec.marginal_state(2, x).matrix()).norm(),
                    0.0, 1e-12);
        EXPECT_NEAR((sw.marginal_state(2, x).matrix() - spec.marginal_state(1, x).matrix()).norm(),
                    0.0, 1e-12);
        BroadcastChannelSpec twice = sw.swap_receivers();
        EXPECT_NEAR((twice.states[x].matrix() - spec.states[x].matrix()).norm(), 0.0, 1e-12);
    }
}

TEST(BroadcastChannel, BuiltinCatalog) {
    BroadcastChannelSpec er = erasure_broadcast(0.3, 0.5);
    er.validate();
    ClassicalChannelTable e1 = er.marginal_table(1);
    EXPECT_EQ(e1.alphabet(), 3u);
    EXPECT_NEAR(e1.row0[0], 0.7, 1e-15);
    EXPECT_NEAR(e1.row0[1], 0.0, 1e-15);
    EXPECT_NEAR(e1.row0[2], 0.3, 1e-15);
    EXPECT_NEAR(classical_mutual_information(e1, 0.5, 0.5), 0.7, 1e-12);
    EXPECT_NEAR(classical_mutual_information(er.marginal_table(2), 0.5, 0.5), 0.5, 1e-12);
    EXPECT_NEAR(classical_bhattacharyya_z(e1, 0.5, 0.5), 0.3, 1e-12);

    BroadcastChannelSpec fl = symmetric_flip_broadcast(0.11, 0.2);
    fl.validate();
    ClassicalChannelTable f1 = fl.marginal_table(1);
    EXPECT_NEAR(f1.row0[0], 0.89, 1e-15);
    EXPECT_NEAR(f1.row1[0], 0.11, 1e-15);
    EXPECT_NEAR(classical_mutual_information(f1, 0.5, 0.5), 1.0 - binary_entropy(0.11), 1e-12);
    EXPECT_NEAR(classical_bhattacharyya_z(f1, 0.5, 0.5), 2.0 * std::sqrt(0.11 * 0.89), 1e-12);

    double th1 = 0.7, th2 = 0.4;
    BroadcastChannelSpec ps = pure_state_qubit_broadcast(th1, th2);
    ps.validate();
    for (int x = 0; x < 2; ++x) EXPECT_NEAR(ps.states[x].matrix().trace().real(), 1.0, 1e-12);
    EXPECT_NEAR(fidelity_sqrt(ps.marginal_state(1, 0), ps.marginal_state(1, 1)), std::cos(th1),
                1e-9);
    EXPECT_NEAR(fidelity_sqrt(ps.marginal_state(2, 0), ps.marginal_state(2, 1)), std::cos(th2),
                1e-9);
    // uniform mixture of pure states with overlap c has eigenvalues (1 +- c)/2
    CqEnsemble ens(0.5, 0.5, ps.marginal_state(1, 0), ps.marginal_state(1, 1));
    EXPECT_NEAR(holevo_information(ens), binary_entropy(0.5 * (1.0 + std::cos(th1))), 1e-10);

    BroadcastChannelSpec ad = amplitude_damping_qubit_broadcast(0.25, 0.6);
    ad.validate();
    EXPECT_NEAR(fidelity_sqrt(ad.marginal_state(1, 0), ad.marginal_state(1, 1)), std::sqrt(0.25),
                1e-9);
    EXPECT_NEAR(fidelity_sqrt(ad.marginal_state(2, 0), ad.marginal_state(2, 1)), std::sqrt(0.6),
                1e-9);
}

TEST(BroadcastChannel, InducedChannelMatchesEnumerationClassical) {
    for (int k = 0; k < 10; ++k) {
        BroadcastChannelSpec spec = random_classical_spec(derive_seed(0xc1a5, k), 2, 3);
        AuxiliaryStructure aux = random_aux(derive_seed(0xc1a6, k));
        for (const auto& combo : scheme_combos()) {
            HybridChannel w = induced_cq_channel(spec, aux, combo.target, combo.cond);
            ClassicalEnumeration oracle(spec, aux, combo.target, combo.cond);
            EXPECT_NEAR(channel_Z(w), oracle.z, 1e-12)
                << "k=" << k << " " << layer_name(combo.target) << "|" << combo.cond.describe();
            EXPECT_NEAR(channel_I(w), oracle.info, 1e-11)
                << "k=" << k << " " << layer_name(combo.target) << "|" << combo.cond.describe();
            // the flattened Monte Carlo view agrees with the hybrid route
            InducedTable flat = induced_classical_table(spec, aux, combo.target, combo.cond);
            EXPECT_NEAR(classical_bhattacharyya_z(flat.table, flat.p0, flat.p1), oracle.z, 1e-12);
            EXPECT_NEAR(classical_mutual_information(flat.table, flat.p0, flat.p1), oracle.info,
                        1e-11);
        }
    }
}

TEST(BroadcastChannel, InducedChannelMatchesEnumerationQuantum) {
    for (int k = 0; k < 4; ++k) {
        BroadcastChannelSpec spec = random_quantum_spec(derive_seed(0xd1a5, k), 2, 3);
        AuxiliaryStructure aux = random_aux(derive_seed(0xd1a6, k));
        for (const auto& combo : scheme_combos()) {
            if (combo.cond.receiver == 0) continue; // no output register, covered above
            HybridChannel w = induced_cq_channel(spec, aux, combo.target, combo.cond);
            ASSERT_EQ(w.kind, PayloadKind::quantum);
            QuantumEnumeration oracle(spec, aux, combo.target, combo.cond);
            EXPECT_NEAR(channel_Z(w), oracle.z, 5e-8)
                << "k=" << k << " " << layer_name(combo.target) << "|" << combo.cond.describe();
            EXPECT_NEAR(channel_I(w), oracle.info, 1e-8)
                << "k=" << k << " " << layer_name(combo.target) << "|" << combo.cond.describe();
        }
    }
}

TEST(BroadcastChannel, QuantumSpecReceiverlessConditioningIsClassical) {
    BroadcastChannelSpec spec = random_quantum_spec(0x77aa, 2, 2);
    AuxiliaryStructure aux = random_aux(0x77ab);
    HybridChannel w = induced_cq_channel(spec, aux, LayerId::v2, {true, false, 0});
    EXPECT_EQ(w.kind, PayloadKind::classical_table);
    ClassicalEnumeration oracle(spec, aux, LayerId::v2, {true, false, 0});
    EXPECT_NEAR(channel_Z(w), oracle.z, 1e-12);
    EXPECT_NEAR(channel_I(w), oracle.info, 1e-11);
}

TEST(BroadcastChannel, MuxReductionToErasureChannels) {
    // multiplexer: x follows v1 when v = 0 and v2 when v = 1, so each private
    // layer is masked half the time and the layer channels collapse to
    // erasure channels with the combined erasure probabilities
    BroadcastChannelSpec spec = erasure_broadcast(0.3, 0.5);
    AuxiliaryStructure aux;
    aux.phi = {0, 0, 1, 1, 0, 1, 0, 1};
    HybridChannel w1 = induced_cq_channel(spec, aux, LayerId::v1, {true, false, 1});
    EXPECT_NEAR(channel_Z(w1), 0.65, 1e-12);
    EXPECT_NEAR(channel_I(w1), 0.35, 1e-12);
    HybridChannel w2 = induced_cq_channel(spec, aux, LayerId::v2, {true, false, 2});
    EXPECT_NEAR(channel_Z(w2), 0.75, 1e-12);
    EXPECT_NEAR(channel_I(w2), 0.25, 1e-12);
}

TEST(BroadcastChannel, CheckCombinationRules) {
    for (int ti = 0; ti < 3; ++ti) {
        LayerId t = static_cast<LayerId>(ti);
        for (int ov = 0; ov < 2; ++ov)
            for (int o2 = 0; o2 < 2; ++o2)
                for (int r = 0; r <= 2; ++r) {
                    Conditioning c{ov != 0, o2 != 0, r};
                    bool valid = t == LayerId::v    ? !c.on_v && !c.on_v2
                                 : t == LayerId::v2 ? !c.on_v2
                                                    : (c.on_v || !c.on_v2);
                    if (valid)
                        EXPECT_NO_THROW(check_combination(t, c));
                    else
                        EXPECT_THROW(check_combination(t, c), ConfigError);
                }
    }
    EXPECT_THROW(check_combination(LayerId::v, {false, false, 3}), ConfigError);
    EXPECT_THROW(check_combination(LayerId::v, {false, false, -1}), ConfigError);
}

TEST(BroadcastChannel, ValidationRejectsBadSpecs) {
    BroadcastChannelSpec s = erasure_broadcast(0.3, 0.5);
    s.rows[0][0] += 0.1;
    EXPECT_THROW(s.validate(), ConfigError);
    BroadcastChannelSpec q = pure_state_qubit_broadcast(0.3, 0.3);
    q.states.pop_back();
    EXPECT_THROW(q.validate(), ConfigError);
    BroadcastChannelSpec d = pure_state_qubit_broadcast(0.3, 0.3);
    d.dim2 = 3;
    EXPECT_THROW(d.validate(), ConfigError);
    AuxiliaryStructure a;
    a.p_v = 1.5;
    EXPECT_THROW(a.validate(), ConfigError);
    AuxiliaryStructure b;
    b.phi[3] = 2;
    EXPECT_THROW(b.validate(), ConfigError);
}
