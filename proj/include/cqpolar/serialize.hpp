#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqpolar/broadcast_code.hpp"
#include "cqpolar/rate_region.hpp"

// CSV and JSON emitters. Every CSV starts with a comment row carrying the
// tool version and the config hash, then a header row; numbers are printed
// with %.17g so reruns are byte-identical.

namespace cqpolar {

inline constexpr const char* kToolVersion = "0.1.0";

struct Provenance {
    std::uint64_t config_hash = 0;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_hash(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace detail

inline std::string csv_comment(const Provenance& p) {
    return std::string("# cqpolar ") + kToolVersion + " config=" + detail::fmt_hash(p.config_hash) +
           "\n";
}

inline std::string profile_to_csv(const PolarizationProfile& p, const Provenance& prov) {
    std::string s = csv_comment(prov);
    s += "index,Z,method,half_width\n";
    for (std::size_t i = 0; i < p.n; ++i) {
        s += std::to_string(i + 1) + ',' + detail::fmt_double(p.z[i]) + ',' + p.method() + ',';
        s += detail::fmt_double(p.half_width.empty() ? 0.0 : p.half_width[i]);
        s += '\n';
    }
    return s;
}

inline std::string trials_to_csv(const std::vector<TransmissionRecord>& records,
                                 const Provenance& prov) {
    std::string s = csv_comment(prov);
    s += "trial,m1_ok,m2_ok,m0_ok,m1_bad_blocks,m2_bad_blocks\n";
    for (std::size_t t = 0; t < records.size(); ++t) {
        const auto& r = records[t];
        s += std::to_string(t + 1) + ',' + (r.ok1 ? '1' : '0') + ',' + (r.ok2 ? '1' : '0') + ',' +
             (r.ok0 ? '1' : '0') + ',' + std::to_string(r.bad_blocks1) + ',' +
             std::to_string(r.bad_blocks2) + '\n';
    }
    return s;
}

namespace detail {

inline std::string aux_csv_fields(const AuxiliaryStructure& aux) {
    std::string s = fmt_double(aux.p_v);
    s += ',' + fmt_double(aux.p_v2_given_v[0]) + ',' + fmt_double(aux.p_v2_given_v[1]);
    for (int v = 0; v < 2; ++v)
        for (int v2 = 0; v2 < 2; ++v2) s += ',' + fmt_double(aux.p_v1_given_vv2[v][v2]);
    s += ',';
    for (int c = 0; c < 8; ++c) s += static_cast<char>('0' + aux.phi[c]);
    return s;
}

inline const char* aux_csv_header() {
    return "p_v,p_v2_given_v0,p_v2_given_v1,p_v1_given_00,p_v1_given_01,p_v1_given_10,"
           "p_v1_given_11,phi";
}

} // namespace detail

inline std::string region_to_csv(const AuxiliaryStructure& aux, const RegionBounds& bounds,
                                 const CornerPoints& corners, const Provenance& prov) {
    std::string s = csv_comment(prov);
    s += detail::aux_csv_header();
    s += ",r1_max,r2_max,sum_a,sum_b,r0_max,r01_max,r02_max,sum0_a,sum0_b,"
         "corner_a_r1,corner_a_r2,corner_b_r1,corner_b_r2\n";
    s += detail::aux_csv_fields(aux);
    for (double v : {bounds.r1_max, bounds.r2_max, bounds.sum_a, bounds.sum_b, bounds.r0_max,
                     bounds.r01_max, bounds.r02_max, bounds.sum0_a, bounds.sum0_b, corners.a.r1,
                     corners.a.r2, corners.b.r1, corners.b.r2})
        s += ',' + detail::fmt_double(v);
    s += '\n';
    return s;
}

inline std::string search_to_csv(const SearchResult& r, const Provenance& prov) {
    std::string s = csv_comment(prov);
    s += detail::aux_csv_header();
    s += ",corner_a_r1,corner_a_r2,corner_b_r1,corner_b_r2,best_r1,best_r2,objective,cells\n";
    s += detail::aux_csv_fields(r.aux);
    for (double v : {r.corners.a.r1, r.corners.a.r2, r.corners.b.r1, r.corners.b.r2, r.best.r1,
                     r.best.r2, r.objective})
        s += ',' + detail::fmt_double(v);
    s += ',' + std::to_string(r.cells) + '\n';
    return s;
}

inline std::string error_bound_to_csv(const ErrorBoundReport& r, const Provenance& prov) {
    std::string s = csv_comment(prov);
    s += "receiver,superposition,private,total,from_exact_profiles\n";
    s += "1," + detail::fmt_double(r.rx1_superposition) + ',' + detail::fmt_double(r.rx1_private) +
         ',' + detail::fmt_double(r.rx1()) + ',' + (r.from_exact_profiles ? '1' : '0') + '\n';
    s += "2," + detail::fmt_double(r.rx2_superposition) + ',' + detail::fmt_double(r.rx2_private) +
         ',' + detail::fmt_double(r.rx2()) + ',' + (r.from_exact_profiles ? '1' : '0') + '\n';
    return s;
}

// ---------------------------------------------------------------------------
// JSON dumps.

inline nlohmann::json index_set_to_json(const IndexSet& s) {
    return nlohmann::json(s.idx);
}

inline nlohmann::json schedule_to_json(const ChainingSchedule& s) {
    nlohmann::json j;
    j["k"] = s.k;
    j["B2"] = s.B2.idx;
    j["B1"] = s.B1.idx;
    j["Rbin"] = s.Rbin.idx;
    j["F1"] = s.F1.idx;
    j["directions"] = {{"encode_v", direction_name(s.encode_v)},
                       {"encode_v1", direction_name(s.encode_v1)},
                       {"encode_v2", direction_name(s.encode_v2)},
                       {"rx1_v", direction_name(s.rx1_v)},
                       {"rx1_v1", direction_name(s.rx1_v1)},
                       {"rx2_v", direction_name(s.rx2_v)},
                       {"rx2_v2", direction_name(s.rx2_v2)}};
    return j;
}

inline nlohmann::json code_to_json(const BroadcastPolarCode& c) {
    nlohmann::json j;
    j["n"] = c.n;
    j["k"] = c.k;
    j["swapped"] = c.swapped;
    j["shared_seed"] = c.shared_seed;
    j["message_fraction"] = c.message_fraction;
    j["thresholds"] = {{"delta_high", c.thresholds.delta_high},
                       {"delta_low", c.thresholds.delta_low}};
    j["sets"] = {{"I_sup2", c.bundle.I_sup2.idx}, {"I_v1", c.bundle.I_v1.idx},
                 {"I_bin2", c.bundle.I_bin2.idx}, {"I_1", c.bundle.I_1.idx},
                 {"F_1", c.bundle.F_1.idx}};
    j["schedule"] = schedule_to_json(c.schedule);
    j["messages"] = {{"sup", c.sup_msg},
                     {"common", c.common_pos},
                     {"msg1", c.msg1},
                     {"msg2bin", c.msg2bin}};
    j["bits"] = {{"m1", c.m1_bits()}, {"m2", c.m2_bits()}, {"m0", c.m0_bits()}};
    j["rates"] = {{"r1", c.rate1()}, {"r2", c.rate2()}, {"r0", c.rate0()}};
    auto acc = c.accounting();
    j["set_rates"] = {{"r1", acc.r1},
                      {"r2", acc.r2},
                      {"r1_finite", acc.r1_finite},
                      {"r2_finite", acc.r2_finite}};
    j["overhead"] = c.overhead;
    auto counts = c.role_counts();
    const char* layers[3] = {"v", "v1", "v2"};
    for (int l = 0; l < 3; ++l)
        j["roles"][layers[l]] = {{"message", counts[l][0]},
                                 {"chained", counts[l][1]},
                                 {"shared_random", counts[l][2]},
                                 {"sampled", counts[l][3]}};
    return j;
}

} // namespace cqpolar
