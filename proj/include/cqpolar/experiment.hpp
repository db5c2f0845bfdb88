#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cqpolar/serialize.hpp"

// Experiment configuration and orchestration behind the CLI: a single JSON
// config names the channel, auxiliary structure, sizes, seeds, and mode;
// run() dispatches and writes the CSV/JSON artifacts.

namespace cqpolar {

enum class RunMode { analyze, polarize, region, simulate };

inline RunMode parse_mode(const std::string& s) {
    if (s == "analyze") return RunMode::analyze;
    if (s == "polarize") return RunMode::polarize;
    if (s == "region") return RunMode::region;
    if (s == "simulate") return RunMode::simulate;
    throw ConfigError("unknown mode: " + s);
}

struct SeedSet {
    std::uint64_t construction = 0x1d872b41caf01f2dULL;
    std::uint64_t shared_randomness = 0x8aa5f3c627bd914eULL;
    std::uint64_t noise = 0x415bc2a90f6d8e37ULL;
};

struct ExperimentConfig {
    RunMode mode = RunMode::analyze;
    BroadcastChannelSpec channel;
    AuxiliaryStructure aux;
    std::size_t n = 64;
    std::size_t k = 2;
    Threshold thresholds{};
    SeedSet seeds{};
    int trials = 1;
    int samples = 2000;
    int resolution = 3;
    bool search = false;
    bool force_swap = false;
    bool literal_second_member = false;
    bool literal_middle_line = false;
    double message_fraction = 1.0;
    std::size_t common_bits = 0; // superposition positions moved to the common message
    std::string out_dir = ".";
    int threads = 1;
    std::uint64_t config_hash = 0;
};

namespace detail {

inline double num(const nlohmann::json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

inline Matrix parse_complex_matrix(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("state matrix must be a nonempty array");
    Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(r);
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw ConfigError("ragged state matrix");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& cell = row.at(c);
            if (!cell.is_array() || cell.size() != 2)
                throw ConfigError("matrix entries must be [re, im] pairs");
            m(r, c) = Complex(cell.at(0).get<double>(), cell.at(1).get<double>());
        }
    }
    return m;
}

} // namespace detail

inline BroadcastChannelSpec builtin_channel(const std::string& name,
                                            const std::vector<double>& params) {
    auto need = [&](std::size_t c) {
        if (params.size() != c)
            throw ConfigError("channel " + name + " expects " + std::to_string(c) + " parameters");
    };
    if (name == "erasure-broadcast") {
        need(2);
        return erasure_broadcast(params[0], params[1]);
    }
    if (name == "symmetric-flip-broadcast") {
        need(2);
        return symmetric_flip_broadcast(params[0], params[1]);
    }
    if (name == "pure-state-qubit-broadcast") {
        need(2);
        return pure_state_qubit_broadcast(params[0], params[1]);
    }
    if (name == "amplitude-damping-qubit-broadcast") {
        need(2);
        return amplitude_damping_qubit_broadcast(params[0], params[1]);
    }
    throw ConfigError("unknown built-in channel: " + name);
}

inline BroadcastChannelSpec parse_channel(const nlohmann::json& j) {
    if (j.contains("name")) {
        std::vector<double> params;
        if (j.contains("params")) params = j.at("params").get<std::vector<double>>();
        return builtin_channel(j.at("name").get<std::string>(), params);
    }
    BroadcastChannelSpec s;
    if (j.contains("classical")) {
        const auto& c = j.at("classical");
        s.classical = true;
        s.name = "inline-classical";
        s.y1_count = c.at("y1_count").get<std::size_t>();
        s.y2_count = c.at("y2_count").get<std::size_t>();
        auto rows = c.at("rows");
        if (!rows.is_array() || rows.size() != 2)
            throw ConfigError("classical channel needs a joint row per input");
        for (int x = 0; x < 2; ++x) s.rows[x] = rows.at(x).get<std::vector<double>>();
        s.validate();
        return s;
    }
    if (j.contains("quantum")) {
        const auto& q = j.at("quantum");
        s.classical = false;
        s.name = "inline-quantum";
        s.dim1 = q.at("dim1").get<Eigen::Index>();
        s.dim2 = q.at("dim2").get<Eigen::Index>();
        auto states = q.at("states");
        if (!states.is_array() || states.size() != 2)
            throw ConfigError("quantum channel needs one joint state per input");
        for (int x = 0; x < 2; ++x)
            s.states.emplace_back(detail::parse_complex_matrix(states.at(x)));
        s.validate();
        return s;
    }
    throw ConfigError("channel must give a built-in name or an inline table/states");
}

inline AuxiliaryStructure parse_aux(const nlohmann::json& j) {
    AuxiliaryStructure a;
    a.p_v = detail::num(j, "p_v", 0.5);
    if (j.contains("p_v2_given_v")) {
        auto v = j.at("p_v2_given_v").get<std::vector<double>>();
        if (v.size() != 2) throw ConfigError("p_v2_given_v needs two entries");
        a.p_v2_given_v = {v[0], v[1]};
    }
    if (j.contains("p_v1_given_vv2")) {
        const auto& m = j.at("p_v1_given_vv2");
        if (!m.is_array() || m.size() != 2) throw ConfigError("p_v1_given_vv2 needs a 2x2 table");
        for (int v = 0; v < 2; ++v) {
            auto row = m.at(v).get<std::vector<double>>();
            if (row.size() != 2) throw ConfigError("p_v1_given_vv2 needs a 2x2 table");
            a.p_v1_given_vv2[v] = {row[0], row[1]};
        }
    }
    if (j.contains("phi")) {
        auto v = j.at("phi").get<std::vector<int>>();
        if (v.size() != 8) throw ConfigError("phi needs eight bits");
        for (int c = 0; c < 8; ++c) a.phi[c] = static_cast<std::uint8_t>(v[c] & 1);
    }
    a.validate();
    return a;
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        ExperimentConfig c;
        c.config_hash = fnv1a64(text);
        c.mode = parse_mode(j.at("mode").get<std::string>());
        c.channel = parse_channel(j.at("channel"));
        if (j.contains("aux")) c.aux = parse_aux(j.at("aux"));
        c.n = j.value("n", std::size_t{64});
        log2_exact(c.n);
        c.k = j.value("k", std::size_t{2});
        c.thresholds.delta_high = detail::num(j.value("thresholds", nlohmann::json::object()),
                                              "delta_high", 0.99);
        c.thresholds.delta_low = detail::num(j.value("thresholds", nlohmann::json::object()),
                                             "delta_low", 0.01);
        c.thresholds.validate();
        if (j.contains("seeds")) {
            const auto& s = j.at("seeds");
            c.seeds.construction = s.value("construction", c.seeds.construction);
            c.seeds.shared_randomness = s.value("shared_randomness", c.seeds.shared_randomness);
            c.seeds.noise = s.value("noise", c.seeds.noise);
        }
        c.trials = j.value("trials", 1);
        if (c.trials < 1) throw ConfigError("trial count must be at least 1");
        c.samples = j.value("samples", 2000);
        c.resolution = j.value("resolution", 3);
        c.search = j.value("search", false);
        c.force_swap = j.value("force_swap", false);
        c.literal_second_member = j.value("literal_second_member", false);
        c.literal_middle_line = j.value("literal_middle_line", false);
        c.message_fraction = j.value("message_fraction", 1.0);
        c.common_bits = j.value("common_bits", std::size_t{0});
        c.out_dir = j.value("out", j.value("out_dir", std::string(".")));
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

namespace detail {

inline CodeOptions code_options(const ExperimentConfig& c) {
    CodeOptions opt;
    opt.thresholds = c.thresholds;
    opt.k = c.k;
    opt.shared_seed = c.seeds.shared_randomness;
    opt.force_swap = c.force_swap;
    opt.literal_second_member = c.literal_second_member;
    opt.message_fraction = c.message_fraction;
    opt.profile.samples = c.samples;
    opt.profile.seed = c.seeds.construction;
    opt.profile.threads = c.threads;
    return opt;
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw ConfigError("cannot write output file " + p.string());
    f << content;
}

} // namespace detail

// Runs the configured experiment and writes artifacts into out_dir.
// Diagnostics go to `log`; artifacts are deterministic given the config.
inline void run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    std::filesystem::create_directories(cfg.out_dir);
    Provenance prov{cfg.config_hash};
    std::filesystem::path out(cfg.out_dir);

    switch (cfg.mode) {
    case RunMode::polarize: {
        ProfileOptions popt;
        popt.samples = cfg.samples;
        popt.seed = cfg.seeds.construction;
        popt.threads = cfg.threads;
        ProfileSet ps = compute_profile_set(cfg.channel, cfg.aux, cfg.n, popt);
        const PolarizationProfile* profs[] = {&ps.v,       &ps.v_b1,    &ps.v_b2,
                                              &ps.v1_v,    &ps.v2_v,    &ps.v1_v_b1,
                                              &ps.v2_v_b2, &ps.v1_v_v2};
        const char* names[] = {"v", "v_b1", "v_b2", "v1_v", "v2_v", "v1_v_b1", "v2_v_b2",
                               "v1_v_v2"};
        for (int i = 0; i < 8; ++i) {
            detail::write_file(out / (std::string("profile_") + names[i] + ".csv"),
                               profile_to_csv(*profs[i], prov));
            log << "profile " << names[i] << ": n=" << profs[i]->n
                << " method=" << profs[i]->method() << '\n';
        }
        break;
    }
    case RunMode::region: {
        RegionBounds bounds = evaluate_common_region(cfg.channel, cfg.aux);
        CornerPoints corners =
            corner_points(cfg.channel, cfg.aux, CornerOptions{cfg.literal_middle_line});
        detail::write_file(out / "region.csv", region_to_csv(cfg.aux, bounds, corners, prov));
        log << "region: sum_a=" << bounds.sum_a << " sum_b=" << bounds.sum_b << " corner_a=("
            << corners.a.r1 << ',' << corners.a.r2 << ") corner_b=(" << corners.b.r1 << ','
            << corners.b.r2 << ")\n";
        if (cfg.search) {
            SearchOptions sopt;
            sopt.resolution = cfg.resolution;
            sopt.threads = cfg.threads;
            sopt.corner = CornerOptions{cfg.literal_middle_line};
            SearchResult best = search_auxiliaries(cfg.channel, sopt);
            detail::write_file(out / "region_search.csv", search_to_csv(best, prov));
            log << "search: objective=" << best.objective << " over " << best.cells
                << " cells\n";
        }
        break;
    }
    case RunMode::analyze: {
        BroadcastPolarCode code = build_code(cfg.channel, cfg.aux, cfg.n, detail::code_options(cfg));
        if (cfg.common_bits) allocate_common(code, cfg.common_bits);
        detail::write_file(out / "code.json", code_to_json(code).dump(2) + "\n");
        detail::write_file(out / "schedule.json", schedule_to_json(code.schedule).dump(2) + "\n");
        ErrorBoundReport bound = analyze_error_bound(code);
        detail::write_file(out / "error_bound.csv", error_bound_to_csv(bound, prov));
        auto acc = code.accounting();
        log << "code: n=" << code.n << " k=" << code.k << " swapped=" << code.swapped
            << " r1=" << acc.r1 << " r2_finite=" << acc.r2_finite << " bound rx1=" << bound.rx1()
            << " rx2=" << bound.rx2() << '\n';
        break;
    }
    case RunMode::simulate: {
        BroadcastPolarCode code = build_code(cfg.channel, cfg.aux, cfg.n, detail::code_options(cfg));
        if (cfg.common_bits) allocate_common(code, cfg.common_bits);
        std::vector<TransmissionRecord> records(cfg.trials);
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1))
                records[t] = simulate_transmission(code, derive_seed(cfg.seeds.noise, t + 1, 1),
                                                   derive_seed(cfg.seeds.noise, t + 1, 2));
        };
        int workers = std::max(1, cfg.threads);
        if (workers == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        detail::write_file(out / "trials.csv", trials_to_csv(records, prov));
        detail::write_file(out / "code.json", code_to_json(code).dump(2) + "\n");
        int e1 = 0, e2 = 0, e0 = 0;
        std::size_t bb1 = 0, bb2 = 0;
        for (const auto& r : records) {
            e1 += !r.ok1;
            e2 += !r.ok2;
            e0 += !r.ok0;
            bb1 += r.bad_blocks1;
            bb2 += r.bad_blocks2;
        }
        double blocks = static_cast<double>(cfg.trials) * static_cast<double>(code.k);
        nlohmann::json summary;
        summary["trials"] = cfg.trials;
        summary["frame_error_rx1"] = static_cast<double>(e1) / cfg.trials;
        summary["frame_error_rx2"] = static_cast<double>(e2) / cfg.trials;
        summary["frame_error_common"] = static_cast<double>(e0) / cfg.trials;
        summary["block_error_rx1"] = static_cast<double>(bb1) / blocks;
        summary["block_error_rx2"] = static_cast<double>(bb2) / blocks;
        summary["swapped"] = code.swapped;
        summary["rates"] = {{"r1", code.rate1()}, {"r2", code.rate2()}, {"r0", code.rate0()}};
        detail::write_file(out / "summary.json", summary.dump(2) + "\n");
        log << "simulate: trials=" << cfg.trials << " frame errors rx1=" << e1 << " rx2=" << e2
            << " common=" << e0 << " block errors rx1=" << bb1 << '/' << blocks
            << " rx2=" << bb2 << '/' << blocks << '\n';
        break;
    }
    }
}

// CLI entry: parse, dispatch, map errors to exit codes.
inline int run_cli(const std::string& config_text, const std::string& out_override, int threads,
                   std::uint64_t seed_override, bool has_seed_override, std::ostream& log,
                   std::ostream& err) {
    try {
        ExperimentConfig cfg = parse_config(config_text);
        if (!out_override.empty()) cfg.out_dir = out_override;
        cfg.threads = std::max(1, threads);
        if (has_seed_override) {
            cfg.seeds.construction = derive_seed(seed_override, 1);
            cfg.seeds.shared_randomness = derive_seed(seed_override, 2);
            cfg.seeds.noise = derive_seed(seed_override, 3);
        }
        run_experiment(cfg, log);
        return 0;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return 3;
    } catch (const BudgetError& e) {
        err << "budget exceeded: " << e.what() << '\n';
        return 4;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace cqpolar
