#include "arealk/archive.hpp"
#include "arealk/comparators.hpp"
#include "arealk/error.hpp"
#include "arealk/format.hpp"
#include "arealk/geojson.hpp"
#include "arealk/hash.hpp"
#include "arealk/rkad.hpp"
#include "arealk/simstudy.hpp"
#include "arealk/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace arealk;
using nlohmann::ordered_json;

constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitCacheMismatch = 4;

struct CommonOptions {
    std::string input;
    std::string observed_field = "observed";
    std::string radii_spec = "auto:10";
    double alpha = 0.05;
    std::string alternative = "clustering";
    int nsim = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string contiguity = "rook";
    std::string null_cache;
    std::string out;
    std::string format = "json";
};

Alternative parse_alternative(const std::string& s) {
    if (s == "clustering") return Alternative::Clustering;
    if (s == "dispersion") return Alternative::Dispersion;
    if (s == "two-sided") return Alternative::TwoSided;
    throw ValidationError("unknown alternative '" + s + "'");
}

const char* alternative_name(Alternative a) {
    switch (a) {
    case Alternative::Clustering: return "clustering";
    case Alternative::Dispersion: return "dispersion";
    case Alternative::TwoSided: return "two-sided";
    }
    return "?";
}

Contiguity parse_contiguity(const std::string& s) {
    if (s == "rook") return Contiguity::Rook;
    if (s == "queen") return Contiguity::Queen;
    throw ValidationError("unknown contiguity rule '" + s + "'");
}

RadiusGrid resolve_radii(const std::string& spec, const StudyArea& sa) {
    if (spec.rfind("auto", 0) == 0) {
        int count = 10;
        const auto colon = spec.find(':');
        if (colon != std::string::npos) count = std::stoi(spec.substr(colon + 1));
        return default_radii(sa, count);
    }
    std::vector<double> values;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) values.push_back(std::stod(tok));
    if (values.empty()) throw ValidationError("no radii in '" + spec + "'");
    Eigen::ArrayXd r(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) r[static_cast<Eigen::Index>(i)] = values[i];
    return RadiusGrid{r};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ValidationError("write to '" + path + "' failed");
}

ordered_json config_echo(const CommonOptions& opt) {
    ordered_json cfg;
    cfg["input"] = opt.input;
    cfg["observed_field"] = opt.observed_field;
    cfg["radii"] = opt.radii_spec;
    cfg["alpha"] = opt.alpha;
    cfg["alternative"] = opt.alternative;
    cfg["nsim"] = opt.nsim;
    cfg["seed"] = opt.seed;
    cfg["workers"] = opt.workers;
    cfg["contiguity"] = opt.contiguity;
    cfg["null_cache"] = opt.null_cache;
    return cfg;
}

std::string null_cache_path(const std::string& dir, std::uint64_t fingerprint, int n,
                            const RadiusGrid& radii, int nsim, std::uint64_t seed) {
    Fnv1a64 h;
    h.u64(fingerprint);
    h.u64(static_cast<std::uint64_t>(n));
    for (int l = 0; l < radii.count(); ++l) h.f64(radii[l]);
    h.u64(static_cast<std::uint64_t>(nsim));
    h.u64(seed);
    std::ostringstream name;
    name << std::hex << h.value();
    return (std::filesystem::path(dir) / ("null-" + name.str() + ".json")).string();
}

NullDistribution obtain_null(const StudyArea& sa, int n, const RadiusGrid& radii,
                             const CommonOptions& opt, const CoverageTable& table) {
    const std::uint64_t null_seed = mix64({opt.seed, 0x6e31ULL, static_cast<std::uint64_t>(n)});
    std::optional<std::string> cache_file;
    if (!opt.null_cache.empty()) {
        std::filesystem::create_directories(opt.null_cache);
        cache_file = null_cache_path(opt.null_cache, sa.fingerprint(), n, radii, opt.nsim, null_seed);
        if (std::filesystem::exists(*cache_file)) {
            NullDistribution cached = load_null(*cache_file);
            if (cached.fingerprint != sa.fingerprint())
                throw CacheMismatchError("cached null '" + *cache_file +
                                         "' was built for a different study area; delete it or "
                                         "point --null-cache elsewhere");
            if (cached.n != n || cached.n_sims != opt.nsim ||
                cached.radii.size() != radii.values().size() ||
                (cached.radii != radii.values()).any())
                throw CacheMismatchError("cached null '" + *cache_file +
                                         "' does not match the requested n/radii/nsim");
            return cached;
        }
    }
    EstimateNullOptions null_opt;
    null_opt.workers = opt.workers;
    null_opt.table = &table;
    NullDistribution null_dist = estimate_null(sa, n, radii, opt.nsim, null_seed, null_opt);
    if (cache_file) save_null(null_dist, *cache_file);
    return null_dist;
}

ordered_json rkad_result_json(const RkadResult& res) {
    ordered_json rows = ordered_json::array();
    for (const auto& d : res.rows) {
        ordered_json row;
        row["radius"] = d.radius;
        row["m_avg"] = d.m_avg;
        row["t_obs"] = d.t_obs;
        if (std::isfinite(d.crit_lo)) row["crit_lo"] = d.crit_lo;
        if (std::isfinite(d.crit_hi)) row["crit_hi"] = d.crit_hi;
        row["quantile_pos"] = d.quantile_pos;
        row["reject"] = d.reject;
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string rkad_result_csv(const RkadResult& res) {
    std::ostringstream out;
    out << "radius,m_avg,t_obs,crit_lo,crit_hi,quantile_pos,decision\n";
    for (const auto& d : res.rows) {
        out << to_string_shortest(d.radius) << "," << to_string_shortest(d.m_avg) << ","
            << to_string_shortest(d.t_obs) << ",";
        if (std::isfinite(d.crit_lo)) out << to_string_shortest(d.crit_lo);
        out << ",";
        if (std::isfinite(d.crit_hi)) out << to_string_shortest(d.crit_hi);
        out << "," << to_string_shortest(d.quantile_pos) << ","
            << (d.reject ? "reject" : "fail-to-reject") << "\n";
    }
    return out.str();
}

int run_test(const CommonOptions& opt, const std::vector<std::string>& methods) {
    const auto t0 = std::chrono::steady_clock::now();
    LoadedStudy loaded = load_study(opt.input, opt.observed_field, parse_contiguity(opt.contiguity));
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    const StudyArea& sa = loaded.study;
    const Pattern& y = loaded.observed;
    std::cerr << "loaded " << sa.n_units() << " units, " << y.n << " observed, total area "
              << sa.total_area() << "\n";

    const RadiusGrid radii = resolve_radii(opt.radii_spec, sa);
    const Alternative alternative = parse_alternative(opt.alternative);
    const CoverageTable table = CoverageTable::build(sa, radii, opt.workers);

    const NullDistribution null_dist = obtain_null(sa, y.n, radii, opt, table);
    const RkadResult res = rkad_test(sa, y, null_dist, alternative, opt.alpha, &table);

    ordered_json doc;
    doc["tool"] = "arealk";
    doc["version"] = kVersion;
    doc["config"] = config_echo(opt);
    doc["study"] = {{"fingerprint", sa.fingerprint()},
                    {"units", sa.n_units()},
                    {"observed", y.n},
                    {"total_area", sa.total_area()}};
    doc["radii"] = std::vector<double>(radii.values().begin(), radii.values().end());
    doc["alternative"] = alternative_name(alternative);
    doc["alpha"] = opt.alpha;
    doc["areal_k"] = rkad_result_json(res);

    for (const std::string& method : methods) {
        if (method == "ann") {
            const AnnResult ann = ann_test(centroid_pattern(sa, y), opt.alpha, alternative);
            doc["ann"] = {{"mean_nn_distance", ann.mean_nn_distance},
                          {"expected_distance", ann.expected_distance},
                          {"ratio", ann.ratio},
                          {"z", ann.z_score},
                          {"p_value", ann.p_value},
                          {"reject", ann.reject}};
        } else if (method == "rk") {
            const KResult kr = k_envelope_test(centroid_pattern(sa, y), radii, 100,
                                               mix64({opt.seed, 0x726bULL}), alternative,
                                               opt.alpha, EdgeCorrection::Isotropic, opt.workers);
            ordered_json rows = ordered_json::array();
            for (const auto& row : kr.rows)
                rows.push_back({{"radius", row.radius},
                                {"k_obs", row.k_obs},
                                {"l_obs", row.l_obs},
                                {"env_lo", row.env_lo},
                                {"env_hi", row.env_hi},
                                {"reject", row.reject}});
            doc["ripley_k"] = std::move(rows);
        } else if (method == "scan") {
            const ScanResult sr = scan_test(sa, y, opt.nsim, mix64({opt.seed, 0x7363ULL}),
                                            opt.alpha, nullptr, nullptr, opt.workers);
            std::vector<std::string> members;
            for (std::int32_t i : sr.best_zone.members)
                members.push_back(sa.unit(i).id);
            doc["scan"] = {{"llr", sr.llr},
                           {"p_value", sr.p_value},
                           {"reject", sr.reject},
                           {"zone_center", sr.best_zone.center >= 0
                                               ? sa.unit(sr.best_zone.center).id
                                               : std::string("<none>")},
                           {"zone_radius", sr.best_zone.radius},
                           {"zone_members", members}};
        } else if (method == "rkad") {
            // always included
        } else {
            throw ValidationError("unknown method '" + method + "'");
        }
    }

    const auto t1 = std::chrono::steady_clock::now();
    doc["wall_seconds"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0;

    const std::string json_text = doc.dump(2) + "\n";
    const std::string csv_text = rkad_result_csv(res);

    if (opt.out.empty()) {
        std::cout << ((opt.format == "csv") ? csv_text : json_text);
    } else {
        if (opt.format == "json" || opt.format == "both") write_text(opt.out + ".json", json_text);
        if (opt.format == "csv" || opt.format == "both") write_text(opt.out + ".csv", csv_text);
    }
    for (const auto& d : res.rows)
        std::cerr << "r=" << d.radius << " t=" << d.t_obs
                  << (d.reject ? " REJECT" : " fail-to-reject") << "\n";
    return 0;
}

int run_nullgen(const CommonOptions& opt, int n_override) {
    LoadedStudy loaded = load_study(opt.input, opt.observed_field, parse_contiguity(opt.contiguity));
    const StudyArea& sa = loaded.study;
    const int n = n_override > 0 ? n_override : loaded.observed.n;
    if (n < 1) throw ValidationError("nullgen needs n >= 1 (give --n or observed units)");
    const RadiusGrid radii = resolve_radii(opt.radii_spec, sa);
    const CoverageTable table = CoverageTable::build(sa, radii, opt.workers);

    EstimateNullOptions null_opt;
    null_opt.workers = opt.workers;
    null_opt.table = &table;
    const std::uint64_t null_seed = mix64({opt.seed, 0x6e31ULL, static_cast<std::uint64_t>(n)});
    const NullDistribution null_dist = estimate_null(sa, n, radii, opt.nsim, null_seed, null_opt);

    const std::string path = opt.out.empty() ? "null.json" : opt.out;
    save_null(null_dist, path);
    std::cerr << "wrote " << path << " (n=" << n << ", sims=" << opt.nsim << ")\n";
    return 0;
}

int run_simstudy(const CommonOptions& opt, const std::string& study_spec,
                 const std::string& scenario_list, const std::string& scenario_file,
                 const std::vector<std::string>& methods, int reps, int rk_sims, int scan_sims,
                 int grid_rows, int grid_cols, double grid_cell) {
    StudyArea sa = [&] {
        if (study_spec == "grid" || study_spec == "grid20")
            return make_grid_study(grid_rows, grid_cols, grid_cell);
        if (!opt.input.empty())
            return load_study(opt.input, opt.observed_field, parse_contiguity(opt.contiguity)).study;
        throw ValidationError("simstudy needs --study grid20 or --input <geojson>");
    }();

    const RadiusGrid radii = resolve_radii(opt.radii_spec, sa);

    std::vector<ScenarioSpec> specs;
    if (!scenario_file.empty()) {
        std::ifstream in(scenario_file);
        if (!in) throw ValidationError("cannot open scenario file '" + scenario_file + "'");
        specs = parse_scenario_file(in);
    }
    if (!scenario_list.empty()) {
        std::stringstream ss(scenario_list);
        std::string id;
        while (std::getline(ss, id, ','))
            if (!id.empty()) specs.push_back(find_scenario(id));
    }
    if (specs.empty()) specs = builtin_scenarios();

    SimstudyConfig cfg;
    cfg.reps = reps;
    cfg.null_sims = opt.nsim;
    cfg.rk_sims = rk_sims;
    cfg.scan_sims = scan_sims;
    cfg.alpha = opt.alpha;
    cfg.seed = opt.seed;
    cfg.workers = opt.workers;
    cfg.rkad = cfg.rk = cfg.ann = cfg.scan = false;
    for (const auto& m : methods) {
        if (m == "rkad") cfg.rkad = true;
        else if (m == "rk") cfg.rk = true;
        else if (m == "ann") cfg.ann = true;
        else if (m == "scan" || m == "sst") cfg.scan = true;
        else throw ValidationError("unknown method '" + m + "'");
    }
    if (!(cfg.rkad || cfg.rk || cfg.ann || cfg.scan)) cfg.rkad = true;

    const RejectionTable table = run_simstudy(sa, radii, specs, cfg);

    std::ostringstream csv;
    table.write_csv(csv);
    if (opt.out.empty()) {
        std::cout << csv.str();
    } else {
        write_text(opt.out, csv.str());
        std::cerr << "wrote " << opt.out << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial clustering tests for binary areal data"};
    app.set_version_flag("--version", arealk::kVersion);
    app.require_subcommand(1);

    CommonOptions opt;
    auto add_common = [&](CLI::App* cmd, bool need_input) {
        auto* in = cmd->add_option("--input", opt.input, "GeoJSON FeatureCollection");
        if (need_input) in->required();
        cmd->add_option("--observed-field", opt.observed_field,
                        "feature property holding the 0/1 observation flag");
        cmd->add_option("--radii", opt.radii_spec, "'auto:k' or comma-separated lengths");
        cmd->add_option("--alpha", opt.alpha, "test level, in (0, 0.5]");
        cmd->add_option("--alternative", opt.alternative)
            ->check(CLI::IsMember({"clustering", "dispersion", "two-sided"}));
        cmd->add_option("--nsim", opt.nsim, "Monte Carlo null size");
        cmd->add_option("--seed", opt.seed, "master seed");
        cmd->add_option("--workers", opt.workers, "worker threads (0 = hardware)");
        cmd->add_option("--contiguity", opt.contiguity)->check(CLI::IsMember({"rook", "queen"}));
        cmd->add_option("--null-cache", opt.null_cache, "directory for cached null archives");
        cmd->add_option("--out", opt.out, "output path (or prefix for --format both)");
        cmd->add_option("--format", opt.format)->check(CLI::IsMember({"json", "csv", "both"}));
    };

    auto* test_cmd = app.add_subcommand("test", "run the areal clustering test on a dataset");
    std::vector<std::string> test_methods{"rkad"};
    add_common(test_cmd, true);
    test_cmd->add_option("--methods", test_methods)->delimiter(',');

    auto* null_cmd = app.add_subcommand("nullgen", "precompute and archive a null distribution");
    int nullgen_n = 0;
    add_common(null_cmd, true);
    null_cmd->add_option("--n", nullgen_n, "observation count to condition on");

    auto* sim_cmd = app.add_subcommand("simstudy", "rejection-rate study over data mechanisms");
    std::string study_spec = "grid20";
    std::string scenario_list;
    std::string scenario_file;
    std::vector<std::string> sim_methods{"rkad"};
    int reps = 200, rk_sims = 100, scan_sims = 999;
    int grid_rows = 20, grid_cols = 20;
    double grid_cell = 1.0;
    add_common(sim_cmd, false);
    sim_cmd->add_option("--study", study_spec, "'grid20' or 'grid' (with --input: the file)");
    sim_cmd->add_option("--scenarios", scenario_list, "comma-separated ids (default: all 19)");
    sim_cmd->add_option("--scenario-file", scenario_file, "plain-text scenario definitions");
    sim_cmd->add_option("--methods", sim_methods)->delimiter(',');
    sim_cmd->add_option("--reps", reps, "replications per scenario");
    sim_cmd->add_option("--rk-sims", rk_sims, "envelope simulations per replication");
    sim_cmd->add_option("--scan-sims", scan_sims, "scan null size");
    sim_cmd->add_option("--rows", grid_rows);
    sim_cmd->add_option("--cols", grid_cols);
    sim_cmd->add_option("--cell", grid_cell);

    CLI11_PARSE(app, argc, argv);

    try {
        if (test_cmd->parsed()) return run_test(opt, test_methods);
        if (null_cmd->parsed()) return run_nullgen(opt, nullgen_n);
        if (sim_cmd->parsed())
            return run_simstudy(opt, study_spec, scenario_list, scenario_file, sim_methods, reps,
                                rk_sims, scan_sims, grid_rows, grid_cols, grid_cell);
    } catch (const arealk::CacheMismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCacheMismatch;
    } catch (const arealk::InfeasibleSampleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const arealk::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
