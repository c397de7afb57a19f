#include "arealk/simstudy.hpp"

#include "arealk/format.hpp"
#include "arealk/hash.hpp"
#include "arealk/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace arealk {

namespace {

constexpr std::uint64_t kPatternSalt = 0x706174ULL;
constexpr std::uint64_t kRkSalt = 0x726bULL;
constexpr std::uint64_t kNullSeedSalt = 0x6e31ULL;
constexpr std::uint64_t kScanSeedSalt = 0x7331ULL;

std::uint64_t id_hash(const std::string& id) {
    Fnv1a64 h;
    h.bytes(id.data(), id.size());
    return h.value();
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

CountRule parse_count_rule(const std::string& text) {
    CountRule rule;
    if (text.rfind("N/", 0) == 0 || text.rfind("n/", 0) == 0) {
        rule.den = std::stoi(text.substr(2));
        if (rule.den < 1) throw ValidationError("count rule denominator must be positive");
    } else {
        rule.fixed = std::stoi(text);
        if (*rule.fixed < 0) throw ValidationError("count must be nonnegative");
    }
    return rule;
}

} // namespace

std::vector<ScenarioSpec> builtin_scenarios() {
    std::vector<ScenarioSpec> specs;
    auto iid = [&](const std::string& id, int den) {
        ScenarioSpec s;
        s.id = id;
        s.kind = ScenarioKind::Iid;
        s.n_rule.den = den;
        s.alternative = Alternative::TwoSided;
        specs.push_back(std::move(s));
    };
    auto zone = [&](const std::string& id, int den, double q) {
        ScenarioSpec s;
        s.id = id;
        s.kind = ScenarioKind::Zone;
        s.n_rule.den = den;
        s.q = q;
        s.alternative = Alternative::Clustering;
        specs.push_back(std::move(s));
    };
    auto cluster = [&](const std::string& id, int n_den, int m_den, double q, Alternative alt) {
        ScenarioSpec s;
        s.id = id;
        s.kind = ScenarioKind::Cluster;
        s.n_rule.den = n_den;
        s.m_rule.den = m_den;
        s.q = q;
        s.alternative = alt;
        specs.push_back(std::move(s));
    };

    iid("I1", 10);
    iid("I2", 4);
    iid("I3", 2);
    zone("C1", 10, 5.0);
    zone("C2", 10, 10.0);
    zone("C3", 4, 5.0);
    zone("C4", 4, 10.0);
    zone("C5", 2, 5.0);
    zone("C6", 2, 10.0);
    cluster("C7", 10, 100, 5.0, Alternative::Clustering);
    cluster("C8", 10, 100, 10.0, Alternative::Clustering);
    cluster("C9", 4, 40, 5.0, Alternative::Clustering);
    cluster("C10", 4, 40, 10.0, Alternative::Clustering);
    cluster("C11", 2, 20, 5.0, Alternative::Clustering);
    cluster("C12", 2, 20, 10.0, Alternative::Clustering);
    cluster("D1", 10, 100, 0.1, Alternative::Dispersion);
    cluster("D2", 10, 100, 0.0, Alternative::Dispersion);
    cluster("D3", 6, 100, 0.1, Alternative::Dispersion);
    cluster("D4", 6, 100, 0.0, Alternative::Dispersion);
    return specs;
}

ScenarioSpec find_scenario(const std::string& id) {
    const std::string want = lower(id);
    for (const auto& spec : builtin_scenarios())
        if (lower(spec.id) == want) return spec;
    std::string valid;
    for (const auto& spec : builtin_scenarios()) {
        if (!valid.empty()) valid += ", ";
        valid += spec.id;
    }
    throw ValidationError("unknown scenario '" + id + "'; valid ids: " + valid);
}

std::vector<ScenarioSpec> parse_scenario_file(std::istream& in) {
    std::vector<ScenarioSpec> specs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string head;
        if (!(ls >> head)) continue;
        if (head != "scenario")
            throw ValidationError("scenario file line " + std::to_string(line_no) +
                                  ": expected 'scenario <id> key=value ...'");
        ScenarioSpec spec;
        if (!(ls >> spec.id))
            throw ValidationError("scenario file line " + std::to_string(line_no) + ": missing id");
        bool have_kind = false, have_n = false;
        std::string kv;
        while (ls >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw ValidationError("scenario file line " + std::to_string(line_no) +
                                      ": expected key=value, got '" + kv + "'");
            const std::string key = lower(kv.substr(0, eq));
            const std::string value = kv.substr(eq + 1);
            if (key == "kind") {
                const std::string k = lower(value);
                if (k == "iid") spec.kind = ScenarioKind::Iid;
                else if (k == "zone") spec.kind = ScenarioKind::Zone;
                else if (k == "cluster") spec.kind = ScenarioKind::Cluster;
                else throw ValidationError("scenario file line " + std::to_string(line_no) +
                                           ": unknown kind '" + value + "'");
                have_kind = true;
            } else if (key == "n") {
                spec.n_rule = parse_count_rule(value);
                have_n = true;
            } else if (key == "m") {
                spec.m_rule = parse_count_rule(value);
            } else if (key == "q") {
                spec.q = std::stod(value);
            } else if (key == "tail") {
                const std::string t = lower(value);
                if (t == "two-sided") spec.alternative = Alternative::TwoSided;
                else if (t == "clustering") spec.alternative = Alternative::Clustering;
                else if (t == "dispersion") spec.alternative = Alternative::Dispersion;
                else throw ValidationError("scenario file line " + std::to_string(line_no) +
                                           ": unknown tail '" + value + "'");
            } else if (key == "zone") {
                if (value.rfind("ids:", 0) == 0) {
                    std::istringstream ids(value.substr(4));
                    std::string tok;
                    while (std::getline(ids, tok, ','))
                        if (!tok.empty()) spec.zone.insert(std::stoi(tok));
                } else if (value.rfind("rect:", 0) == 0) {
                    // Resolved against the study area at run time.
                    std::istringstream rect(value.substr(5));
                    double x0, y0, x1, y1;
                    char comma;
                    if (!(rect >> x0 >> comma >> y0 >> comma >> x1 >> comma >> y1))
                        throw ValidationError("scenario file line " + std::to_string(line_no) +
                                              ": malformed rect zone");
                    // Encoded as a marker resolved in scenario_pattern via
                    // spec.zone being empty would lose the rect; store the
                    // rect in the dedicated fields below.
                    spec.zone_rect = {{x0, y0}, {x1, y1}};
                } else {
                    throw ValidationError("scenario file line " + std::to_string(line_no) +
                                          ": zone must be ids:... or rect:...");
                }
            } else {
                throw ValidationError("scenario file line " + std::to_string(line_no) +
                                      ": unknown key '" + key + "'");
            }
        }
        if (!have_kind || !have_n)
            throw ValidationError("scenario file line " + std::to_string(line_no) +
                                  ": kind and n are required");
        specs.push_back(std::move(spec));
    }
    return specs;
}

StudyArea make_grid_study(int rows, int cols, double cell) {
    if (rows < 2 || cols < 2) throw ValidationError("grid needs at least 2x2 cells");
    if (!(cell > 0.0)) throw ValidationError("cell size must be positive");
    std::vector<StudyArea::UnitInput> inputs;
    inputs.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            StudyArea::UnitInput in;
            in.id = "r" + std::to_string(r) + "c" + std::to_string(c);
            const Point lo{c * cell, r * cell};
            const Point hi{(c + 1) * cell, (r + 1) * cell};
            in.geometry = make_rect(lo, hi);
            inputs.push_back(std::move(in));
        }
    }
    const PolygonSet footprint = make_rect({0.0, 0.0}, {cols * cell, rows * cell});
    StudyArea::BuildOptions options;
    options.contiguity = Contiguity::Rook;
    options.footprint = &footprint;
    return StudyArea::build(std::move(inputs), options);
}

RadiusGrid default_radii(const StudyArea& sa, int count) {
    if (count < 2) throw ValidationError("radius grid needs at least 2 radii");
    if (sa.n_units() < 2) throw ValidationError("radius selection needs at least 2 units");
    double min_d2 = std::numeric_limits<double>::infinity();
    const int n = sa.n_units();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d2 = (sa.unit(i).centroid - sa.unit(j).centroid).squaredNorm();
            if (d2 < min_d2) min_d2 = d2;
        }
    }
    const double r1 = sa.to_original(std::sqrt(min_d2));
    const double width = sa.to_original(sa.bbox().hi.x() - sa.bbox().lo.x());
    const double r_max = width / 4.0;
    if (!(r_max > r1))
        throw ValidationError("study area too small for the default radius rule");
    Eigen::ArrayXd radii(count);
    for (int l = 0; l < count; ++l)
        radii[l] = r1 + (r_max - r1) * static_cast<double>(l) / static_cast<double>(count - 1);
    return RadiusGrid{radii};
}

std::set<std::int32_t> default_quadrant_zone(const StudyArea& sa) {
    const Box box = sa.bbox();
    const Point mid = 0.5 * (box.lo + box.hi);
    std::set<std::int32_t> zone;
    for (int i = 0; i < sa.n_units(); ++i) {
        const Point c = sa.unit(i).centroid;
        if (c.x() < mid.x() && c.y() < mid.y()) zone.insert(i);
    }
    if (zone.empty()) throw ValidationError("default zone is empty for this study area");
    return zone;
}

Pattern scenario_pattern(const ScenarioSpec& spec, const StudyArea& sa, RngStream& rng) {
    const int N = sa.n_units();
    const int n = spec.n_rule.resolve(N);
    if (n < 1 || n > N) throw ValidationError("scenario sample size out of range");
    switch (spec.kind) {
    case ScenarioKind::Iid:
        return swor_uniform(N, n, rng);
    case ScenarioKind::Zone: {
        std::set<std::int32_t> zone = spec.zone;
        if (zone.empty() && spec.zone_rect) {
            for (int i = 0; i < N; ++i) {
                const Point c = sa.centroid_original(i);
                if (c.x() >= spec.zone_rect->first.x() && c.x() <= spec.zone_rect->second.x() &&
                    c.y() >= spec.zone_rect->first.y() && c.y() <= spec.zone_rect->second.y())
                    zone.insert(i);
            }
        }
        if (zone.empty()) zone = default_quadrant_zone(sa);
        const WeightVector w = single_zone_weights(sa, zone, spec.q);
        return swor(N, n, w, rng);
    }
    case ScenarioKind::Cluster: {
        const int m = spec.m_rule.resolve(N);
        return cluster_sample(sa, n, m, spec.q, rng);
    }
    }
    throw ValidationError("unreachable scenario kind");
}

void RejectionTable::write_csv(std::ostream& out) const {
    out << "dgm,method,rate";
    for (Eigen::Index l = 0; l < radii.size(); ++l) out << ",r" << (l + 1);
    out << "\n";
    for (const auto& row : rows) {
        out << row.dgm << "," << row.method << ",";
        if (row.by_radius.size() == 0) out << to_string_shortest(row.rate);
        for (Eigen::Index l = 0; l < radii.size(); ++l) {
            out << ",";
            if (l < row.by_radius.size()) out << to_string_shortest(row.by_radius[l]);
        }
        out << "\n";
    }
}

SimstudyEngine::SimstudyEngine(const StudyArea& sa, const RadiusGrid& radii,
                               const SimstudyConfig& cfg)
    : sa_(sa), radii_(radii), cfg_(cfg),
      coverage_(CoverageTable::build(sa, radii, cfg.workers)) {
    if (cfg_.scan) zones_.emplace(sa_);
}

const NullDistribution& SimstudyEngine::null_for(int n) {
    auto it = nulls_.find(n);
    if (it != nulls_.end()) return it->second;
    EstimateNullOptions options;
    options.workers = cfg_.workers;
    options.table = &coverage_;
    NullDistribution null_dist = estimate_null(
        sa_, n, radii_, cfg_.null_sims,
        mix64({cfg_.seed, kNullSeedSalt, static_cast<std::uint64_t>(n)}), options);
    return nulls_.emplace(n, std::move(null_dist)).first->second;
}

const ScanNull& SimstudyEngine::scan_null_for(int n_cases) {
    auto it = scan_nulls_.find(n_cases);
    if (it != scan_nulls_.end()) return it->second;
    ScanNull ns = make_scan_null(sa_, *zones_, n_cases, cfg_.scan_sims,
                                 mix64({cfg_.seed, kScanSeedSalt, static_cast<std::uint64_t>(n_cases)}),
                                 cfg_.workers);
    return scan_nulls_.emplace(n_cases, std::move(ns)).first->second;
}

void SimstudyEngine::run_scenario(const ScenarioSpec& spec, RejectionTable& table) {
    const int reps = cfg_.reps;
    const int nr = radii_.count();
    const std::uint64_t scenario = id_hash(lower(spec.id));
    const int n = spec.n_rule.resolve(sa_.n_units());

    // Shared per-study caches are built up-front so replications can run in
    // parallel without synchronization.
    const NullDistribution* null_dist = cfg_.rkad ? &null_for(n) : nullptr;
    const ScanNull* scan_null = cfg_.scan ? &scan_null_for(n) : nullptr;

    struct RepOutcome {
        Eigen::ArrayX<std::uint8_t> rkad;
        Eigen::ArrayX<std::uint8_t> rk;
        std::uint8_t ann = 0;
        std::uint8_t scan = 0;
    };
    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));

    parallel_for(reps, cfg_.workers, [&](int rep) {
        RngStream pattern_rng(cfg_.seed,
                              mix64({kPatternSalt, scenario, static_cast<std::uint64_t>(rep)}));
        const Pattern y = scenario_pattern(spec, sa_, pattern_rng);
        RepOutcome& out = outcomes[static_cast<std::size_t>(rep)];

        if (cfg_.rkad) {
            const RkadResult res =
                rkad_test(sa_, y, *null_dist, spec.alternative, cfg_.alpha, &coverage_);
            out.rkad.setZero(nr);
            for (int l = 0; l < nr; ++l)
                out.rkad[l] = res.rows[static_cast<std::size_t>(l)].reject ? 1 : 0;
        }
        if (cfg_.rk || cfg_.ann) {
            const PointPattern pp = centroid_pattern(sa_, y);
            if (cfg_.rk) {
                const KResult res = k_envelope_test(
                    pp, radii_, cfg_.rk_sims,
                    mix64({cfg_.seed, kRkSalt, scenario, static_cast<std::uint64_t>(rep)}),
                    spec.alternative, cfg_.alpha, EdgeCorrection::Isotropic, /*workers=*/1);
                out.rk.setZero(nr);
                for (int l = 0; l < nr; ++l)
                    out.rk[l] = res.rows[static_cast<std::size_t>(l)].reject ? 1 : 0;
            }
            if (cfg_.ann) {
                const AnnResult res = ann_test(pp, cfg_.alpha, spec.alternative);
                out.ann = res.reject ? 1 : 0;
            }
        }
        if (cfg_.scan) {
            const ScanResult res = scan_test(sa_, y, cfg_.scan_sims, /*seed=*/0, cfg_.alpha,
                                             &*zones_, scan_null, /*workers=*/1);
            out.scan = res.reject ? 1 : 0;
        }
    });

    // Sequential reduction keeps the table independent of the worker count.
    auto add_radius_row = [&](const std::string& method, auto member) {
        Eigen::ArrayXd rates = Eigen::ArrayXd::Zero(nr);
        for (const auto& out : outcomes)
            for (int l = 0; l < nr; ++l) rates[l] += (out.*member)[l];
        RejectionRow row;
        row.dgm = spec.id;
        row.method = method;
        row.by_radius = rates / static_cast<double>(reps);
        table.rows.push_back(std::move(row));
    };
    auto add_scalar_row = [&](const std::string& method, auto member) {
        double count = 0.0;
        for (const auto& out : outcomes) count += (out.*member);
        RejectionRow row;
        row.dgm = spec.id;
        row.method = method;
        row.rate = count / static_cast<double>(reps);
        table.rows.push_back(std::move(row));
    };
    if (cfg_.ann) add_scalar_row("ann", &RepOutcome::ann);
    if (cfg_.scan) add_scalar_row("sst", &RepOutcome::scan);
    if (cfg_.rk) add_radius_row("rk", &RepOutcome::rk);
    if (cfg_.rkad) add_radius_row("rkad", &RepOutcome::rkad);
}

RejectionTable run_simstudy(const StudyArea& sa, const RadiusGrid& radii,
                            const std::vector<ScenarioSpec>& specs, const SimstudyConfig& cfg) {
    SimstudyEngine engine(sa, radii, cfg);
    RejectionTable table;
    table.radii = radii.values();
    table.reps = cfg.reps;
    table.alpha = cfg.alpha;
    table.seed = cfg.seed;
    for (const auto& spec : specs) engine.run_scenario(spec, table);
    return table;
}

} // namespace arealk
