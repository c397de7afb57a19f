#pragma once

#include "arealk/comparators.hpp"
#include "arealk/rkad.hpp"
#include "arealk/sampling.hpp"
#include "arealk/study_area.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace arealk {

/// How a scenario draws its sample size from the unit count: ceil(N/den)
/// unless a fixed count is given.
struct CountRule {
    int den = 1;
    std::optional<int> fixed;

    [[nodiscard]] int resolve(int n_units) const {
        if (fixed) return *fixed;
        return (n_units + den - 1) / den;
    }
};

enum class ScenarioKind {
    Iid,     // equal-probability sampling without replacement
    Zone,    // single elevated-risk zone
    Cluster, // two-stage adjacency-weighted generator
};

/// One data-generating mechanism of the simulation study.
struct ScenarioSpec {
    std::string id;
    ScenarioKind kind = ScenarioKind::Iid;
    CountRule n_rule;
    CountRule m_rule;        // cluster scenarios only
    double q = 1.0;          // zone relative risk or adjacency weight
    Alternative alternative = Alternative::TwoSided;
    std::set<std::int32_t> zone; // zone scenarios; empty means "use default zone"
    /// Zone given as a rectangle in original coordinates (centroid-in-rect),
    /// resolved against the study area at run time.
    std::optional<std::pair<Point, Point>> zone_rect;
};

/// The 19 built-in mechanisms: three equal-probability controls, six
/// single-zone and six multi-cluster alternatives, four dispersion
/// alternatives.
std::vector<ScenarioSpec> builtin_scenarios();

/// Lookup by id (case-insensitive); throws ValidationError for unknown ids.
ScenarioSpec find_scenario(const std::string& id);

/// Parses scenario definitions from a plain-text key-value file; see the
/// README for the schema. Lines: "scenario <id> kind=<iid|zone|cluster>
/// n=<int|N/d> [m=<int|N/d>] [q=<float>] [tail=<two-sided|clustering|dispersion>]
/// [zone=rect:x0,y0,x1,y1|ids:a,b,c]".
std::vector<ScenarioSpec> parse_scenario_file(std::istream& in);

/// Regular rows x cols grid of square cells with exact areas/centroids and
/// rook contiguity; the footprint is the exact outer rectangle.
StudyArea make_grid_study(int rows, int cols, double cell = 1.0);

/// Default radius grid: smallest centroid spacing up to a quarter of the
/// bounding-box width, evenly spaced.
RadiusGrid default_radii(const StudyArea& sa, int count = 10);

/// Lower-left quadrant zone (cells whose centroid lies in the lower-left
/// quarter of the bounding box) — the default elevated-risk zone for the
/// single-zone scenarios.
std::set<std::int32_t> default_quadrant_zone(const StudyArea& sa);

/// One pattern drawn from the scenario's mechanism.
Pattern scenario_pattern(const ScenarioSpec& spec, const StudyArea& sa, RngStream& rng);

struct SimstudyConfig {
    int reps = 200;
    int null_sims = 500;    // Monte Carlo null size for the coverage test
    int rk_sims = 100;      // envelope simulations per replication
    int scan_sims = 999;    // scan null size (cached per case count)
    double alpha = 0.05;
    std::uint64_t seed = 1;
    int workers = 1;
    bool rkad = true;
    bool rk = false;
    bool ann = false;
    bool scan = false;
};

struct RejectionRow {
    std::string dgm;
    std::string method;         // "rkad" | "rk" | "ann" | "sst"
    Eigen::ArrayXd by_radius;   // empty for scalar methods
    double rate = 0.0;          // scalar methods
};

struct RejectionTable {
    Eigen::ArrayXd radii;
    int reps = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::vector<RejectionRow> rows;

    void write_csv(std::ostream& out) const;
};

/// Shared per-study caches so repeated scenarios reuse nulls and geometry.
class SimstudyEngine {
public:
    SimstudyEngine(const StudyArea& sa, const RadiusGrid& radii, const SimstudyConfig& cfg);

    /// Empirical rejection rates for one scenario across cfg.reps
    /// replications; tail direction comes from the scenario.
    void run_scenario(const ScenarioSpec& spec, RejectionTable& table);

    [[nodiscard]] const NullDistribution& null_for(int n);
    [[nodiscard]] const CoverageTable& coverage() const { return coverage_; }

private:
    const ScanNull& scan_null_for(int n_cases);

    const StudyArea& sa_;
    RadiusGrid radii_;
    SimstudyConfig cfg_;
    CoverageTable coverage_;
    std::optional<ZoneFamily> zones_;
    std::map<int, NullDistribution> nulls_;
    std::map<int, ScanNull> scan_nulls_;
    std::set<std::int32_t> default_zone_;
};

/// Runs every requested scenario and collects the rate table.
RejectionTable run_simstudy(const StudyArea& sa, const RadiusGrid& radii,
                            const std::vector<ScenarioSpec>& specs, const SimstudyConfig& cfg);

} // namespace arealk
