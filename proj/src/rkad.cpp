#include "arealk/rkad.hpp"

#include "arealk/hash.hpp"
#include "arealk/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace arealk {

namespace {

constexpr std::uint64_t kNullStreamSalt = 0x6e756c6cULL; // stream family for null sims

double binomial_count_capped(int n, int k, double cap) {
    // C(n, k) with early exit once the count exceeds cap.
    double c = 1.0;
    k = std::min(k, n - k);
    for (int i = 1; i <= k; ++i) {
        c *= static_cast<double>(n - k + i) / static_cast<double>(i);
        if (c > cap) return c;
    }
    return c;
}

} // namespace

double m_local(const StudyArea& sa, const Pattern& y, int i, double r) {
    if (i < 0 || i >= sa.n_units()) throw ValidationError("unit index out of range");
    if (!y.observed(i))
        throw UndefinedStatisticError("local coverage is undefined for an unobserved unit");
    const double coverage = observed_coverage(sa, y, sa.centroid_original(i), r);
    return coverage / (std::numbers::pi * r * r);
}

double m_avg(const StudyArea& sa, const Pattern& y, double r) {
    if (y.n < 1) throw UndefinedStatisticError("average coverage needs an observed unit");
    double sum = 0.0;
    for (int i = 0; i < sa.n_units(); ++i)
        if (y.observed(i)) sum += m_local(sa, y, i, r);
    return sum / y.n;
}

double t_statistic(const StudyArea& sa, const Pattern& y, double r, double m_hat) {
    if (y.n < 1) throw UndefinedStatisticError("statistic needs an observed unit");
    double sum = 0.0;
    for (int i = 0; i < sa.n_units(); ++i)
        if (y.observed(i)) sum += std::abs(m_local(sa, y, i, r) - m_hat);
    return sum / y.n;
}

NullDistribution estimate_null(const StudyArea& sa, int n, const RadiusGrid& radii, int n_sims,
                               std::uint64_t seed, const EstimateNullOptions& options) {
    const int N = sa.n_units();
    if (n < 1 || n > N) throw ValidationError("observation count out of range");
    if (n_sims < 2) throw ValidationError("null estimation needs at least 2 simulations");

    CoverageTable local_table;
    const CoverageTable* table = options.table;
    if (table == nullptr) {
        local_table = CoverageTable::build(sa, radii, options.workers);
        table = &local_table;
    } else if (table->study_fingerprint() != sa.fingerprint()) {
        throw CacheMismatchError("coverage table was built for a different study area");
    }
    const int nr = table->n_radii();

    NullDistribution null_dist;
    null_dist.fingerprint = sa.fingerprint();
    null_dist.seed = seed;
    null_dist.n = n;
    null_dist.n_sims = n_sims;
    null_dist.radii = radii.values();

    auto simulate_pattern = [&](int g) {
        RngStream rng(seed, mix64({kNullStreamSalt, static_cast<std::uint64_t>(g)}));
        return swor_uniform(N, n, rng);
    };

    // Pass 1: per-simulation average coverage; the grand mean estimates the
    // null mean per radius.
    Eigen::ArrayXXd sim_avgs(n_sims, nr);
    // Stored per-simulation locals (simulation-major) unless running lean.
    std::vector<Eigen::ArrayXXd> sim_locals;
    if (!options.low_memory) sim_locals.resize(static_cast<std::size_t>(n_sims));

    parallel_for(n_sims, options.workers, [&](int g) {
        const Pattern y = simulate_pattern(g);
        Eigen::ArrayXXd locals(n, nr);
        Eigen::ArrayXd row(nr);
        int k = 0;
        for (int i = 0; i < N; ++i) {
            if (!y.observed(i)) continue;
            table->local_fractions(y, i, row);
            locals.row(k++) = row.transpose();
        }
        sim_avgs.row(g) = locals.colwise().mean();
        if (!options.low_memory) sim_locals[static_cast<std::size_t>(g)] = std::move(locals);
    });

    null_dist.m_hat = sim_avgs.colwise().mean().transpose();

    // Pass 2: statistic per simulation against the estimated null mean.
    Eigen::ArrayXXd sim_t(n_sims, nr);
    parallel_for(n_sims, options.workers, [&](int g) {
        Eigen::ArrayXXd locals;
        const Eigen::ArrayXXd* view = nullptr;
        if (options.low_memory) {
            const Pattern y = simulate_pattern(g);
            locals.resize(n, nr);
            Eigen::ArrayXd row(nr);
            int k = 0;
            for (int i = 0; i < N; ++i) {
                if (!y.observed(i)) continue;
                table->local_fractions(y, i, row);
                locals.row(k++) = row.transpose();
            }
            view = &locals;
        } else {
            view = &sim_locals[static_cast<std::size_t>(g)];
        }
        sim_t.row(g) =
            (view->rowwise() - null_dist.m_hat.transpose()).abs().colwise().mean();
    });

    null_dist.t_samples.resize(static_cast<std::size_t>(nr));
    for (int l = 0; l < nr; ++l) {
        auto& samples = null_dist.t_samples[static_cast<std::size_t>(l)];
        samples.resize(static_cast<std::size_t>(n_sims));
        for (int g = 0; g < n_sims; ++g) samples[static_cast<std::size_t>(g)] = sim_t(g, l);
        std::sort(samples.begin(), samples.end());
    }
    return null_dist;
}

double exact_m_null(const StudyArea& sa, int n, double r) {
    const int N = sa.n_units();
    if (n < 1 || n > N) throw ValidationError("observation count out of range");
    constexpr double kBudget = 1e6;
    if (binomial_count_capped(N, n, kBudget) > kBudget)
        throw BudgetError("exact enumeration exceeds the combinatorial budget");

    RadiusGrid grid{(Eigen::ArrayXd(1) << r).finished()};
    const CoverageTable table = CoverageTable::build(sa, grid, 1);

    // Enumerate n-subsets in combinadic order.
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;

    double total = 0.0;
    std::uint64_t count = 0;
    Eigen::ArrayXd local(1);
    while (true) {
        Pattern y = Pattern::zeros(N);
        for (int i : idx) y.set(i);
        double sum = 0.0;
        for (int i : idx) {
            table.local_fractions(y, i, local);
            sum += local[0];
        }
        total += sum / n;
        ++count;

        int pos = n - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == N - n + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int j = pos + 1; j < n; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return total / static_cast<double>(count);
}

int quantile_order_index(double p, int n_sims) {
    const int k = static_cast<int>(std::ceil(p * n_sims - 1e-9));
    return std::clamp(k, 1, n_sims);
}

RkadResult rkad_test(const StudyArea& sa, const Pattern& y, const NullDistribution& null_dist,
                     Alternative alternative, double alpha, const CoverageTable* table) {
    if (!(alpha > 0.0 && alpha <= 0.5)) throw ValidationError("alpha must lie in (0, 0.5]");
    if (y.n < 1) throw UndefinedStatisticError("test needs an observed unit");
    if (null_dist.fingerprint != sa.fingerprint())
        throw CacheMismatchError("null distribution was built for a different study area");
    if (null_dist.n != y.n)
        throw CacheMismatchError("null distribution conditions on n = " +
                                 std::to_string(null_dist.n) + " but the pattern has n = " +
                                 std::to_string(y.n));

    CoverageTable local_table;
    if (table == nullptr) {
        RadiusGrid grid{null_dist.radii};
        local_table = CoverageTable::build(sa, grid, 1);
        table = &local_table;
    } else if (table->study_fingerprint() != sa.fingerprint() ||
               table->n_radii() != static_cast<int>(null_dist.radii.size()) ||
               (table->radii_original() != null_dist.radii).any()) {
        throw CacheMismatchError("coverage table does not match the null distribution");
    }
    const int nr = table->n_radii();
    const int G = null_dist.n_sims;

    // Observed locals for every radius in one sweep.
    Eigen::ArrayXXd locals(y.n, nr);
    Eigen::ArrayXd row(nr);
    int k = 0;
    for (int i = 0; i < sa.n_units(); ++i) {
        if (!y.observed(i)) continue;
        table->local_fractions(y, i, row);
        locals.row(k++) = row.transpose();
    }
    const Eigen::ArrayXd observed_avg = locals.colwise().mean().transpose();
    const Eigen::ArrayXd observed_t =
        (locals.rowwise() - null_dist.m_hat.transpose()).abs().colwise().mean().transpose();

    const double nan = std::numeric_limits<double>::quiet_NaN();
    RkadResult result;
    result.alternative = alternative;
    result.alpha = alpha;
    result.rows.resize(static_cast<std::size_t>(nr));
    for (int l = 0; l < nr; ++l) {
        const auto& samples = null_dist.t_samples[static_cast<std::size_t>(l)];
        RadiusDecision& d = result.rows[static_cast<std::size_t>(l)];
        d.radius = null_dist.radii[l];
        d.m_avg = observed_avg[l];
        d.t_obs = observed_t[l];
        d.crit_lo = nan;
        d.crit_hi = nan;

        const auto upper_tail = [&](double a) {
            return samples[static_cast<std::size_t>(quantile_order_index(1.0 - a, G) - 1)];
        };
        const auto lower_tail = [&](double a) {
            return samples[static_cast<std::size_t>(quantile_order_index(a, G) - 1)];
        };
        switch (alternative) {
        case Alternative::Clustering:
            d.crit_hi = upper_tail(alpha);
            d.reject = d.t_obs > d.crit_hi;
            break;
        case Alternative::Dispersion:
            d.crit_lo = lower_tail(alpha);
            d.reject = d.t_obs < d.crit_lo;
            break;
        case Alternative::TwoSided:
            d.crit_hi = upper_tail(alpha / 2.0);
            d.crit_lo = lower_tail(alpha / 2.0);
            d.reject = d.t_obs > d.crit_hi || d.t_obs < d.crit_lo;
            break;
        }
        const auto le = std::upper_bound(samples.begin(), samples.end(), d.t_obs);
        d.quantile_pos = static_cast<double>(le - samples.begin()) / static_cast<double>(G);
    }
    return result;
}

} // namespace arealk
