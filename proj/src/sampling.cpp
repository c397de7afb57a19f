#include "arealk/sampling.hpp"

#include "arealk/hash.hpp"

#include <cmath>
#include <limits>

namespace arealk {

namespace {

/// Fenwick tree over unit weights supporting O(log n) draw-and-remove.
class WeightTree {
public:
    explicit WeightTree(const WeightVector& w)
        : n_(static_cast<int>(w.size())), tree_(static_cast<std::size_t>(n_) + 1, 0.0) {
        for (int i = 0; i < n_; ++i) tree_[static_cast<std::size_t>(i) + 1] = w[i];
        for (int i = 1; i <= n_; ++i) {
            const int parent = i + (i & -i);
            if (parent <= n_) tree_[static_cast<std::size_t>(parent)] += tree_[static_cast<std::size_t>(i)];
        }
        total_ = w.sum();
    }

    [[nodiscard]] double total() const { return total_; }

    void add(int i, double delta) {
        total_ += delta;
        for (int k = i + 1; k <= n_; k += k & -k) tree_[static_cast<std::size_t>(k)] += delta;
    }

    /// Index of the first unit whose cumulative weight exceeds target,
    /// for target in [0, total).
    [[nodiscard]] int find(double target) const {
        int pos = 0;
        int mask = 1;
        while ((mask << 1) <= n_) mask <<= 1;
        for (; mask > 0; mask >>= 1) {
            const int next = pos + mask;
            if (next <= n_ && tree_[static_cast<std::size_t>(next)] <= target) {
                pos = next;
                target -= tree_[static_cast<std::size_t>(next)];
            }
        }
        return pos; // 0-based unit index
    }

private:
    int n_;
    std::vector<double> tree_;
    double total_;
};

int draw_index(WeightTree& tree, RngStream& rng) {
    const double total = tree.total();
    if (!(total > 0.0)) throw InfeasibleSampleError("weight pool exhausted");
    double u = rng.uniform() * total;
    if (u >= total) u = std::nextafter(total, 0.0);
    return tree.find(u);
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(mix64({seed, stream})) {}

double RngStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::uniform_int(std::uint64_t bound) {
    if (bound == 0) throw ValidationError("uniform_int bound must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % bound;
}

RngStream RngStream::substream(std::uint64_t index) const {
    return RngStream(mix64({seed_, stream_, 0x5b5742ea3ULL}), index);
}

void validate_weights(const WeightVector& w) {
    if (!w.allFinite() || (w.array() < 0.0).any())
        throw ValidationError("weights must be finite and nonnegative");
    if (!(w.sum() > 0.0)) throw ValidationError("weights must have positive total");
}

Pattern swor(int n_units, int k, const WeightVector& w, RngStream& rng) {
    if (static_cast<int>(w.size()) != n_units)
        throw ValidationError("weight vector length does not match unit count");
    if (k < 0 || k > n_units) throw ValidationError("sample size out of range");
    validate_weights(w);
    const int positive = static_cast<int>((w.array() > 0.0).count());
    if (k > positive)
        throw InfeasibleSampleError("requested more units than have positive weight");

    Pattern p = Pattern::zeros(n_units);
    WeightTree tree(w);
    for (int draw = 0; draw < k; ++draw) {
        const int i = draw_index(tree, rng);
        p.set(i);
        tree.add(i, -w[i]);
    }
    return p;
}

Pattern swor_uniform(int n_units, int k, RngStream& rng) {
    return swor(n_units, k, WeightVector::Ones(n_units), rng);
}

WeightVector single_zone_weights(const StudyArea& sa, const std::set<std::int32_t>& zone, double q) {
    if (zone.empty()) throw ValidationError("zone must be nonempty");
    if (!(q > 0.0)) throw ValidationError("relative risk q must be positive");
    WeightVector w = WeightVector::Ones(sa.n_units());
    for (std::int32_t i : zone) {
        if (i < 0 || i >= sa.n_units()) throw ValidationError("zone unit id out of range");
        w[i] = q;
    }
    return w;
}

Pattern cluster_sample(const StudyArea& sa, int k, int m, double q, RngStream& rng,
                       const ClusterSampleOptions& options) {
    const int n = sa.n_units();
    if (m < 0 || m > k || k > n) throw ValidationError("cluster sample requires 0 <= m <= k <= N");
    if (q < 0.0) throw ValidationError("adjacency weight q must be nonnegative");

    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        // The first attempt consumes the caller's stream; retries branch off
        // derived substreams so a retried call stays reproducible.
        RngStream retry = rng.substream(static_cast<std::uint64_t>(attempt));
        RngStream& r = (attempt == 0) ? rng : retry;

        Pattern p = swor_uniform(n, m, r);

        if (q == 0.0) {
            // The full pattern must be an independent set; uniform seeds can
            // violate that, which counts as an infeasible draw.
            bool seeds_ok = true;
            for (int i = 0; i < n && seeds_ok; ++i) {
                if (!p.observed(i)) continue;
                for (std::int32_t nb : sa.neighbors(i)) {
                    if (p.observed(nb)) {
                        seeds_ok = false;
                        break;
                    }
                }
            }
            if (!seeds_ok) continue;
        }

        // Per-unit weight state: selected 0, adjacent to selection q, else 1.
        enum : std::uint8_t { kFree = 0, kBoosted = 1, kSelected = 2 };
        std::vector<std::uint8_t> state(static_cast<std::size_t>(n), kFree);
        WeightVector w = WeightVector::Ones(n);
        WeightTree tree(w);
        auto select_unit = [&](int i, bool boost_neighbors) {
            if (state[static_cast<std::size_t>(i)] != kSelected) {
                tree.add(i, -w[i]);
                w[i] = 0.0;
                state[static_cast<std::size_t>(i)] = kSelected;
            }
            if (!boost_neighbors) return;
            for (std::int32_t nb : sa.neighbors(i)) {
                if (state[static_cast<std::size_t>(nb)] == kFree) {
                    tree.add(nb, q - w[nb]);
                    w[nb] = q;
                    state[static_cast<std::size_t>(nb)] = kBoosted;
                }
            }
        };

        for (int i = 0; i < n; ++i)
            if (p.observed(i)) select_unit(i, /*boost_neighbors=*/true);

        bool failed = false;
        for (int draw = m; draw < k; ++draw) {
            if (!(tree.total() > 0.0)) {
                failed = true;
                break;
            }
            const int i = draw_index(tree, r);
            p.set(i);
            select_unit(i, /*boost_neighbors=*/!options.static_seed_weights);
        }
        if (!failed) return p;
    }
    throw InfeasibleSampleError("cluster_sample: no feasible pattern after " +
                                std::to_string(options.max_retries) + " retries");
}

} // namespace arealk
