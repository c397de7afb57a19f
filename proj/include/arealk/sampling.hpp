#pragma once

#include "arealk/pattern.hpp"
#include "arealk/study_area.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <set>
#include <vector>

namespace arealk {

/// Reproducible random stream: a fixed (seed, stream) pair yields the same
/// draw sequence on every run and thread count. Streams with distinct ids
/// are mixed apart before seeding the engine.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi);
    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t uniform_int(std::uint64_t bound);

    /// Derived stream for retries and nested simulations.
    [[nodiscard]] RngStream substream(std::uint64_t index) const;

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

/// Nonnegative selection weights over units. Normalization to probabilities
/// happens inside the samplers; only the total must be positive.
using WeightVector = Eigen::VectorXd;

/// Validates a weight vector: finite, nonnegative, positive total.
void validate_weights(const WeightVector& w);

/// Successive-draws weighted sampling without replacement: k distinct units,
/// each draw proportional to the remaining weights. Throws
/// InfeasibleSampleError when fewer than k units have positive weight.
Pattern swor(int n_units, int k, const WeightVector& w, RngStream& rng);

/// Uniform-weight convenience overload.
Pattern swor_uniform(int n_units, int k, RngStream& rng);

/// Weight vector that makes zone units q times likelier than the rest.
WeightVector single_zone_weights(const StudyArea& sa, const std::set<std::int32_t>& zone, double q);

struct ClusterSampleOptions {
    /// When true, only neighbors of the m seed units are reweighted
    /// (weights stay fixed after seeding). The default recomputes adjacency
    /// weights against the full selected set after every draw.
    bool static_seed_weights = false;
    int max_retries = 100;
};

/// Two-stage cluster/dispersion generator: m uniform seed units, then k - m
/// draws where units adjacent to the selection carry weight q and the rest
/// weight 1. q > 1 clusters, q < 1 disperses, q == 0 forbids adjacency
/// outright (the result is an independent set in the contiguity graph).
Pattern cluster_sample(const StudyArea& sa, int k, int m, double q, RngStream& rng,
                       const ClusterSampleOptions& options = {});

} // namespace arealk
