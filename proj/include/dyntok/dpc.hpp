#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dyntok::dpc {

/// A set of feature vectors plus one opaque id per vector identifying its
/// origin (a grid cell for images, an encoded (frame, cell) pair for video).
struct FeatureSet {
    std::vector<float> values;  // row-major [count, dim]
    std::size_t dim = 0;
    std::vector<std::int64_t> ids;

    std::size_t count() const { return dim == 0 ? 0 : values.size() / dim; }

    std::span<const float> row(std::size_t i) const {
        return std::span<const float>(values).subspan(i * dim, dim);
    }

    /// Throws Error("validation") on dimension mismatch or duplicate ids.
    void validate() const;
};

/// FeatureSet with ids 0..count-1.
FeatureSet make_feature_set(std::vector<float> values, std::size_t dim);

struct DensityProfile {
    std::vector<float> rho;
    std::vector<float> delta;
    std::size_t k_used = 0;
};

struct ClusterResult {
    std::vector<std::size_t> centers;     // input indices, ascending
    std::vector<std::size_t> assignment;  // per input row: slot into centers
    std::vector<float> merged;            // [centers.size(), dim], per-cluster means
    std::size_t dim = 0;
    std::vector<std::vector<std::int64_t>> member_ids;  // per slot, input order

    std::size_t cluster_count() const { return centers.size(); }
    std::span<const float> merged_row(std::size_t slot) const {
        return std::span<const float>(merged).subspan(slot * dim, dim);
    }
};

/// Scale-adaptive neighbor count: max(1, round(sqrt(n))).
std::size_t default_neighbor_count(std::size_t n);

/// Resolves the neighbor count for a population of size n, honoring an
/// explicit override when present. Results are clamped to [1, n-1].
struct KnnPolicy {
    std::optional<std::size_t> override_k;

    std::size_t resolve(std::size_t n) const;
};

/// Local density of each vector: exp(-(1/k) * sum of squared distances to its
/// k nearest other vectors). k is clamped to count-1. Requires count >= 2.
std::vector<float> local_density(const FeatureSet& fs, std::size_t k);

/// Distance index of each vector: the minimum squared distance to any
/// strictly denser vector, or the maximum squared distance to any other
/// vector when none is denser.
std::vector<float> distance_index(const FeatureSet& fs, const std::vector<float>& rho);

DensityProfile density_profile(const FeatureSet& fs, std::size_t k);

/// The c indices with the largest rho*delta scores, ties broken toward the
/// lower index; returned ascending by input index. c >= count selects all.
std::vector<std::size_t> select_centers(const std::vector<float>& rho,
                                        const std::vector<float>& delta,
                                        std::size_t c);

/// Maps every vector to the nearest center (squared Euclidean distance),
/// breaking ties toward the center listed first. Centers map to themselves.
std::vector<std::size_t> assign_to_centers(const FeatureSet& fs,
                                           const std::vector<std::size_t>& centers);

/// Full density-peaks clustering: density, distance index, center selection,
/// nearest-center assignment, per-cluster mean merge. count == 1 or
/// c >= count degenerates to identity clustering.
ClusterResult cluster(const FeatureSet& fs, std::size_t c, std::size_t k);

}  // namespace dyntok::dpc
