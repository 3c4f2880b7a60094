#include "dyntok/dpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dyntok/error.hpp"

namespace dyntok::dpc {

namespace {

// Squared Euclidean distance accumulated in double, dimension-ascending.
// Every distance in this module flows through here so repeated evaluations
// of the same pair are bit-identical.
double sq_dist(std::span<const float> a, std::span<const float> b) {
    double acc = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
        acc += diff * diff;
    }
    return acc;
}

void fill_distance_row(const FeatureSet& fs, std::size_t i, std::vector<double>& row) {
    std::span<const float> a = fs.row(i);
    for (std::size_t j = 0; j < fs.count(); ++j) {
        row[j] = sq_dist(a, fs.row(j));
    }
}

}  // namespace

void FeatureSet::validate() const {
    if (dim < 1) {
        fail("validation", "feature set: dimension must be positive");
    }
    if (values.size() % dim != 0) {
        fail("validation", "feature set: value buffer is not a multiple of dim");
    }
    if (count() < 1) {
        fail("validation", "feature set: at least one vector required");
    }
    if (ids.size() != count()) {
        fail("validation", "feature set: ids/vector count mismatch");
    }
    std::vector<std::int64_t> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        fail("validation", "feature set: duplicate ids");
    }
}

FeatureSet make_feature_set(std::vector<float> values, std::size_t dim) {
    FeatureSet fs;
    fs.values = std::move(values);
    fs.dim = dim;
    std::size_t n = dim == 0 ? 0 : fs.values.size() / dim;
    fs.ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        fs.ids[i] = static_cast<std::int64_t>(i);
    }
    return fs;
}

std::size_t default_neighbor_count(std::size_t n) {
    auto k = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    return std::max<std::size_t>(1, k);
}

std::size_t KnnPolicy::resolve(std::size_t n) const {
    std::size_t k = override_k.value_or(default_neighbor_count(n));
    k = std::max<std::size_t>(1, k);
    if (n > 1) {
        k = std::min(k, n - 1);
    }
    return k;
}

std::vector<float> local_density(const FeatureSet& fs, std::size_t k) {
    fs.validate();
    std::size_t n = fs.count();
    if (n < 2) {
        fail("degenerate-input", "local density needs at least two vectors");
    }
    if (k < 1) {
        fail("validation", "neighbor count must be at least 1");
    }
    std::size_t k_used = std::min(k, n - 1);

    std::vector<float> rho(n);
    std::vector<double> row(n);
    std::vector<std::pair<double, std::size_t>> neighbors;
    neighbors.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        fill_distance_row(fs, i, row);
        neighbors.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                neighbors.emplace_back(row[j], j);
            }
        }
        std::partial_sort(neighbors.begin(),
                          neighbors.begin() + static_cast<std::ptrdiff_t>(k_used),
                          neighbors.end());
        // Summed in ascending (distance, index) order so the result does not
        // depend on the input permutation when distances are distinct.
        double sum = 0.0;
        for (std::size_t m = 0; m < k_used; ++m) {
            sum += neighbors[m].first;
        }
        rho[i] = static_cast<float>(std::exp(-sum / static_cast<double>(k_used)));
    }
    return rho;
}

std::vector<float> distance_index(const FeatureSet& fs, const std::vector<float>& rho) {
    fs.validate();
    std::size_t n = fs.count();
    if (rho.size() != n) {
        fail("validation", "rho length does not match feature set");
    }
    if (n < 2) {
        fail("degenerate-input", "distance index needs at least two vectors");
    }

    std::vector<float> delta(n);
    std::vector<double> row(n);
    for (std::size_t i = 0; i < n; ++i) {
        fill_distance_row(fs, i, row);
        double min_denser = std::numeric_limits<double>::infinity();
        double max_any = 0.0;
        bool has_denser = false;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            if (rho[j] > rho[i]) {
                has_denser = true;
                min_denser = std::min(min_denser, row[j]);
            }
            max_any = std::max(max_any, row[j]);
        }
        delta[i] = static_cast<float>(has_denser ? min_denser : max_any);
    }
    return delta;
}

DensityProfile density_profile(const FeatureSet& fs, std::size_t k) {
    DensityProfile profile;
    profile.rho = local_density(fs, k);
    profile.delta = distance_index(fs, profile.rho);
    profile.k_used = std::min(k, fs.count() - 1);
    return profile;
}

std::vector<std::size_t> select_centers(const std::vector<float>& rho,
                                        const std::vector<float>& delta,
                                        std::size_t c) {
    if (c < 1) {
        fail("validation", "center count must be at least 1");
    }
    if (rho.size() != delta.size()) {
        fail("validation", "rho/delta length mismatch");
    }
    std::size_t n = rho.size();
    if (c >= n) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) {
            all[i] = i;
        }
        return all;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    auto score = [&](std::size_t i) {
        return static_cast<double>(rho[i]) * static_cast<double>(delta[i]);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(c),
                      order.end(), [&](std::size_t a, std::size_t b) {
                          double sa = score(a), sb = score(b);
                          if (sa != sb) {
                              return sa > sb;
                          }
                          return a < b;
                      });
    std::vector<std::size_t> centers(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(c));
    std::sort(centers.begin(), centers.end());
    return centers;
}

std::vector<std::size_t> assign_to_centers(const FeatureSet& fs,
                                           const std::vector<std::size_t>& centers) {
    fs.validate();
    std::size_t n = fs.count();
    if (centers.empty()) {
        fail("validation", "assignment requires at least one center");
    }
    for (std::size_t c : centers) {
        if (c >= n) {
            fail("validation", "center index " + std::to_string(c) + " out of range");
        }
    }

    std::vector<std::size_t> slot_of(n, centers.size());
    for (std::size_t s = 0; s < centers.size(); ++s) {
        slot_of[centers[s]] = s;
    }

    std::vector<std::size_t> assignment(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (slot_of[i] < centers.size()) {
            assignment[i] = slot_of[i];
            continue;
        }
        std::span<const float> v = fs.row(i);
        std::size_t best = 0;
        double best_dist = sq_dist(v, fs.row(centers[0]));
        for (std::size_t s = 1; s < centers.size(); ++s) {
            double d = sq_dist(v, fs.row(centers[s]));
            if (d < best_dist) {
                best_dist = d;
                best = s;
            }
        }
        assignment[i] = best;
    }
    return assignment;
}

ClusterResult cluster(const FeatureSet& fs, std::size_t c, std::size_t k) {
    fs.validate();
    if (c < 1) {
        fail("validation", "cluster count must be at least 1");
    }
    std::size_t n = fs.count();

    ClusterResult result;
    result.dim = fs.dim;

    if (n == 1 || c >= n) {
        result.centers.resize(n);
        result.assignment.resize(n);
        result.merged = fs.values;
        result.member_ids.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            result.centers[i] = i;
            result.assignment[i] = i;
            result.member_ids[i] = {fs.ids[i]};
        }
        return result;
    }

    std::vector<float> rho = local_density(fs, k);
    std::vector<float> delta = distance_index(fs, rho);
    result.centers = select_centers(rho, delta, c);
    result.assignment = assign_to_centers(fs, result.centers);

    std::size_t clusters = result.centers.size();
    std::vector<double> sums(clusters * fs.dim, 0.0);
    std::vector<std::size_t> counts(clusters, 0);
    result.member_ids.resize(clusters);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t slot = result.assignment[i];
        std::span<const float> v = fs.row(i);
        for (std::size_t d = 0; d < fs.dim; ++d) {
            sums[slot * fs.dim + d] += static_cast<double>(v[d]);
        }
        ++counts[slot];
        result.member_ids[slot].push_back(fs.ids[i]);
    }
    result.merged.resize(clusters * fs.dim);
    for (std::size_t s = 0; s < clusters; ++s) {
        for (std::size_t d = 0; d < fs.dim; ++d) {
            result.merged[s * fs.dim + d] =
                static_cast<float>(sums[s * fs.dim + d] / static_cast<double>(counts[s]));
        }
    }
    return result;
}

}  // namespace dyntok::dpc
