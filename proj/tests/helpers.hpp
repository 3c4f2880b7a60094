#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dyntok/dpc.hpp"
#include "dyntok/synth.hpp"
#include "oracle.hpp"

namespace testutil {

inline dyntok::dpc::FeatureSet fs_from(const oracle::Matrix& pts) {
    std::vector<float> flat;
    for (const auto& row : pts) {
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return dyntok::dpc::make_feature_set(std::move(flat), pts[0].size());
}

inline oracle::Matrix random_matrix(dyntok::synth::Rng& rng, std::size_t n, std::size_t d,
                                    double lo = -1.0, double hi = 1.0) {
    oracle::Matrix pts(n, std::vector<float>(d));
    for (auto& row : pts) {
        for (float& v : row) {
            v = static_cast<float>(lo + (hi - lo) * rng.next_unit());
        }
    }
    return pts;
}

inline bool close_rel(double actual, double expected, double rel, double abs_floor = 1e-9) {
    double diff = std::fabs(actual - expected);
    return diff <= abs_floor || diff <= rel * std::fabs(expected);
}

}  // namespace testutil
