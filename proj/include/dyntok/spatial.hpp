#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

#include "dyntok/dpc.hpp"
#include "dyntok/tensor_io.hpp"

namespace dyntok::spatial {

struct Cell {
    int row = 0;
    int col = 0;

    auto operator<=>(const Cell&) const = default;
};

/// A merged token: one feature vector covering a non-empty set of grid cells.
struct GridToken {
    std::vector<float> feature;
    std::vector<Cell> cells;  // sorted row-major, disjoint across tokens
};

struct MergedImage {
    std::vector<GridToken> tokens;
    int grid_h = 0;
    int grid_w = 0;
};

/// One single-cell token per grid position, row-major. The tensor must hold
/// grid_h*grid_w rows of meta.feature_dim floats.
MergedImage grid_init(std::span<const float> tokens, const io::TokenMeta& meta);

/// Clusters the image's tokens into min(clusters, token count) groups and
/// merges each group into one token whose cells are the union of its members'.
MergedImage merge_step(const MergedImage& img, std::size_t clusters, std::size_t k);

/// Row-major grid of token indices; cell (r, c) carries the index of the
/// token covering it.
std::vector<int> region_map(const MergedImage& img);

}  // namespace dyntok::spatial
