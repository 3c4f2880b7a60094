#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dyntok/pipeline.hpp"

namespace dyntok::regions {

/// One named label grid: labels[r * grid_w + c] is the cluster label of cell
/// (r, c). Labels are dense in [0, clusters) per grid set they belong to.
struct LabelGrid {
    std::string name;
    std::vector<int> labels;
};

struct RegionSet {
    int grid_h = 0;
    int grid_w = 0;
    std::vector<LabelGrid> grids;
};

/// Per-step label grids ("step1".."step3") for an image representation.
RegionSet image_regions(const pipeline::MultiScaleRep& rep, int grid_h, int grid_w);

/// Per-step, per-frame label grids ("step1_frame0000", ...) for a video
/// representation. Labels are relative to the frame's event, so each frame's
/// grid indexes into its own event's clusters for that step.
RegionSet video_regions(const pipeline::MultiScaleRep& rep, int grid_h, int grid_w,
                        std::size_t frames);

std::string to_json(const RegionSet& set);

/// Parses a region set; throws Error("format") on malformed input.
RegionSet from_json(const std::string& text);

/// Deterministic palette: golden-ratio hue rotation by label index.
std::array<std::uint8_t, 3> palette_color(int label);

/// Binary PPM (P6) bytes, one pixel per grid cell.
std::vector<std::uint8_t> render_ppm(const RegionSet& set, const LabelGrid& grid);

}  // namespace dyntok::regions
