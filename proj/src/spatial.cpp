#include "dyntok/spatial.hpp"

#include <algorithm>
#include <string>

#include "dyntok/error.hpp"

namespace dyntok::spatial {

namespace {

void check_image(const MergedImage& img) {
    if (img.grid_h < 1 || img.grid_w < 1) {
        fail("validation", "merged image: grid dimensions must be positive");
    }
    if (img.tokens.empty()) {
        fail("validation", "merged image: no tokens");
    }
}

}  // namespace

MergedImage grid_init(std::span<const float> tokens, const io::TokenMeta& meta) {
    meta.validate();
    std::size_t l = meta.tokens_per_frame();
    std::size_t d = meta.feature_dim;
    if (tokens.size() != l * d) {
        fail("validation", "token tensor holds " + std::to_string(tokens.size() / d) +
                               " rows but the grid needs " + std::to_string(l));
    }
    MergedImage img;
    img.grid_h = meta.grid_h;
    img.grid_w = meta.grid_w;
    img.tokens.resize(l);
    for (std::size_t i = 0; i < l; ++i) {
        GridToken& tok = img.tokens[i];
        tok.feature.assign(tokens.begin() + static_cast<std::ptrdiff_t>(i * d),
                           tokens.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
        tok.cells = {Cell{static_cast<int>(i) / meta.grid_w, static_cast<int>(i) % meta.grid_w}};
    }
    return img;
}

MergedImage merge_step(const MergedImage& img, std::size_t clusters, std::size_t k) {
    check_image(img);
    std::size_t n = img.tokens.size();
    std::size_t d = img.tokens.front().feature.size();

    dpc::FeatureSet fs;
    fs.dim = d;
    fs.values.reserve(n * d);
    fs.ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const GridToken& tok = img.tokens[i];
        if (tok.feature.size() != d) {
            fail("validation", "merged image: inconsistent feature dimensions");
        }
        fs.values.insert(fs.values.end(), tok.feature.begin(), tok.feature.end());
        fs.ids[i] = static_cast<std::int64_t>(i);
    }

    dpc::ClusterResult result = dpc::cluster(fs, clusters, k);

    MergedImage out;
    out.grid_h = img.grid_h;
    out.grid_w = img.grid_w;
    out.tokens.resize(result.cluster_count());
    for (std::size_t s = 0; s < result.cluster_count(); ++s) {
        GridToken& tok = out.tokens[s];
        std::span<const float> row = result.merged_row(s);
        tok.feature.assign(row.begin(), row.end());
        for (std::int64_t member : result.member_ids[s]) {
            const GridToken& src = img.tokens[static_cast<std::size_t>(member)];
            tok.cells.insert(tok.cells.end(), src.cells.begin(), src.cells.end());
        }
        std::sort(tok.cells.begin(), tok.cells.end());
    }
    return out;
}

std::vector<int> region_map(const MergedImage& img) {
    check_image(img);
    std::vector<int> labels(static_cast<std::size_t>(img.grid_h) *
                                static_cast<std::size_t>(img.grid_w),
                            -1);
    for (std::size_t t = 0; t < img.tokens.size(); ++t) {
        for (const Cell& cell : img.tokens[t].cells) {
            if (cell.row < 0 || cell.row >= img.grid_h || cell.col < 0 || cell.col >= img.grid_w) {
                fail("validation", "merged image: cell outside grid");
            }
            labels[static_cast<std::size_t>(cell.row) * static_cast<std::size_t>(img.grid_w) +
                   static_cast<std::size_t>(cell.col)] = static_cast<int>(t);
        }
    }
    for (int label : labels) {
        if (label < 0) {
            fail("validation", "merged image: cells do not cover the grid");
        }
    }
    return labels;
}

}  // namespace dyntok::spatial
