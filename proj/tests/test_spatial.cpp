#include <algorithm>
#include <set>
#include <vector>

#include <doctest.h>

#include "dyntok/error.hpp"
#include "dyntok/spatial.hpp"
#include "dyntok/synth.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace dyntok;

namespace {

// Union of all cells must equal the full grid with no overlaps.
void check_partition(const spatial::MergedImage& img) {
    std::set<std::pair<int, int>> seen;
    for (const spatial::GridToken& tok : img.tokens) {
        REQUIRE(!tok.cells.empty());
        for (const spatial::Cell& cell : tok.cells) {
            CHECK(cell.row >= 0);
            CHECK(cell.row < img.grid_h);
            CHECK(cell.col >= 0);
            CHECK(cell.col < img.grid_w);
            CHECK(seen.insert({cell.row, cell.col}).second);
        }
    }
    CHECK(seen.size() == static_cast<std::size_t>(img.grid_h) *
                             static_cast<std::size_t>(img.grid_w));
}

}  // namespace

TEST_SUITE("spatial") {

TEST_CASE("grid init produces one single-cell token per position") {
    std::vector<float> tokens{0.0f, 1.0f, 2.0f, 3.0f};
    io::TokenMeta meta{2, 2, 0, 1};
    spatial::MergedImage img = spatial::grid_init(tokens, meta);
    REQUIRE(img.tokens.size() == 4);
    CHECK(img.tokens[0].cells == std::vector<spatial::Cell>{{0, 0}});
    CHECK(img.tokens[1].cells == std::vector<spatial::Cell>{{0, 1}});
    CHECK(img.tokens[2].cells == std::vector<spatial::Cell>{{1, 0}});
    CHECK(img.tokens[3].cells == std::vector<spatial::Cell>{{1, 1}});
    CHECK(img.tokens[2].feature == std::vector<float>{2.0f});
}

TEST_CASE("a 16x16 grid yields 256 tokens") {
    std::vector<float> tokens(256 * 8, 0.5f);
    io::TokenMeta meta{16, 16, 0, 8};
    spatial::MergedImage img = spatial::grid_init(tokens, meta);
    CHECK(img.tokens.size() == 256);
    check_partition(img);
}

TEST_CASE("grid init rejects a token count that does not match the grid") {
    std::vector<float> tokens(5, 0.0f);
    io::TokenMeta meta{2, 2, 0, 1};
    CHECK_THROWS_AS(spatial::grid_init(tokens, meta), Error);
}

TEST_CASE("merging identical tokens into one cluster keeps the feature") {
    std::vector<float> tokens(4 * 3, 1.25f);
    io::TokenMeta meta{2, 2, 0, 3};
    spatial::MergedImage img = spatial::grid_init(tokens, meta);
    spatial::MergedImage merged = spatial::merge_step(img, 1, 2);
    REQUIRE(merged.tokens.size() == 1);
    CHECK(merged.tokens[0].feature == std::vector<float>(3, 1.25f));
    CHECK(merged.tokens[0].cells.size() == 4);
    check_partition(merged);
}

TEST_CASE("256 tokens merge to 64 and still partition the grid") {
    synth::Rng rng(41);
    std::vector<float> tokens(256 * 16);
    for (float& v : tokens) {
        v = static_cast<float>(rng.next_gauss());
    }
    io::TokenMeta meta{16, 16, 0, 16};
    spatial::MergedImage img = spatial::grid_init(tokens, meta);
    spatial::MergedImage merged = spatial::merge_step(img, 64, 16);
    CHECK(merged.tokens.size() == 64);
    check_partition(merged);
}

TEST_CASE("two-blob grid splits left and right halves") {
    // Left half of a 4x4 grid sits near a, the right half near b.
    oracle::Matrix pts;
    synth::Rng rng(42);
    io::TokenMeta meta{4, 4, 0, 2};
    std::vector<float> tokens;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            float base0 = c < 2 ? 0.0f : 9.0f;
            float base1 = c < 2 ? 0.0f : -9.0f;
            float eps0 = static_cast<float>(0.01 * rng.next_unit());
            float eps1 = static_cast<float>(0.01 * rng.next_unit());
            tokens.push_back(base0 + eps0);
            tokens.push_back(base1 + eps1);
            pts.push_back({base0 + eps0, base1 + eps1});
        }
    }
    spatial::MergedImage img = spatial::grid_init(tokens, meta);
    spatial::MergedImage merged = spatial::merge_step(img, 2, 4);
    REQUIRE(merged.tokens.size() == 2);
    check_partition(merged);

    oracle::Result expected = oracle::cluster(pts, 2, 4);
    for (std::size_t t = 0; t < 2; ++t) {
        std::set<int> cols;
        for (const spatial::Cell& cell : merged.tokens[t].cells) {
            cols.insert(cell.col);
        }
        bool left = cols == std::set<int>{0, 1};
        bool right = cols == std::set<int>{2, 3};
        CHECK((left || right));
    }
    // Cluster membership agrees with the naive kernel.
    std::vector<int> label(16, -1);
    for (std::size_t t = 0; t < 2; ++t) {
        for (const spatial::Cell& cell : merged.tokens[t].cells) {
            label[cell.row * 4 + cell.col] = static_cast<int>(t);
        }
    }
    for (std::size_t i = 0; i < 16; ++i) {
        for (std::size_t j = 0; j < 16; ++j) {
            CHECK((label[i] == label[j]) == (expected.assignment[i] == expected.assignment[j]));
        }
    }
}

TEST_CASE("token count after a step is min(c, previous count)") {
    synth::Rng rng(43);
    std::vector<float> tokens(36 * 4);
    for (float& v : tokens) {
        v = static_cast<float>(rng.next_gauss());
    }
    io::TokenMeta meta{6, 6, 0, 4};
    spatial::MergedImage img = spatial::grid_init(tokens, meta);
    spatial::MergedImage a = spatial::merge_step(img, 10, 3);
    CHECK(a.tokens.size() == 10);
    spatial::MergedImage b = spatial::merge_step(a, 100, 3);
    CHECK(b.tokens.size() == 10);
    check_partition(b);
}

TEST_CASE("merged features equal the mean of their immediate members") {
    synth::Rng rng(44);
    std::vector<float> tokens(25 * 3);
    for (float& v : tokens) {
        v = static_cast<float>(rng.next_gauss());
    }
    io::TokenMeta meta{5, 5, 0, 3};
    spatial::MergedImage img = spatial::grid_init(tokens, meta);
    spatial::MergedImage merged = spatial::merge_step(img, 6, 4);
    for (const spatial::GridToken& tok : merged.tokens) {
        std::vector<double> mean(3, 0.0);
        for (const spatial::Cell& cell : tok.cells) {
            std::size_t idx = static_cast<std::size_t>(cell.row) * 5 +
                              static_cast<std::size_t>(cell.col);
            for (std::size_t d = 0; d < 3; ++d) {
                mean[d] += tokens[idx * 3 + d];
            }
        }
        for (std::size_t d = 0; d < 3; ++d) {
            CHECK(testutil::close_rel(tok.feature[d], mean[d] / tok.cells.size(), 1e-6));
        }
    }
}

TEST_CASE("partition survives chained merge steps") {
    synth::Rng rng(45);
    for (int iter = 0; iter < 20; ++iter) {
        int gh = 2 + static_cast<int>(rng.next_index(5));
        int gw = 2 + static_cast<int>(rng.next_index(5));
        std::size_t d = 1 + rng.next_index(5);
        std::size_t l = static_cast<std::size_t>(gh) * static_cast<std::size_t>(gw);
        std::vector<float> tokens(l * d);
        for (float& v : tokens) {
            v = static_cast<float>(rng.next_gauss());
        }
        io::TokenMeta meta{gh, gw, 0, d};
        spatial::MergedImage img = spatial::grid_init(tokens, meta);
        for (int step = 0; step < 3; ++step) {
            std::size_t c = 1 + rng.next_index(img.tokens.size());
            img = spatial::merge_step(img, c, dpc::KnnPolicy{}.resolve(img.tokens.size()));
            check_partition(img);
        }
    }
}

TEST_CASE("region map labels the identity image row-major") {
    std::vector<float> tokens{0, 1, 2, 3, 4, 5};
    io::TokenMeta meta{2, 3, 0, 1};
    spatial::MergedImage img = spatial::grid_init(tokens, meta);
    CHECK(spatial::region_map(img) == std::vector<int>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("region map of a whole-grid token is all zeros") {
    std::vector<float> tokens(9, 2.0f);
    io::TokenMeta meta{3, 3, 0, 1};
    spatial::MergedImage merged = spatial::merge_step(spatial::grid_init(tokens, meta), 1, 2);
    CHECK(spatial::region_map(merged) == std::vector<int>(9, 0));
}

TEST_CASE("region map is consistent with member cells") {
    synth::Rng rng(46);
    std::vector<float> tokens(16 * 2);
    for (float& v : tokens) {
        v = static_cast<float>(rng.next_gauss());
    }
    io::TokenMeta meta{4, 4, 0, 2};
    spatial::MergedImage merged = spatial::merge_step(spatial::grid_init(tokens, meta), 5, 3);
    std::vector<int> labels = spatial::region_map(merged);
    for (std::size_t t = 0; t < merged.tokens.size(); ++t) {
        for (const spatial::Cell& cell : merged.tokens[t].cells) {
            CHECK(labels[static_cast<std::size_t>(cell.row) * 4 +
                         static_cast<std::size_t>(cell.col)] == static_cast<int>(t));
        }
    }
}

}  // TEST_SUITE
