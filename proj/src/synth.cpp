#include "dyntok/synth.hpp"

#include <cmath>
#include <numbers>

#include "dyntok/error.hpp"

namespace dyntok::synth {

std::uint64_t Rng::next() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double Rng::next_unit() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::next_gauss() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 1.0 - next_unit();  // (0, 1], keeps log finite
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::size_t Rng::next_index(std::size_t n) {
    return static_cast<std::size_t>(next() % n);
}

namespace {

struct Blob {
    int row;
    int col;
    std::vector<float> prototype;
};

std::vector<float> blob_image(Rng& rng, int grid_h, int grid_w, std::size_t dim, int blobs,
                              double noise) {
    std::vector<Blob> seeds(static_cast<std::size_t>(blobs));
    for (Blob& blob : seeds) {
        blob.row = static_cast<int>(rng.next_index(static_cast<std::size_t>(grid_h)));
        blob.col = static_cast<int>(rng.next_index(static_cast<std::size_t>(grid_w)));
        blob.prototype.resize(dim);
        for (float& v : blob.prototype) {
            v = static_cast<float>(rng.next_gauss());
        }
    }

    std::vector<float> tokens(static_cast<std::size_t>(grid_h) *
                              static_cast<std::size_t>(grid_w) * dim);
    for (int r = 0; r < grid_h; ++r) {
        for (int c = 0; c < grid_w; ++c) {
            std::size_t best = 0;
            long best_dist = -1;
            for (std::size_t b = 0; b < seeds.size(); ++b) {
                long dr = r - seeds[b].row;
                long dc = c - seeds[b].col;
                long dist = dr * dr + dc * dc;
                if (best_dist < 0 || dist < best_dist) {
                    best_dist = dist;
                    best = b;
                }
            }
            float* cell = tokens.data() +
                          (static_cast<std::size_t>(r) * static_cast<std::size_t>(grid_w) +
                           static_cast<std::size_t>(c)) *
                              dim;
            for (std::size_t d = 0; d < dim; ++d) {
                cell[d] = seeds[best].prototype[d] + static_cast<float>(noise * rng.next_gauss());
            }
        }
    }
    return tokens;
}

void check_spec(int grid_h, int grid_w, std::size_t dim, int blobs) {
    if (grid_h < 1 || grid_w < 1) {
        fail("validation", "synthetic grid dimensions must be positive");
    }
    if (dim < 1) {
        fail("validation", "synthetic feature dimension must be positive");
    }
    if (blobs < 1) {
        fail("validation", "synthetic blob count must be positive");
    }
}

}  // namespace

std::vector<float> gen_image_tokens(const ImageSpec& spec) {
    check_spec(spec.grid_h, spec.grid_w, spec.dim, spec.blobs);
    Rng rng(spec.seed);
    return blob_image(rng, spec.grid_h, spec.grid_w, spec.dim, spec.blobs, 0.05);
}

std::vector<float> gen_video_tokens(const VideoSpec& spec) {
    check_spec(spec.grid_h, spec.grid_w, spec.dim, spec.blobs);
    if (spec.frames < 1) {
        fail("validation", "synthetic video needs at least one frame");
    }
    Rng rng(spec.seed);
    std::vector<float> phase_a =
        blob_image(rng, spec.grid_h, spec.grid_w, spec.dim, spec.blobs, 0.05);
    std::vector<float> phase_b =
        blob_image(rng, spec.grid_h, spec.grid_w, spec.dim, spec.blobs, 0.05);

    std::size_t per_frame = phase_a.size();
    std::size_t split = (spec.frames + 1) / 2;
    std::vector<float> tokens(spec.frames * per_frame);
    for (std::size_t f = 0; f < spec.frames; ++f) {
        const std::vector<float>& base = f < split ? phase_a : phase_b;
        float* dst = tokens.data() + f * per_frame;
        for (std::size_t i = 0; i < per_frame; ++i) {
            dst[i] = base[i] + static_cast<float>(0.02 * rng.next_gauss());
        }
    }
    return tokens;
}

}  // namespace dyntok::synth
