#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dyntok::synth {

/// Deterministic generator (splitmix64) independent of the standard library's
/// distribution implementations, so seeded outputs are stable everywhere.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_{seed} {}

    std::uint64_t next();

    /// Uniform in [0, 1) with 53 bits of precision.
    double next_unit();

    /// Standard normal via Box-Muller.
    double next_gauss();

    /// Uniform integer in [0, n).
    std::size_t next_index(std::size_t n);

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct ImageSpec {
    int grid_h = 16;
    int grid_w = 16;
    std::size_t dim = 64;
    std::uint64_t seed = 0;
    int blobs = 4;
};

/// Gaussian-blob token grid: each cell takes the feature prototype of its
/// nearest blob seed plus small noise. Returns [grid_h*grid_w, dim].
std::vector<float> gen_image_tokens(const ImageSpec& spec);

struct VideoSpec {
    int grid_h = 16;
    int grid_w = 16;
    std::size_t dim = 64;
    std::size_t frames = 64;
    std::uint64_t seed = 0;
    int blobs = 4;
};

/// Two-phase frame sequence: the first half of the frames perturb one blob
/// image, the second half another. Returns [frames, grid_h*grid_w, dim].
std::vector<float> gen_video_tokens(const VideoSpec& spec);

}  // namespace dyntok::synth
