#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace dyntok::io {

/// Dense row-major float32 array with shape metadata. The on-disk form is the
/// ".npy" version 1.0 container restricted to little-endian float32 payloads.
struct TensorFile {
    std::vector<std::size_t> shape;
    std::vector<float> data;

    std::size_t element_count() const;

    /// Throws Error("validation") when product(shape) != data.size().
    void validate() const;
};

/// Sidecar metadata describing how a token tensor maps onto a patch grid.
/// num_frames == 0 marks a single image (tensor shape [L, D]); num_frames ==
/// M > 0 marks a frame sequence (shape [M, L, D]).
struct TokenMeta {
    int grid_h = 0;
    int grid_w = 0;
    std::size_t num_frames = 0;
    std::size_t feature_dim = 0;

    std::size_t tokens_per_frame() const;

    void validate() const;
};

TensorFile read_tensor(const std::filesystem::path& path);
void write_tensor(const TensorFile& tensor, const std::filesystem::path& path);

/// Sidecar path convention: "<tensor path>.meta.json".
std::filesystem::path meta_path_for(const std::filesystem::path& tensor_path);

/// Reads the sidecar for a tensor. Throws Error("meta-missing") when the
/// sidecar file does not exist.
TokenMeta read_meta(const std::filesystem::path& tensor_path);
void write_meta(const TokenMeta& meta, const std::filesystem::path& tensor_path);

}  // namespace dyntok::io
