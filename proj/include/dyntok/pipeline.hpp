#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dyntok/dpc.hpp"
#include "dyntok/temporal.hpp"
#include "dyntok/tensor_io.hpp"

namespace dyntok::pipeline {

/// Origin of a merged token's coverage: a flat row-major cell index within a
/// frame. Images use frame 0.
struct Origin {
    std::int64_t frame = 0;
    std::int64_t cell = 0;

    auto operator<=>(const Origin&) const = default;
};

struct TokenSpan {
    std::size_t start = 0;
    std::size_t len = 0;
};

/// Cluster counts for the three aggregation steps, strictly decreasing.
struct StepConfig {
    std::array<std::size_t, 3> clusters{64, 32, 16};

    void validate() const;
};

/// Concatenated merged tokens from every aggregation step, steps in order
/// within each event, events in order. Images occupy a single implicit event
/// with event_spans left empty.
struct MultiScaleRep {
    std::vector<float> tokens;  // [token_count, dim]
    std::size_t dim = 0;
    std::vector<std::vector<TokenSpan>> step_spans;  // per event, per step
    std::vector<TokenSpan> event_spans;              // empty for images
    std::vector<std::vector<Origin>> provenance;     // per token, sorted

    std::size_t token_count() const { return dim == 0 ? 0 : tokens.size() / dim; }
};

/// Affine map loaded from tensor files: weight [D, D_out], optional bias
/// [D_out].
struct Projection {
    std::vector<float> weight;
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::optional<std::vector<float>> bias;
};

/// Three-step aggregation for one image: step 1 clusters the L grid tokens,
/// each later step clusters the previous step's merged tokens.
MultiScaleRep multiscale_image(std::span<const float> tokens, const io::TokenMeta& meta,
                               const StepConfig& steps, const dpc::KnnPolicy& policy);

/// Segments the sequence into events, runs the three-step aggregation over
/// each event's pooled token set, and concatenates events in order.
MultiScaleRep multiscale_video(const temporal::FrameSequence& seq, temporal::Ratio ratio,
                               const StepConfig& steps, const dpc::KnnPolicy& policy);

/// Row-wise affine map of the representation's tokens, [T, D_out].
std::vector<float> apply_projection(const MultiScaleRep& rep, const Projection& proj);

Projection load_projection(const std::filesystem::path& weight_path,
                           const std::optional<std::filesystem::path>& bias_path);

}  // namespace dyntok::pipeline
