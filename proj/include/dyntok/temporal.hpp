#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dyntok/dpc.hpp"
#include "dyntok/tensor_io.hpp"

namespace dyntok::temporal {

/// Fraction of the frame count requested as the number of temporal events.
struct Ratio {
    std::int64_t num = 1;
    std::int64_t den = 16;

    /// Throws Error("validation") unless 0 < num/den <= 1.
    void validate() const;
};

/// Token tensor for M frames of L tokens each, row-major [M, L, D].
struct FrameSequence {
    std::vector<float> tokens;
    io::TokenMeta meta;

    std::size_t frame_count() const { return meta.num_frames; }
    std::size_t tokens_per_frame() const { return meta.tokens_per_frame(); }

    void validate() const;
};

/// Ordered partition of frame indices; events sorted by their smallest
/// member frame, frames sorted ascending within each event.
struct EventSegmentation {
    std::vector<std::vector<std::size_t>> events;
};

/// The pooled token set of one event: all tokens of its frames, frame-major,
/// with ids encoding (frame * tokens_per_frame + cell).
struct EventTokens {
    dpc::FeatureSet tokens;
    std::vector<std::size_t> frames;
    std::size_t tokens_per_frame = 0;
};

/// Requested event count: max(1, floor(frames * ratio)).
std::size_t event_count_for(std::size_t frames, Ratio ratio);

/// Frame-level representations: the mean over each frame's tokens, [M, D].
std::vector<float> frame_pool(const FrameSequence& seq);

/// Density-peaks clustering over frame features into max(1, floor(M*ratio))
/// events, reordered by minimum member frame index.
EventSegmentation segment_events(std::span<const float> frame_feats, std::size_t dim,
                                 Ratio ratio, std::size_t k);

/// Gathers each event's tokens with (frame, cell) provenance ids.
std::vector<EventTokens> event_tokens(const FrameSequence& seq, const EventSegmentation& seg);

/// Clusters an event's pooled token set so merged tokens may span frames.
dpc::ClusterResult merge_within_event(const EventTokens& event, std::size_t clusters,
                                      std::size_t k);

}  // namespace dyntok::temporal
