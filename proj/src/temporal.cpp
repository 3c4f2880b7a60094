#include "dyntok/temporal.hpp"

#include <algorithm>
#include <string>

#include "dyntok/error.hpp"

namespace dyntok::temporal {

void Ratio::validate() const {
    if (num < 1 || den < 1 || num > den) {
        fail("validation", "ratio must satisfy 0 < num/den <= 1, got " + std::to_string(num) +
                               "/" + std::to_string(den));
    }
}

void FrameSequence::validate() const {
    meta.validate();
    if (meta.num_frames < 1) {
        fail("validation", "frame sequence: at least one frame required");
    }
    std::size_t expected = meta.num_frames * meta.tokens_per_frame() * meta.feature_dim;
    if (tokens.size() != expected) {
        fail("validation", "frame sequence: tensor size " + std::to_string(tokens.size()) +
                               " does not match [M, L, D] = [" +
                               std::to_string(meta.num_frames) + ", " +
                               std::to_string(meta.tokens_per_frame()) + ", " +
                               std::to_string(meta.feature_dim) + "]");
    }
}

std::size_t event_count_for(std::size_t frames, Ratio ratio) {
    ratio.validate();
    std::size_t e = frames * static_cast<std::size_t>(ratio.num) /
                    static_cast<std::size_t>(ratio.den);
    return std::max<std::size_t>(1, e);
}

std::vector<float> frame_pool(const FrameSequence& seq) {
    seq.validate();
    std::size_t m = seq.frame_count();
    std::size_t l = seq.tokens_per_frame();
    std::size_t d = seq.meta.feature_dim;

    std::vector<float> pooled(m * d);
    std::vector<double> acc(d);
    for (std::size_t f = 0; f < m; ++f) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const float* frame = seq.tokens.data() + f * l * d;
        for (std::size_t t = 0; t < l; ++t) {
            for (std::size_t k = 0; k < d; ++k) {
                acc[k] += static_cast<double>(frame[t * d + k]);
            }
        }
        for (std::size_t k = 0; k < d; ++k) {
            pooled[f * d + k] = static_cast<float>(acc[k] / static_cast<double>(l));
        }
    }
    return pooled;
}

EventSegmentation segment_events(std::span<const float> frame_feats, std::size_t dim,
                                 Ratio ratio, std::size_t k) {
    ratio.validate();
    if (dim < 1 || frame_feats.size() % dim != 0) {
        fail("validation", "frame features: bad dimensions");
    }
    std::size_t m = frame_feats.size() / dim;
    if (m == 0) {
        fail("validation", "frame features: no frames");
    }

    dpc::FeatureSet fs = dpc::make_feature_set(
        std::vector<float>(frame_feats.begin(), frame_feats.end()), dim);
    std::size_t requested = event_count_for(m, ratio);
    dpc::ClusterResult result = dpc::cluster(fs, requested, k);

    EventSegmentation seg;
    seg.events.resize(result.cluster_count());
    for (std::size_t s = 0; s < result.cluster_count(); ++s) {
        for (std::int64_t id : result.member_ids[s]) {
            seg.events[s].push_back(static_cast<std::size_t>(id));
        }
        std::sort(seg.events[s].begin(), seg.events[s].end());
    }
    std::sort(seg.events.begin(), seg.events.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return seg;
}

std::vector<EventTokens> event_tokens(const FrameSequence& seq, const EventSegmentation& seg) {
    seq.validate();
    std::size_t m = seq.frame_count();
    std::size_t l = seq.tokens_per_frame();
    std::size_t d = seq.meta.feature_dim;

    std::vector<bool> seen(m, false);
    std::size_t covered = 0;
    for (const auto& event : seg.events) {
        if (event.empty()) {
            fail("validation", "event segmentation: empty event");
        }
        for (std::size_t f : event) {
            if (f >= m || seen[f]) {
                fail("validation", "event segmentation is not a partition of the frames");
            }
            seen[f] = true;
            ++covered;
        }
    }
    if (covered != m) {
        fail("validation", "event segmentation does not cover all frames");
    }

    std::vector<EventTokens> out;
    out.reserve(seg.events.size());
    for (const auto& event : seg.events) {
        EventTokens et;
        et.frames = event;
        et.tokens_per_frame = l;
        et.tokens.dim = d;
        et.tokens.values.reserve(event.size() * l * d);
        et.tokens.ids.reserve(event.size() * l);
        for (std::size_t f : event) {
            const float* frame = seq.tokens.data() + f * l * d;
            et.tokens.values.insert(et.tokens.values.end(), frame, frame + l * d);
            for (std::size_t t = 0; t < l; ++t) {
                et.tokens.ids.push_back(static_cast<std::int64_t>(f * l + t));
            }
        }
        out.push_back(std::move(et));
    }
    return out;
}

dpc::ClusterResult merge_within_event(const EventTokens& event, std::size_t clusters,
                                      std::size_t k) {
    if (event.tokens.count() == 0) {
        fail("validation", "event has no tokens");
    }
    return dpc::cluster(event.tokens, clusters, k);
}

}  // namespace dyntok::temporal
