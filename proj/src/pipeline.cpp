#include "dyntok/pipeline.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "dyntok/error.hpp"
#include "dyntok/spatial.hpp"

namespace dyntok::pipeline {

namespace {

// One rung of the aggregation ladder: a token set plus, per token, the set of
// original (frame, cell) origins it covers.
struct Level {
    dpc::FeatureSet fs;
    std::vector<std::vector<Origin>> provenance;
};

Level ladder_step(const Level& level, std::size_t clusters, const dpc::KnnPolicy& policy) {
    std::size_t n = level.fs.count();
    dpc::ClusterResult result = dpc::cluster(level.fs, clusters, policy.resolve(n));

    Level next;
    next.fs = dpc::make_feature_set(result.merged, result.dim);
    next.provenance.resize(result.cluster_count());
    for (std::size_t s = 0; s < result.cluster_count(); ++s) {
        std::vector<Origin>& merged = next.provenance[s];
        for (std::int64_t member : result.member_ids[s]) {
            const std::vector<Origin>& src = level.provenance[static_cast<std::size_t>(member)];
            merged.insert(merged.end(), src.begin(), src.end());
        }
        std::sort(merged.begin(), merged.end());
    }
    return next;
}

// Runs the three steps over a starting level and appends tokens, spans, and
// provenance to the representation.
void aggregate_into(MultiScaleRep& rep, Level level, const StepConfig& steps,
                    const dpc::KnnPolicy& policy) {
    std::vector<TokenSpan> spans;
    spans.reserve(steps.clusters.size());
    for (std::size_t c : steps.clusters) {
        level = ladder_step(level, c, policy);
        std::size_t count = level.fs.count();
        spans.push_back({rep.token_count(), count});
        rep.tokens.insert(rep.tokens.end(), level.fs.values.begin(), level.fs.values.end());
        rep.provenance.insert(rep.provenance.end(), level.provenance.begin(),
                              level.provenance.end());
    }
    rep.step_spans.push_back(std::move(spans));
}

}  // namespace

void StepConfig::validate() const {
    for (std::size_t c : clusters) {
        if (c < 1) {
            fail("validation", "step cluster counts must be positive");
        }
    }
    for (std::size_t s = 1; s < clusters.size(); ++s) {
        if (clusters[s] >= clusters[s - 1]) {
            fail("validation", "step cluster counts must be strictly decreasing");
        }
    }
}

MultiScaleRep multiscale_image(std::span<const float> tokens, const io::TokenMeta& meta,
                               const StepConfig& steps, const dpc::KnnPolicy& policy) {
    steps.validate();
    meta.validate();

    // The image path chains the grid-aware merge so cells stay first-class;
    // the numeric kernel is the same one the video ladder uses.
    spatial::MergedImage img = spatial::grid_init(tokens, meta);

    MultiScaleRep rep;
    rep.dim = meta.feature_dim;
    std::vector<TokenSpan> spans;
    for (std::size_t c : steps.clusters) {
        img = spatial::merge_step(img, c, policy.resolve(img.tokens.size()));
        spans.push_back({rep.token_count(), img.tokens.size()});
        for (const spatial::GridToken& tok : img.tokens) {
            rep.tokens.insert(rep.tokens.end(), tok.feature.begin(), tok.feature.end());
            std::vector<Origin> origins;
            origins.reserve(tok.cells.size());
            for (const spatial::Cell& cell : tok.cells) {
                origins.push_back(Origin{0, static_cast<std::int64_t>(cell.row) * meta.grid_w +
                                                cell.col});
            }
            rep.provenance.push_back(std::move(origins));
        }
    }
    rep.step_spans.push_back(std::move(spans));
    return rep;
}

MultiScaleRep multiscale_video(const temporal::FrameSequence& seq, temporal::Ratio ratio,
                               const StepConfig& steps, const dpc::KnnPolicy& policy) {
    steps.validate();
    seq.validate();

    std::size_t l = seq.tokens_per_frame();
    std::vector<float> frame_feats = temporal::frame_pool(seq);
    temporal::EventSegmentation seg = temporal::segment_events(
        frame_feats, seq.meta.feature_dim, ratio, policy.resolve(seq.frame_count()));
    std::vector<temporal::EventTokens> events = temporal::event_tokens(seq, seg);

    MultiScaleRep rep;
    rep.dim = seq.meta.feature_dim;
    for (const temporal::EventTokens& event : events) {
        std::size_t event_start = rep.token_count();

        // Re-key to row ids for the ladder; the (frame, cell) encoding moves
        // into the provenance sets.
        Level level;
        level.fs = dpc::make_feature_set(event.tokens.values, seq.meta.feature_dim);
        level.provenance.resize(event.tokens.count());
        for (std::size_t i = 0; i < event.tokens.count(); ++i) {
            std::int64_t id = event.tokens.ids[i];
            level.provenance[i] = {Origin{id / static_cast<std::int64_t>(l),
                                          id % static_cast<std::int64_t>(l)}};
        }
        aggregate_into(rep, std::move(level), steps, policy);

        rep.event_spans.push_back({event_start, rep.token_count() - event_start});
    }
    return rep;
}

std::vector<float> apply_projection(const MultiScaleRep& rep, const Projection& proj) {
    if (proj.in_dim != rep.dim) {
        fail("validation", "projection expects dim " + std::to_string(proj.in_dim) +
                               " but representation has dim " + std::to_string(rep.dim));
    }
    if (proj.weight.size() != proj.in_dim * proj.out_dim) {
        fail("validation", "projection weight shape mismatch");
    }
    if (proj.bias && proj.bias->size() != proj.out_dim) {
        fail("validation", "projection bias shape mismatch");
    }

    std::size_t t_count = rep.token_count();
    std::vector<float> out(t_count * proj.out_dim);
    for (std::size_t t = 0; t < t_count; ++t) {
        const float* row = rep.tokens.data() + t * rep.dim;
        for (std::size_t o = 0; o < proj.out_dim; ++o) {
            double acc = proj.bias ? static_cast<double>((*proj.bias)[o]) : 0.0;
            for (std::size_t d = 0; d < rep.dim; ++d) {
                acc += static_cast<double>(row[d]) *
                       static_cast<double>(proj.weight[d * proj.out_dim + o]);
            }
            out[t * proj.out_dim + o] = static_cast<float>(acc);
        }
    }
    return out;
}

Projection load_projection(const std::filesystem::path& weight_path,
                           const std::optional<std::filesystem::path>& bias_path) {
    io::TensorFile weight = io::read_tensor(weight_path);
    if (weight.shape.size() != 2 || weight.shape[0] == 0 || weight.shape[1] == 0) {
        fail("validation", "projection weight must be a [D, D_out] tensor");
    }
    Projection proj;
    proj.in_dim = weight.shape[0];
    proj.out_dim = weight.shape[1];
    proj.weight = std::move(weight.data);
    if (bias_path) {
        io::TensorFile bias = io::read_tensor(*bias_path);
        if (bias.shape.size() != 1 || bias.shape[0] != proj.out_dim) {
            fail("validation", "projection bias must be a [D_out] tensor");
        }
        proj.bias = std::move(bias.data);
    }
    return proj;
}

}  // namespace dyntok::pipeline
