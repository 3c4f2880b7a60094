// dyntok: dynamic visual token merging over pre-extracted token tensors.
//
// Subcommands: gen (synthetic inputs), merge-image, merge-video, visualize,
// bench. Exit codes: 0 success, 1 internal error, 2 input/validation error.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dyntok/dpc.hpp"
#include "dyntok/error.hpp"
#include "dyntok/pipeline.hpp"
#include "dyntok/regions.hpp"
#include "dyntok/synth.hpp"
#include "dyntok/temporal.hpp"
#include "dyntok/tensor_io.hpp"

namespace fs = std::filesystem;
using dyntok::Error;
using dyntok::fail;

namespace {

void emit_error(const std::string& kind, const std::string& message) {
    nlohmann::json doc{{"error", kind}, {"message", message}};
    std::cerr << doc.dump() << "\n";
}

std::pair<int, int> parse_grid(const std::string& text) {
    auto sep = text.find('x');
    if (sep == std::string::npos) {
        fail("validation", "grid must look like HxW, got '" + text + "'");
    }
    int h = 0, w = 0;
    try {
        h = std::stoi(text.substr(0, sep));
        w = std::stoi(text.substr(sep + 1));
    } catch (const std::exception&) {
        fail("validation", "grid must look like HxW, got '" + text + "'");
    }
    if (h < 1 || w < 1) {
        fail("validation", "grid dimensions must be positive");
    }
    return {h, w};
}

dyntok::temporal::Ratio parse_ratio(const std::string& text) {
    dyntok::temporal::Ratio ratio;
    auto sep = text.find('/');
    try {
        if (sep == std::string::npos) {
            ratio.num = std::stoll(text);
            ratio.den = 1;
        } else {
            ratio.num = std::stoll(text.substr(0, sep));
            ratio.den = std::stoll(text.substr(sep + 1));
        }
    } catch (const std::exception&) {
        fail("validation", "ratio must look like N/D, got '" + text + "'");
    }
    ratio.validate();
    return ratio;
}

dyntok::pipeline::StepConfig parse_steps(const std::vector<std::size_t>& steps) {
    if (steps.size() != 3) {
        fail("validation", "exactly three step cluster counts required");
    }
    dyntok::pipeline::StepConfig config;
    config.clusters = {steps[0], steps[1], steps[2]};
    config.validate();
    return config;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail("io", "cannot write " + path.string());
    }
    out << text;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail("io", "cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

// Distinct source frames of an event, recovered from step-1 provenance.
std::vector<std::int64_t> event_frames(const dyntok::pipeline::MultiScaleRep& rep,
                                       std::size_t event) {
    std::set<std::int64_t> frames;
    const dyntok::pipeline::TokenSpan& span = rep.step_spans[event][0];
    for (std::size_t t = span.start; t < span.start + span.len; ++t) {
        for (const dyntok::pipeline::Origin& origin : rep.provenance[t]) {
            frames.insert(origin.frame);
        }
    }
    return {frames.begin(), frames.end()};
}

nlohmann::json spans_json(const dyntok::pipeline::MultiScaleRep& rep) {
    nlohmann::json events = nlohmann::json::array();
    for (std::size_t e = 0; e < rep.event_spans.size(); ++e) {
        events.push_back({{"start", rep.event_spans[e].start},
                          {"len", rep.event_spans[e].len},
                          {"frames", event_frames(rep, e)}});
    }
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& per_event : rep.step_spans) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& span : per_event) {
            row.push_back({{"start", span.start}, {"len", span.len}});
        }
        steps.push_back(row);
    }
    return {{"events", events}, {"steps", steps}};
}

void write_outputs(const fs::path& out_dir, const dyntok::pipeline::MultiScaleRep& rep,
                   const dyntok::regions::RegionSet& regions,
                   const std::optional<fs::path>& project,
                   const std::optional<fs::path>& bias) {
    fs::create_directories(out_dir);

    dyntok::io::TensorFile merged;
    if (project) {
        dyntok::pipeline::Projection proj = dyntok::pipeline::load_projection(*project, bias);
        merged.data = dyntok::pipeline::apply_projection(rep, proj);
        merged.shape = {rep.token_count(), proj.out_dim};
    } else {
        merged.data = rep.tokens;
        merged.shape = {rep.token_count(), rep.dim};
    }
    dyntok::io::write_tensor(merged, out_dir / "merged.npy");

    write_text(out_dir / "spans.json", spans_json(rep).dump());
    write_text(out_dir / "regions.json", dyntok::regions::to_json(regions));
    for (const dyntok::regions::LabelGrid& grid : regions.grids) {
        write_bytes(out_dir / ("region_" + grid.name + ".ppm"),
                    dyntok::regions::render_ppm(regions, grid));
    }
}

struct GenOpts {
    std::string mode;
    std::string grid = "16x16";
    std::size_t frames = 64;
    std::size_t dim = 64;
    std::uint64_t seed = 0;
    int blobs = 4;
    std::string out;
};

void run_gen(const GenOpts& opts) {
    auto [grid_h, grid_w] = parse_grid(opts.grid);
    std::size_t l = static_cast<std::size_t>(grid_h) * static_cast<std::size_t>(grid_w);

    dyntok::io::TensorFile tensor;
    dyntok::io::TokenMeta meta;
    meta.grid_h = grid_h;
    meta.grid_w = grid_w;
    meta.feature_dim = opts.dim;
    if (opts.mode == "image") {
        meta.num_frames = 0;
        tensor.shape = {l, opts.dim};
        tensor.data = dyntok::synth::gen_image_tokens(
            {grid_h, grid_w, opts.dim, opts.seed, opts.blobs});
    } else if (opts.mode == "video") {
        meta.num_frames = opts.frames;
        tensor.shape = {opts.frames, l, opts.dim};
        tensor.data = dyntok::synth::gen_video_tokens(
            {grid_h, grid_w, opts.dim, opts.frames, opts.seed, opts.blobs});
    } else {
        fail("validation", "mode must be 'image' or 'video'");
    }
    dyntok::io::write_tensor(tensor, opts.out);
    dyntok::io::write_meta(meta, opts.out);
}

struct MergeOpts {
    std::string input;
    std::vector<std::size_t> steps{64, 32, 16};
    std::optional<std::size_t> knn;
    std::string ratio = "1/16";
    std::string out;
    std::optional<std::string> project;
    std::optional<std::string> bias;

    std::optional<fs::path> project_path() const {
        return project ? std::optional<fs::path>{*project} : std::nullopt;
    }
    std::optional<fs::path> bias_path() const {
        return bias ? std::optional<fs::path>{*bias} : std::nullopt;
    }
};

void run_merge_image(const MergeOpts& opts) {
    dyntok::io::TensorFile tensor = dyntok::io::read_tensor(opts.input);
    dyntok::io::TokenMeta meta = dyntok::io::read_meta(opts.input);
    if (meta.num_frames != 0) {
        fail("validation", "input is a frame sequence; use merge-video");
    }
    if (tensor.shape.size() != 2 || tensor.shape[0] != meta.tokens_per_frame() ||
        tensor.shape[1] != meta.feature_dim) {
        fail("validation", "tensor shape does not match sidecar grid/dim");
    }

    dyntok::pipeline::StepConfig steps = parse_steps(opts.steps);
    dyntok::dpc::KnnPolicy policy{opts.knn};
    dyntok::pipeline::MultiScaleRep rep =
        dyntok::pipeline::multiscale_image(tensor.data, meta, steps, policy);
    dyntok::regions::RegionSet regions =
        dyntok::regions::image_regions(rep, meta.grid_h, meta.grid_w);
    write_outputs(opts.out, rep, regions, opts.project_path(), opts.bias_path());

    std::cout << meta.tokens_per_frame() << " -> " << rep.token_count() << "\n";
}

void run_merge_video(const MergeOpts& opts) {
    dyntok::io::TensorFile tensor = dyntok::io::read_tensor(opts.input);
    dyntok::io::TokenMeta meta = dyntok::io::read_meta(opts.input);
    if (meta.num_frames == 0) {
        fail("validation", "input is a single image; use merge-image");
    }
    if (tensor.shape.size() != 3 || tensor.shape[0] != meta.num_frames ||
        tensor.shape[1] != meta.tokens_per_frame() || tensor.shape[2] != meta.feature_dim) {
        fail("validation", "tensor shape does not match sidecar frames/grid/dim");
    }

    dyntok::temporal::FrameSequence seq{std::move(tensor.data), meta};
    dyntok::pipeline::StepConfig steps = parse_steps(opts.steps);
    dyntok::dpc::KnnPolicy policy{opts.knn};
    dyntok::pipeline::MultiScaleRep rep = dyntok::pipeline::multiscale_video(
        seq, parse_ratio(opts.ratio), steps, policy);
    dyntok::regions::RegionSet regions = dyntok::regions::video_regions(
        rep, meta.grid_h, meta.grid_w, meta.num_frames);
    write_outputs(opts.out, rep, regions, opts.project_path(), opts.bias_path());

    std::cout << meta.num_frames * meta.tokens_per_frame() << " -> " << rep.token_count()
              << "\n";
}

struct VisualizeOpts {
    std::string regions;
    std::string out;
};

void run_visualize(const VisualizeOpts& opts) {
    std::ifstream in(opts.regions, std::ios::binary);
    if (!in) {
        fail("io", "cannot open region file: " + opts.regions);
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    dyntok::regions::RegionSet set = dyntok::regions::from_json(text);
    if (set.grids.empty()) {
        fail("format", "region file contains no grids");
    }

    fs::path out(opts.out);
    if (set.grids.size() == 1) {
        write_bytes(out, dyntok::regions::render_ppm(set, set.grids.front()));
        return;
    }
    fs::path stem = out.parent_path() / out.stem();
    for (const dyntok::regions::LabelGrid& grid : set.grids) {
        fs::path path = stem;
        path += "_" + grid.name;
        path += out.extension();
        write_bytes(path, dyntok::regions::render_ppm(set, grid));
    }
}

struct BenchOpts {
    std::vector<std::size_t> sizes;
    std::size_t dim = 1024;
    std::size_t clusters = 64;
    std::string out;
};

void run_bench(const BenchOpts& opts) {
    std::ostringstream csv;
    csv << "n,seconds\n";
    for (std::size_t i = 0; i < opts.sizes.size(); ++i) {
        std::size_t n = opts.sizes[i];
        if (n < 1) {
            fail("validation", "bench sizes must be positive");
        }
        dyntok::synth::Rng rng(0x5eed + i);
        std::vector<float> values(n * opts.dim);
        for (float& v : values) {
            v = static_cast<float>(rng.next_unit());
        }
        dyntok::dpc::FeatureSet fs = dyntok::dpc::make_feature_set(std::move(values), opts.dim);
        std::size_t c = std::min(opts.clusters, n);
        std::size_t k = dyntok::dpc::KnnPolicy{}.resolve(n);

        // Untimed warm-up run so the timed pass sees hot caches.
        dyntok::dpc::ClusterResult warmup = dyntok::dpc::cluster(fs, c, k);
        auto t0 = std::chrono::steady_clock::now();
        dyntok::dpc::ClusterResult result = dyntok::dpc::cluster(fs, c, k);
        auto t1 = std::chrono::steady_clock::now();
        if (result.cluster_count() != warmup.cluster_count()) {
            fail("internal", "clustering is not stable across repeated runs");
        }
        csv << n << "," << std::fixed << std::setprecision(9)
            << std::chrono::duration<double>(t1 - t0).count() << "\n";
    }
    write_text(opts.out, csv.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dynamic visual token merging over pre-extracted token tensors"};
    app.require_subcommand(1);

    GenOpts gen;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate a seeded synthetic token tensor");
    gen_cmd->add_option("--mode", gen.mode, "image or video")->required();
    gen_cmd->add_option("--grid", gen.grid, "patch grid as HxW")->capture_default_str();
    gen_cmd->add_option("--frames", gen.frames, "frame count (video mode)")
        ->capture_default_str();
    gen_cmd->add_option("--dim", gen.dim, "feature dimension")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
    gen_cmd->add_option("--blobs", gen.blobs, "number of feature blobs")->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "output tensor path")->required();

    MergeOpts image;
    CLI::App* image_cmd = app.add_subcommand("merge-image", "merge one image's token grid");
    image_cmd->add_option("--input", image.input, "input tensor ([L, D] + sidecar)")->required();
    image_cmd->add_option("--steps", image.steps, "cluster counts per aggregation step")
        ->delimiter(',')
        ->capture_default_str();
    image_cmd->add_option("--knn", image.knn, "neighbor count override");
    image_cmd->add_option("--out", image.out, "output directory")->required();
    image_cmd->add_option("--project", image.project, "projection weight tensor [D, D_out]");
    image_cmd->add_option("--bias", image.bias, "projection bias tensor [D_out]");

    MergeOpts video;
    CLI::App* video_cmd = app.add_subcommand("merge-video", "merge a frame sequence");
    video_cmd->add_option("--input", video.input, "input tensor ([M, L, D] + sidecar)")
        ->required();
    video_cmd->add_option("--ratio", video.ratio, "event clustering ratio as N/D")
        ->capture_default_str();
    video_cmd->add_option("--steps", video.steps, "cluster counts per aggregation step")
        ->delimiter(',')
        ->capture_default_str();
    video_cmd->add_option("--knn", video.knn, "neighbor count override");
    video_cmd->add_option("--out", video.out, "output directory")->required();
    video_cmd->add_option("--project", video.project, "projection weight tensor [D, D_out]");
    video_cmd->add_option("--bias", video.bias, "projection bias tensor [D_out]");

    VisualizeOpts vis;
    CLI::App* vis_cmd = app.add_subcommand("visualize", "render region labels to PPM");
    vis_cmd->add_option("--regions", vis.regions, "region JSON file")->required();
    vis_cmd->add_option("--out", vis.out, "output PPM path")->required();

    BenchOpts bench;
    CLI::App* bench_cmd = app.add_subcommand("bench", "time the clustering kernel");
    bench_cmd->add_option("--sizes", bench.sizes, "token counts to time")->delimiter(',');
    bench_cmd->add_option("--dim", bench.dim, "feature dimension")->capture_default_str();
    bench_cmd->add_option("--clusters", bench.clusters, "cluster count")->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
        if (gen_cmd->parsed()) {
            run_gen(gen);
        } else if (image_cmd->parsed()) {
            run_merge_image(image);
        } else if (video_cmd->parsed()) {
            run_merge_video(video);
        } else if (vis_cmd->parsed()) {
            run_visualize(vis);
        } else if (bench_cmd->parsed()) {
            run_bench(bench);
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage", e.what());
        return 2;
    } catch (const Error& e) {
        emit_error(e.kind(), e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return 1;
    }
    return 0;
}
