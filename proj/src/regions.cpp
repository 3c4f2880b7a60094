#include "dyntok/regions.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "dyntok/error.hpp"

namespace dyntok::regions {

namespace {

std::string step_name(std::size_t step) {
    return "step" + std::to_string(step + 1);
}

std::string frame_grid_name(std::size_t step, std::size_t frame) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "step%zu_frame%04zu", step + 1, frame);
    return buf;
}

void fill_span(const pipeline::MultiScaleRep& rep, const pipeline::TokenSpan& span,
               std::size_t grid_cells, std::vector<LabelGrid*>& frame_grids) {
    for (std::size_t t = span.start; t < span.start + span.len; ++t) {
        int slot = static_cast<int>(t - span.start);
        for (const pipeline::Origin& origin : rep.provenance[t]) {
            auto frame = static_cast<std::size_t>(origin.frame);
            auto cell = static_cast<std::size_t>(origin.cell);
            if (frame >= frame_grids.size() || cell >= grid_cells) {
                fail("validation", "provenance outside the grid");
            }
            frame_grids[frame]->labels[cell] = slot;
        }
    }
}

}  // namespace

RegionSet image_regions(const pipeline::MultiScaleRep& rep, int grid_h, int grid_w) {
    RegionSet set;
    set.grid_h = grid_h;
    set.grid_w = grid_w;
    if (rep.step_spans.size() != 1) {
        fail("validation", "image representation expected (single step-span group)");
    }
    std::size_t cells = static_cast<std::size_t>(grid_h) * static_cast<std::size_t>(grid_w);
    for (std::size_t s = 0; s < rep.step_spans[0].size(); ++s) {
        LabelGrid grid;
        grid.name = step_name(s);
        grid.labels.assign(cells, -1);
        std::vector<LabelGrid*> one{&grid};
        fill_span(rep, rep.step_spans[0][s], cells, one);
        set.grids.push_back(std::move(grid));
    }
    return set;
}

RegionSet video_regions(const pipeline::MultiScaleRep& rep, int grid_h, int grid_w,
                        std::size_t frames) {
    RegionSet set;
    set.grid_h = grid_h;
    set.grid_w = grid_w;
    std::size_t cells = static_cast<std::size_t>(grid_h) * static_cast<std::size_t>(grid_w);
    std::size_t steps = rep.step_spans.empty() ? 0 : rep.step_spans.front().size();
    for (std::size_t s = 0; s < steps; ++s) {
        std::vector<LabelGrid> step_grids(frames);
        std::vector<LabelGrid*> ptrs(frames);
        for (std::size_t f = 0; f < frames; ++f) {
            step_grids[f].name = frame_grid_name(s, f);
            step_grids[f].labels.assign(cells, -1);
            ptrs[f] = &step_grids[f];
        }
        for (const auto& event_spans : rep.step_spans) {
            fill_span(rep, event_spans[s], cells, ptrs);
        }
        for (auto& grid : step_grids) {
            set.grids.push_back(std::move(grid));
        }
    }
    return set;
}

std::string to_json(const RegionSet& set) {
    nlohmann::json grids = nlohmann::json::array();
    for (const LabelGrid& grid : set.grids) {
        grids.push_back({{"name", grid.name}, {"labels", grid.labels}});
    }
    nlohmann::json doc{{"grid_h", set.grid_h}, {"grid_w", set.grid_w}, {"grids", grids}};
    return doc.dump();
}

RegionSet from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail("format", "malformed region JSON: " + std::string(e.what()));
    }
    RegionSet set;
    try {
        set.grid_h = doc.at("grid_h").get<int>();
        set.grid_w = doc.at("grid_w").get<int>();
        for (const auto& entry : doc.at("grids")) {
            LabelGrid grid;
            grid.name = entry.at("name").get<std::string>();
            grid.labels = entry.at("labels").get<std::vector<int>>();
            set.grids.push_back(std::move(grid));
        }
    } catch (const nlohmann::json::exception& e) {
        fail("format", "region JSON missing field: " + std::string(e.what()));
    }
    if (set.grid_h < 1 || set.grid_w < 1) {
        fail("format", "region JSON: grid dimensions must be positive");
    }
    std::size_t cells = static_cast<std::size_t>(set.grid_h) * static_cast<std::size_t>(set.grid_w);
    for (const LabelGrid& grid : set.grids) {
        if (grid.labels.size() != cells) {
            fail("format", "region JSON: grid '" + grid.name + "' has wrong label count");
        }
        for (int label : grid.labels) {
            if (label < 0) {
                fail("format", "region JSON: negative label in grid '" + grid.name + "'");
            }
        }
    }
    return set;
}

std::array<std::uint8_t, 3> palette_color(int label) {
    // Golden-ratio hue rotation keeps adjacent labels far apart in hue.
    double hue = std::fmod(static_cast<double>(label) * 0.618033988749895, 1.0);
    double sat = 0.65, val = 0.95;
    double h6 = hue * 6.0;
    int sector = static_cast<int>(h6) % 6;
    double f = h6 - std::floor(h6);
    double p = val * (1.0 - sat);
    double q = val * (1.0 - sat * f);
    double t = val * (1.0 - sat * (1.0 - f));
    double r = 0, g = 0, b = 0;
    switch (sector) {
        case 0: r = val; g = t; b = p; break;
        case 1: r = q; g = val; b = p; break;
        case 2: r = p; g = val; b = t; break;
        case 3: r = p; g = q; b = val; break;
        case 4: r = t; g = p; b = val; break;
        default: r = val; g = p; b = q; break;
    }
    auto to_byte = [](double x) { return static_cast<std::uint8_t>(std::lround(x * 255.0)); };
    return {to_byte(r), to_byte(g), to_byte(b)};
}

std::vector<std::uint8_t> render_ppm(const RegionSet& set, const LabelGrid& grid) {
    std::string header = "P6\n" + std::to_string(set.grid_w) + " " + std::to_string(set.grid_h) +
                         "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + grid.labels.size() * 3);
    for (int label : grid.labels) {
        auto rgb = palette_color(label);
        out.insert(out.end(), rgb.begin(), rgb.end());
    }
    return out;
}

}  // namespace dyntok::regions
