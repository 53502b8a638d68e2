#include "topeax/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace topeax {

namespace {

constexpr double kCanvas = 840.0;
constexpr double kMargin = 60.0;
constexpr double kPlotSize = kCanvas - 2.0 * kMargin;

struct Mapper {
    double min_x, max_x, min_y, max_y;

    double sx(double x) const {
        double span = max_x - min_x;
        if (span <= 0.0) return kMargin + kPlotSize / 2.0;
        return kMargin + (x - min_x) / span * kPlotSize;
    }
    // SVG y grows downward.
    double sy(double y) const {
        double span = max_y - min_y;
        if (span <= 0.0) return kMargin + kPlotSize / 2.0;
        return kMargin + (max_y - y) / span * kPlotSize;
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

// Distinct hues around the color wheel, one per topic.
std::string topic_color(std::size_t k, std::size_t n_topics) {
    double hue = 360.0 * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(n_topics, 1));
    char buf[48];
    std::snprintf(buf, sizeof(buf), "hsl(%.0f, 70%%, 45%%)", hue);
    return buf;
}

std::string heat_color(double t) {
    // Light-to-dark blue ramp; t in [0, 1].
    t = std::clamp(t, 0.0, 1.0);
    int r = static_cast<int>(std::lround(247.0 - 196.0 * t));
    int g = static_cast<int>(std::lround(251.0 - 146.0 * t));
    int b = static_cast<int>(std::lround(255.0 - 74.0 * t));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

const importance::TopicKeywords* pick_keywords(const TopeaxModel& model) {
    for (auto scheme : {importance::Scheme::combined, importance::Scheme::npmi,
                        importance::Scheme::semantic, importance::Scheme::centroid,
                        importance::Scheme::ctfidf}) {
        auto it = model.keywords.find(scheme);
        if (it != model.keywords.end()) return &it->second;
    }
    return nullptr;
}

}  // namespace

std::string render_model_svg(const TopeaxModel& model, std::size_t keywords_per_peak) {
    if (!model.grid)
        throw InputError("model artifact carries no density grid; refit to enable plotting");
    const auto& grid = *model.grid;

    Mapper map{grid.x_coords.front(), grid.x_coords.back(), grid.y_coords.front(),
               grid.y_coords.back()};
    double max_density = *std::max_element(grid.density.values().begin(),
                                           grid.density.values().end());
    if (max_density <= 0.0) max_density = 1.0;

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas << "\" height=\""
        << kCanvas << "\" viewBox=\"0 0 " << kCanvas << " " << kCanvas << "\">\n";
    svg << "<rect width=\"" << kCanvas << "\" height=\"" << kCanvas << "\" fill=\"white\"/>\n";

    // KDE heatmap: one rect per grid cell.
    std::size_t g = grid.x_coords.size();
    double cell_w = kPlotSize / static_cast<double>(g);
    svg << "<g class=\"kde\">\n";
    for (std::size_t ix = 0; ix < g; ++ix) {
        for (std::size_t iy = 0; iy < g; ++iy) {
            double t = grid.density(ix, iy) / max_density;
            if (t < 0.005) continue;  // keep the file small
            double px = map.sx(grid.x_coords[ix]) - cell_w / 2.0;
            double py = map.sy(grid.y_coords[iy]) - cell_w / 2.0;
            svg << "<rect x=\"" << fmt(px) << "\" y=\"" << fmt(py) << "\" width=\""
                << fmt(cell_w + 0.5) << "\" height=\"" << fmt(cell_w + 0.5) << "\" fill=\""
                << heat_color(t) << "\"/>\n";
        }
    }
    svg << "</g>\n";

    // Document scatter colored by hard assignment.
    svg << "<g class=\"documents\">\n";
    for (std::size_t d = 0; d < model.reduced.rows(); ++d) {
        int label = model.assignment.labels.empty() ? 0 : model.assignment.labels[d];
        svg << "<circle cx=\"" << fmt(map.sx(model.reduced(d, 0))) << "\" cy=\""
            << fmt(map.sy(model.reduced(d, 1))) << "\" r=\"2.4\" fill=\""
            << topic_color(static_cast<std::size_t>(label), model.n_topics())
            << "\" fill-opacity=\"0.65\"/>\n";
    }
    svg << "</g>\n";

    // Peaks with keyword annotations.
    const auto* keywords = pick_keywords(model);
    svg << "<g class=\"peaks\">\n";
    for (std::size_t k = 0; k < model.peaks.size(); ++k) {
        double px = map.sx(model.peaks.coordinates[k][0]);
        double py = map.sy(model.peaks.coordinates[k][1]);
        svg << "<path d=\"M " << fmt(px - 7) << " " << fmt(py) << " L " << fmt(px + 7) << " "
            << fmt(py) << " M " << fmt(px) << " " << fmt(py - 7) << " L " << fmt(px) << " "
            << fmt(py + 7) << "\" stroke=\"black\" stroke-width=\"2.5\"/>\n";
        std::string label = std::to_string(k);
        if (keywords && k < keywords->size()) {
            label += ":";
            std::size_t limit = std::min(keywords_per_peak, (*keywords)[k].size());
            for (std::size_t r = 0; r < limit; ++r) {
                label += r == 0 ? " " : ", ";
                label += (*keywords)[k][r].term;
            }
        }
        svg << "<text class=\"peak-label\" x=\"" << fmt(px + 10) << "\" y=\"" << fmt(py - 8)
            << "\" font-family=\"sans-serif\" font-size=\"13\" font-weight=\"bold\">"
            << xml_escape(label) << "</text>\n";
    }
    svg << "</g>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string plot_data_json(const TopeaxModel& model, std::size_t keywords_per_peak) {
    if (!model.grid)
        throw InputError("model artifact carries no density grid; refit to enable plotting");
    nlohmann::json j;
    j["grid"] = {{"x_coords", model.grid->x_coords},
                 {"y_coords", model.grid->y_coords},
                 {"density_rows", model.grid->density.rows()},
                 {"density", model.grid->density.values()}};
    nlohmann::json docs = nlohmann::json::array();
    for (std::size_t d = 0; d < model.reduced.rows(); ++d)
        docs.push_back({{"x", model.reduced(d, 0)},
                        {"y", model.reduced(d, 1)},
                        {"topic", model.assignment.labels[d]}});
    j["documents"] = docs;
    nlohmann::json peaks = nlohmann::json::array();
    const auto* keywords = pick_keywords(model);
    for (std::size_t k = 0; k < model.peaks.size(); ++k) {
        nlohmann::json peak = {{"x", model.peaks.coordinates[k][0]},
                               {"y", model.peaks.coordinates[k][1]},
                               {"density", model.peaks.densities[k]}};
        nlohmann::json words = nlohmann::json::array();
        if (keywords && k < keywords->size())
            for (std::size_t r = 0; r < std::min(keywords_per_peak, (*keywords)[k].size()); ++r)
                words.push_back((*keywords)[k][r].term);
        peak["keywords"] = words;
        peaks.push_back(peak);
    }
    j["peaks"] = peaks;
    return j.dump(2) + "\n";
}

}  // namespace topeax
