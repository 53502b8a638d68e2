#ifndef TOPEAX_PLOT_HPP
#define TOPEAX_PLOT_HPP

#include <string>

#include "topeax/model.hpp"

namespace topeax {

// Static SVG of the fitted model: KDE heatmap, document scatter colored by
// hard assignment, and peak markers annotated with each topic's top keywords.
// Requires the artifact to carry its density grid.
std::string render_model_svg(const TopeaxModel& model, std::size_t keywords_per_peak = 4);

// The same quantities as JSON so external tooling can re-render the figure.
std::string plot_data_json(const TopeaxModel& model, std::size_t keywords_per_peak = 4);

}  // namespace topeax

#endif  // TOPEAX_PLOT_HPP
