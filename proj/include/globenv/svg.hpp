#ifndef GLOBENV_SVG_HPP
#define GLOBENV_SVG_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "globenv/envelope.hpp"

namespace globenv {

struct PlotPanel {
    std::string title;
    const GlobalEnvelope* envelope = nullptr;
    /// Curve drawn against the envelope (1D) or shown as the data panel (2D).
    std::optional<Vector> curve;
    /// Extra bounds drawn as dashed lines (1D only), e.g. boxplot whiskers.
    std::optional<Vector> extra_lower;
    std::optional<Vector> extra_upper;
};

/// Self-contained SVG document; panels are stacked vertically. 1D panels
/// draw the band, the central curve and the curve with exits marked; 2D
/// panels show lower, upper and data heatmaps plus the exit mask. Each panel
/// group carries its plotted values in data-* attributes.
std::string render_svg(std::span<const PlotPanel> panels, const std::string& title = "");

/// One panel per component with the observed (first) curve.
std::string envelope_svg(const CombinedEnvelope& env, std::span<const CurveSet> sets,
                         const std::vector<std::string>& labels = {});
std::string envelope_svg(const GlobalEnvelope& env, const CurveSet& set, const std::string& title = "");

}  // namespace globenv

#endif
