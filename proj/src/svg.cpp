#include "globenv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "globenv/io.hpp"

namespace globenv {

namespace {

constexpr double kWidth = 640.0;
constexpr double kPanelHeight = 260.0;
constexpr double kMargin = 40.0;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << v;
    return os.str();
}

std::string values_attr(const Vector& v) {
    std::string out;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (k) out += ' ';
        out += format_double(v(k));
    }
    return out;
}

std::string mask_attr(const std::vector<bool>& mask) {
    std::string out;
    for (bool b : mask) out += b ? '1' : '0';
    return out;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, y0, w, h;
    double xmin, xmax, ymin, ymax;

    double px(double x) const { return x0 + (xmax > xmin ? (x - xmin) / (xmax - xmin) : 0.5) * w; }
    double py(double y) const { return y0 + h - (ymax > ymin ? (y - ymin) / (ymax - ymin) : 0.5) * h; }
};

// Finite range of the given vectors; uninformative bounds are skipped by the caller.
void widen(double& lo, double& hi, const Vector& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k)
        if (std::isfinite(v(k))) {
            lo = std::min(lo, v(k));
            hi = std::max(hi, v(k));
        }
}

std::string polyline(const Frame& f, const std::vector<double>& x, const Vector& y, const std::string& style) {
    std::string pts;
    for (std::size_t k = 0; k < x.size(); ++k)
        pts += fmt(f.px(x[k])) + "," + fmt(f.py(y(static_cast<Eigen::Index>(k)))) + " ";
    return "<polyline fill=\"none\" " + style + " points=\"" + pts + "\"/>\n";
}

void panel_1d(std::ostream& os, const PlotPanel& panel, double top) {
    const GlobalEnvelope& env = *panel.envelope;
    std::vector<double> x = env.grid.values();
    if (x.empty())
        for (Eigen::Index k = 0; k < env.lower.size(); ++k) x.push_back(static_cast<double>(k + 1));
    double lo = INFINITY, hi = -INFINITY;
    widen(lo, hi, env.lower);
    widen(lo, hi, env.upper);
    if (panel.curve) widen(lo, hi, *panel.curve);
    if (panel.extra_lower) widen(lo, hi, *panel.extra_lower);
    if (panel.extra_upper) widen(lo, hi, *panel.extra_upper);
    if (!std::isfinite(lo)) lo = hi = 0.0;
    const Frame f{kMargin, top + 24.0, kWidth - 2 * kMargin, kPanelHeight - 48.0,
                  x.front(), x.back(), lo, hi};

    os << "<rect x=\"" << fmt(f.x0) << "\" y=\"" << fmt(f.y0) << "\" width=\"" << fmt(f.w) << "\" height=\""
       << fmt(f.h) << "\" fill=\"none\" stroke=\"#999\"/>\n";
    std::string band;
    for (std::size_t k = 0; k < x.size(); ++k)
        band += fmt(f.px(x[k])) + "," + fmt(f.py(env.upper(static_cast<Eigen::Index>(k)))) + " ";
    for (std::size_t k = x.size(); k-- > 0;)
        band += fmt(f.px(x[k])) + "," + fmt(f.py(env.lower(static_cast<Eigen::Index>(k)))) + " ";
    os << "<polygon fill=\"#c8c8c8\" stroke=\"none\" points=\"" << band << "\"/>\n";
    if (panel.extra_lower) os << polyline(f, x, *panel.extra_lower, "stroke=\"#555\" stroke-dasharray=\"4 3\"");
    if (panel.extra_upper) os << polyline(f, x, *panel.extra_upper, "stroke=\"#555\" stroke-dasharray=\"4 3\"");
    os << polyline(f, x, env.central, "stroke=\"#333\" stroke-dasharray=\"2 2\"");
    if (panel.curve) {
        os << polyline(f, x, *panel.curve, "stroke=\"#1f4e9c\" stroke-width=\"1.5\"");
        for (std::size_t k = 0; k < env.mask.size() && k < x.size(); ++k)
            if (env.mask[k])
                os << "<circle cx=\"" << fmt(f.px(x[k])) << "\" cy=\""
                   << fmt(f.py((*panel.curve)(static_cast<Eigen::Index>(k)))) << "\" r=\"3\" fill=\"#d62728\"/>\n";
    }
}

std::string heat_colour(double t) {
    t = std::clamp(std::isfinite(t) ? t : 0.5, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255 * t));
    const int b = static_cast<int>(std::lround(255 * (1.0 - t)));
    std::ostringstream os;
    os << "rgb(" << r << ",80," << b << ")";
    return os.str();
}

void heatmap(std::ostream& os, const std::vector<Pixel>& pixels, const std::vector<double>& v, double x0, double y0,
             double size, const std::string& title, bool binary) {
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const Pixel& p : pixels) {
        xmin = std::min(xmin, p.x - p.width / 2);
        xmax = std::max(xmax, p.x + p.width / 2);
        ymin = std::min(ymin, p.y - p.height / 2);
        ymax = std::max(ymax, p.y + p.height / 2);
    }
    const double scale = size / std::max(xmax - xmin, ymax - ymin);
    double lo = INFINITY, hi = -INFINITY;
    for (double x : v)
        if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    os << "<text x=\"" << fmt(x0) << "\" y=\"" << fmt(y0 - 4) << "\" font-size=\"11\">" << escape(title)
       << "</text>\n";
    for (std::size_t k = 0; k < pixels.size(); ++k) {
        const Pixel& p = pixels[k];
        const std::string colour =
            binary ? (v[k] > 0.5 ? "#d62728" : "#eeeeee") : heat_colour(hi > lo ? (v[k] - lo) / (hi - lo) : 0.5);
        os << "<rect x=\"" << fmt(x0 + (p.x - p.width / 2 - xmin) * scale) << "\" y=\""
           << fmt(y0 + (ymax - p.y - p.height / 2) * scale) << "\" width=\"" << fmt(p.width * scale)
           << "\" height=\"" << fmt(p.height * scale) << "\" fill=\"" << colour << "\"/>\n";
    }
}

void panel_2d(std::ostream& os, const PlotPanel& panel, double top) {
    const GlobalEnvelope& env = *panel.envelope;
    const std::vector<Pixel>& pixels = env.grid.pixels();
    const double size = (kWidth - 5 * 16.0) / 4.0;
    const double y0 = top + 40.0;
    auto to_vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    heatmap(os, pixels, to_vec(env.lower), 16.0, y0, size, "lower", false);
    heatmap(os, pixels, to_vec(env.upper), 32.0 + size, y0, size, "upper", false);
    if (panel.curve) heatmap(os, pixels, to_vec(*panel.curve), 48.0 + 2 * size, y0, size, "observed", false);
    std::vector<double> mask(env.mask.begin(), env.mask.end());
    mask.resize(pixels.size(), 0.0);
    heatmap(os, pixels, mask, 64.0 + 3 * size, y0, size, "significant", true);
}

}  // namespace

std::string render_svg(std::span<const PlotPanel> panels, const std::string& title) {
    std::ostringstream os;
    const double head = title.empty() ? 0.0 : 24.0;
    const double height = head + kPanelHeight * static_cast<double>(panels.size());
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(height)
       << "\" viewBox=\"0 0 " << fmt(kWidth) << " " << fmt(height) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        os << "<text x=\"" << fmt(kMargin) << "\" y=\"18\" font-size=\"14\">" << escape(title) << "</text>\n";
    for (std::size_t i = 0; i < panels.size(); ++i) {
        const PlotPanel& panel = panels[i];
        const GlobalEnvelope& env = *panel.envelope;
        const double top = head + kPanelHeight * static_cast<double>(i);
        os << "<g class=\"panel\" data-lower=\"" << values_attr(env.lower) << "\" data-upper=\""
           << values_attr(env.upper) << "\" data-central=\"" << values_attr(env.central) << "\" data-mask=\""
           << mask_attr(env.mask) << "\"";
        if (panel.curve) os << " data-curve=\"" << values_attr(*panel.curve) << "\"";
        os << ">\n";
        os << "<text x=\"" << fmt(kMargin) << "\" y=\"" << fmt(top + 16.0) << "\" font-size=\"12\">"
           << escape(panel.title) << "</text>\n";
        if (env.grid.is_2d())
            panel_2d(os, panel, top);
        else
            panel_1d(os, panel, top);
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string envelope_svg(const CombinedEnvelope& env, std::span<const CurveSet> sets,
                         const std::vector<std::string>& labels) {
    std::vector<PlotPanel> panels;
    for (std::size_t g = 0; g < env.components.size(); ++g) {
        PlotPanel p;
        p.title = g < labels.size() ? labels[g] : "component " + std::to_string(g + 1);
        p.envelope = &env.components[g];
        if (g < sets.size() && sets[g].obs_count() > 0) p.curve = sets[g].curve(0).transpose();
        panels.push_back(std::move(p));
    }
    std::string title;
    if (env.p) title = "p = " + format_double(*env.p);
    return render_svg(panels, title);
}

std::string envelope_svg(const GlobalEnvelope& env, const CurveSet& set, const std::string& title) {
    PlotPanel p;
    p.title = title;
    p.envelope = &env;
    if (set.obs_count() > 0) p.curve = set.curve(0).transpose();
    return render_svg(std::span<const PlotPanel>(&p, 1), env.p ? "p = " + format_double(*env.p) : "");
}

}  // namespace globenv
