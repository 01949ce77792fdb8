// Direct SVG emission for the frontier/attested scatter; no plotting deps.

#include "numpar/svg_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "numpar/errors.hpp"

namespace numpar {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 560.0;
constexpr double kMarginLeft = 72.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 24.0;
constexpr double kMarginBottom = 64.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

int channel(std::string_view hex, int index) {
    auto nibble = [](char c) {
        return c <= '9' ? c - '0' : c - 'a' + 10;
    };
    return nibble(hex[1 + 2 * index]) * 16 + nibble(hex[2 + 2 * index]);
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range padded(double lo, double hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

// Tick step of the form {1,2,5} * 10^k giving 4..8 ticks.
double tick_step(const Range& r) {
    const double raw = (r.hi - r.lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

}  // namespace

std::string blend_membership_color(double p) {
    p = std::clamp(p, 0.0, 1.0);
    char buf[8];
    int rgb[3];
    for (int i = 0; i < 3; ++i) {
        const int lo = channel(kMembershipLowColor, i);
        const int hi = channel(kMembershipHighColor, i);
        rgb[i] = static_cast<int>(std::lround(lo + p * (hi - lo)));
    }
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

std::string render_figure(const FigureInputs& inputs) {
    if (!inputs.membership.empty() && inputs.membership.size() != inputs.attested.size()) {
        throw SchemaMismatch("membership has " + std::to_string(inputs.membership.size()) +
                             " entries for " + std::to_string(inputs.attested.size()) +
                             " attested points");
    }
    if (inputs.attested.empty() && inputs.frontier.empty()) {
        throw EmptyInput("render_figure: nothing to plot");
    }

    std::vector<MetricPoint> frontier = inputs.frontier;
    std::sort(frontier.begin(), frontier.end(), [](const MetricPoint& a, const MetricPoint& b) {
        if (a.lexicon_size != b.lexicon_size) return a.lexicon_size < b.lexicon_size;
        return a.complexity < b.complexity;
    });

    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    auto widen = [&](const MetricPoint& p) {
        x_lo = std::min(x_lo, static_cast<double>(p.lexicon_size));
        x_hi = std::max(x_hi, static_cast<double>(p.lexicon_size));
        y_lo = std::min(y_lo, p.complexity);
        y_hi = std::max(y_hi, p.complexity);
    };
    for (const auto& p : inputs.attested) widen(p);
    for (const auto& p : frontier) widen(p);
    const Range xr = padded(x_lo, x_hi);
    const Range yr = padded(y_lo, y_hi);

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto sx = [&](double x) { return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
    auto sy = [&](double y) { return kMarginTop + (yr.hi - y) / (yr.hi - yr.lo) * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << fmt(kWidth) << "' height='"
        << fmt(kHeight) << "' viewBox='0 0 " << fmt(kWidth) << " " << fmt(kHeight) << "'>\n";
    svg << "<rect x='0' y='0' width='" << fmt(kWidth) << "' height='" << fmt(kHeight)
        << "' fill='#ffffff'/>\n";

    // axes
    const double x0 = kMarginLeft, x1 = kWidth - kMarginRight;
    const double y0 = kHeight - kMarginBottom, y1 = kMarginTop;
    svg << "<line x1='" << fmt(x0) << "' y1='" << fmt(y0) << "' x2='" << fmt(x1) << "' y2='"
        << fmt(y0) << "' stroke='#000000' stroke-width='1'/>\n";
    svg << "<line x1='" << fmt(x0) << "' y1='" << fmt(y0) << "' x2='" << fmt(x0) << "' y2='"
        << fmt(y1) << "' stroke='#000000' stroke-width='1'/>\n";

    // ticks + labels
    const double xs = tick_step(xr);
    for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-9; t += xs) {
        svg << "<line x1='" << fmt(sx(t)) << "' y1='" << fmt(y0) << "' x2='" << fmt(sx(t))
            << "' y2='" << fmt(y0 + 5.0) << "' stroke='#000000' stroke-width='1'/>\n";
        svg << "<text x='" << fmt(sx(t)) << "' y='" << fmt(y0 + 18.0)
            << "' font-family='sans-serif' font-size='11' text-anchor='middle'>" << fmt_tick(t)
            << "</text>\n";
    }
    const double ys = tick_step(yr);
    for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-9; t += ys) {
        svg << "<line x1='" << fmt(x0 - 5.0) << "' y1='" << fmt(sy(t)) << "' x2='" << fmt(x0)
            << "' y2='" << fmt(sy(t)) << "' stroke='#000000' stroke-width='1'/>\n";
        svg << "<text x='" << fmt(x0 - 8.0) << "' y='" << fmt(sy(t) + 4.0)
            << "' font-family='sans-serif' font-size='11' text-anchor='end'>" << fmt_tick(t)
            << "</text>\n";
    }
    svg << "<text x='" << fmt(0.5 * (x0 + x1)) << "' y='" << fmt(kHeight - 18.0)
        << "' font-family='sans-serif' font-size='14' text-anchor='middle'>lexicon size</text>\n";
    svg << "<text x='18' y='" << fmt(0.5 * (y0 + y1))
        << "' font-family='sans-serif' font-size='14' text-anchor='middle' transform='rotate(-90 18 "
        << fmt(0.5 * (y0 + y1)) << ")'>morphosyntactic complexity</text>\n";

    // frontier staircase: horizontal then vertical between consecutive points
    if (!frontier.empty()) {
        svg << "<polyline fill='none' stroke='#000000' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < frontier.size(); ++i) {
            const double px = sx(frontier[i].lexicon_size);
            const double py = sy(frontier[i].complexity);
            if (i > 0) svg << " " << fmt(px) << "," << fmt(sy(frontier[i - 1].complexity)) << " ";
            svg << fmt(px) << "," << fmt(py);
        }
        svg << "'/>\n";
    }

    // attested points
    auto escape = [](const std::string& text) {
        std::string out;
        for (char c : text) {
            if (c == '&') out += "&amp;";
            else if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else out += c;
        }
        return out;
    };
    for (std::size_t i = 0; i < inputs.attested.size(); ++i) {
        const MetricPoint& p = inputs.attested[i];
        const std::string fill = inputs.membership.empty()
                                     ? std::string(kNoMembershipColor)
                                     : blend_membership_color(inputs.membership[i]);
        svg << "<circle cx='" << fmt(sx(p.lexicon_size)) << "' cy='" << fmt(sy(p.complexity))
            << "' r='4' fill='" << fill << "' stroke='#333333' stroke-width='0.75'>"
            << "<title>" << escape(p.system_id) << "</title></circle>\n";
    }

    svg << "</svg>\n";
    return svg.str();
}

}  // namespace numpar
