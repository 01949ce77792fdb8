#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "numpar/types.hpp"

namespace numpar {

// Fill-color gradient endpoints for membership probability P(k=2):
// 0 -> dark, 1 -> light (viridis endpoints).
inline constexpr std::string_view kMembershipLowColor = "#440154";
inline constexpr std::string_view kMembershipHighColor = "#fde725";
inline constexpr std::string_view kNoMembershipColor = "#888888";

// Linear RGB blend between the two endpoints; p is clamped to [0, 1].
std::string blend_membership_color(double p);

struct FigureInputs {
    std::vector<MetricPoint> attested;   // one scheme
    std::vector<MetricPoint> frontier;   // Pareto points, any order
    std::vector<double> membership;      // P(k=2) per attested point; empty = uncolored
};

// Deterministic SVG scatter: one circle per attested point, the frontier as
// a single staircase polyline, labeled axes. Byte-identical for equal
// inputs. Throws SchemaMismatch when membership size differs from attested.
std::string render_figure(const FigureInputs& inputs);

}  // namespace numpar
