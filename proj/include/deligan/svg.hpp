#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deligan/data.hpp"

namespace deligan::svg {

struct Point {
    double x;
    double y;
};

// Static scatter figure: generated points, optional truth-mode ellipses
// (3-sigma outlines) and optional mixture markers. Output is a W3C SVG 1.1
// subset (rect/line/circle/ellipse/text) with deterministic bytes.
std::string scatter_plot(const std::vector<Point>& samples,
                         const std::optional<data::ToySpec>& truth,
                         const std::vector<Point>& mixture_markers, int width = 640,
                         int height = 640);

} // namespace deligan::svg
