#include "deligan/svg.hpp"

#include <algorithm>
#include <cmath>

#include "deligan/csv.hpp"

namespace deligan::svg {

namespace {

std::string num(double v) {
    // round to limit path noise; keeps output bytes deterministic
    const double r = std::round(v * 100.0) / 100.0;
    return csv::format(r == 0.0 ? 0.0 : r);
}

} // namespace

std::string scatter_plot(const std::vector<Point>& samples,
                         const std::optional<data::ToySpec>& truth,
                         const std::vector<Point>& mixture_markers, int width, int height) {
    double lo_x = -1.0, hi_x = 1.0, lo_y = -1.0, hi_y = 1.0;
    bool seeded = false;
    auto grow = [&](double x, double y) {
        if (!seeded) {
            lo_x = hi_x = x;
            lo_y = hi_y = y;
            seeded = true;
        } else {
            lo_x = std::min(lo_x, x);
            hi_x = std::max(hi_x, x);
            lo_y = std::min(lo_y, y);
            hi_y = std::max(hi_y, y);
        }
    };
    for (const auto& p : samples) grow(p.x, p.y);
    for (const auto& p : mixture_markers) grow(p.x, p.y);
    if (truth) {
        for (const auto& m : truth->modes) {
            grow(m.mean[0] - 3.0 * std::sqrt(m.cov_diag[0]), m.mean[1] - 3.0 * std::sqrt(m.cov_diag[1]));
            grow(m.mean[0] + 3.0 * std::sqrt(m.cov_diag[0]), m.mean[1] + 3.0 * std::sqrt(m.cov_diag[1]));
        }
    }
    const double pad_x = std::max(0.5, (hi_x - lo_x) * 0.08);
    const double pad_y = std::max(0.5, (hi_y - lo_y) * 0.08);
    lo_x -= pad_x;
    hi_x += pad_x;
    lo_y -= pad_y;
    hi_y += pad_y;

    const double margin = 36.0;
    auto sx = [&](double x) {
        return margin + (x - lo_x) / (hi_x - lo_x) * (width - 2 * margin);
    };
    auto sy = [&](double y) {
        return height - margin - (y - lo_y) / (hi_y - lo_y) * (height - 2 * margin);
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
           std::to_string(height) + "\" fill=\"white\"/>\n";

    // axes through the origin when visible
    if (lo_x < 0.0 && hi_x > 0.0) {
        out += "<line x1=\"" + num(sx(0)) + "\" y1=\"" + num(sy(lo_y)) + "\" x2=\"" + num(sx(0)) +
               "\" y2=\"" + num(sy(hi_y)) + "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    }
    if (lo_y < 0.0 && hi_y > 0.0) {
        out += "<line x1=\"" + num(sx(lo_x)) + "\" y1=\"" + num(sy(0)) + "\" x2=\"" + num(sx(hi_x)) +
               "\" y2=\"" + num(sy(0)) + "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    }

    if (truth) {
        for (const auto& m : truth->modes) {
            out += "<ellipse cx=\"" + num(sx(m.mean[0])) + "\" cy=\"" + num(sy(m.mean[1])) +
                   "\" rx=\"" +
                   num(3.0 * std::sqrt(m.cov_diag[0]) / (hi_x - lo_x) * (width - 2 * margin)) +
                   "\" ry=\"" +
                   num(3.0 * std::sqrt(m.cov_diag[1]) / (hi_y - lo_y) * (height - 2 * margin)) +
                   "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\"/>\n";
        }
    }

    for (const auto& p : samples) {
        out += "<circle cx=\"" + num(sx(p.x)) + "\" cy=\"" + num(sy(p.y)) +
               "\" r=\"2\" fill=\"#1f77b4\" fill-opacity=\"0.55\"/>\n";
    }
    for (const auto& p : mixture_markers) {
        out += "<circle cx=\"" + num(sx(p.x)) + "\" cy=\"" + num(sy(p.y)) +
               "\" r=\"3.5\" fill=\"#ff7f0e\" stroke=\"black\" stroke-width=\"0.8\"/>\n";
    }

    out += "<text x=\"" + num(margin) + "\" y=\"" + num(18.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">" +
           std::to_string(samples.size()) + " samples, x in [" + num(lo_x) + ", " + num(hi_x) +
           "], y in [" + num(lo_y) + ", " + num(hi_y) + "]</text>\n";
    out += "</svg>\n";
    return out;
}

} // namespace deligan::svg
