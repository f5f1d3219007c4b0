#pragma once

#include <string>
#include <vector>

namespace cpka {

struct Series {
    std::string name;
    std::vector<double> x, y;
};

struct Figure {
    std::string file;  // output name, e.g. "validation.svg"
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
};

// Minimal line chart: one polyline per series, linear axes, legend.
std::string render_svg(const Figure& fig);

}  // namespace cpka
