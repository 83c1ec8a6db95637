#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cforge {

struct SvgScatterPanel {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

std::string svg_bar_chart(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel,
                          const std::vector<std::pair<std::string, double>>& bars);

std::string svg_scatter_panels(const std::string& title,
                               const std::vector<SvgScatterPanel>& panels);

}  // namespace cforge
