#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cforge {

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

void text(std::ostringstream& o, double x, double y, const std::string& s, int size,
          const char* anchor = "middle") {
    o << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size
      << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\">" << esc(s)
      << "</text>\n";
}

}  // namespace

std::string svg_bar_chart(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel,
                          const std::vector<std::pair<std::string, double>>& bars) {
    const double W = 720, H = 420, left = 70, right = 20, top = 50, bottom = 70;
    const double plotw = W - left - right, ploth = H - top - bottom;
    double maxv = 1;
    for (const auto& [_, v] : bars) maxv = std::max(maxv, v);

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    o << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    text(o, W / 2, 24, title, 16);
    text(o, W / 2, H - 16, xlabel, 12);
    o << "<g transform=\"translate(16," << num(top + ploth / 2)
      << ") rotate(-90)\"><text font-size=\"12\" font-family=\"sans-serif\" "
         "text-anchor=\"middle\">"
      << esc(ylabel) << "</text></g>\n";
    // axes
    o << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
      << "\" y2=\"" << num(top + ploth) << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + ploth) << "\" x2=\""
      << num(left + plotw) << "\" y2=\"" << num(top + ploth) << "\" stroke=\"black\"/>\n";
    text(o, left - 8, top + 4, num(maxv), 10, "end");
    text(o, left - 8, top + ploth + 4, "0", 10, "end");

    if (!bars.empty()) {
        double step = plotw / static_cast<double>(bars.size());
        double barw = std::max(2.0, step * 0.7);
        for (std::size_t i = 0; i < bars.size(); ++i) {
            double h = bars[i].second / maxv * ploth;
            double x = left + step * (static_cast<double>(i) + 0.5);
            o << "<rect x=\"" << num(x - barw / 2) << "\" y=\"" << num(top + ploth - h)
              << "\" width=\"" << num(barw) << "\" height=\"" << num(h)
              << "\" fill=\"#4878a8\"/>\n";
            if (bars.size() <= 24) text(o, x, top + ploth + 16, bars[i].first, 9);
        }
    }
    o << "</svg>\n";
    return o.str();
}

std::string svg_scatter_panels(const std::string& title,
                               const std::vector<SvgScatterPanel>& panels) {
    const double PW = 300, PH = 260, gap = 24, top = 56, bottom = 40;
    const double W = gap + static_cast<double>(panels.size()) * (PW + gap);
    const double H = top + PH + bottom;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    o << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    text(o, W / 2, 24, title, 16);

    for (std::size_t p = 0; p < panels.size(); ++p) {
        const auto& panel = panels[p];
        double ox = gap + static_cast<double>(p) * (PW + gap);
        double oy = top;
        double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        if (!panel.points.empty()) {
            xmin = xmax = panel.points[0].first;
            ymin = ymax = panel.points[0].second;
            for (const auto& [x, y] : panel.points) {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
        if (xmax == xmin) xmax = xmin + 1;
        if (ymax == ymin) ymax = ymin + 1;

        o << "<rect x=\"" << num(ox) << "\" y=\"" << num(oy) << "\" width=\"" << num(PW)
          << "\" height=\"" << num(PH)
          << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
        text(o, ox + PW / 2, oy - 8, panel.name, 12);
        text(o, ox, oy + PH + 14, num(xmin), 9, "start");
        text(o, ox + PW, oy + PH + 14, num(xmax), 9, "end");
        text(o, ox - 4, oy + PH, num(ymin), 9, "end");
        text(o, ox - 4, oy + 8, num(ymax), 9, "end");

        const double pad = 6;
        for (const auto& [x, y] : panel.points) {
            double px = ox + pad + (x - xmin) / (xmax - xmin) * (PW - 2 * pad);
            double py = oy + PH - pad - (y - ymin) / (ymax - ymin) * (PH - 2 * pad);
            o << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py)
              << "\" r=\"2.2\" fill=\"#4878a8\" fill-opacity=\"0.6\"/>\n";
        }
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace cforge
