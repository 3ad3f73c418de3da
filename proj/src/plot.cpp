#include "fogopt/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fogopt::plot {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string svg_loglog_chart(const std::string& title, const std::vector<Series>& series,
                             double floor) {
    const double width = 640.0, height = 420.0;
    const double ml = 70.0, mr = 20.0, mt = 40.0, mb = 50.0;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmax = 1.0, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        xmax = std::max(xmax, static_cast<double>(s.values.size()));
        for (double v : s.values) {
            const double y = std::max(v, floor);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (ymin > ymax) {
        ymin = floor;
        ymax = 1.0;
    }
    if (ymax / ymin < 10.0) ymax = ymin * 10.0;
    const double lx1 = 0.0, lx2 = std::log10(xmax);
    const double ly1 = std::log10(ymin), ly2 = std::log10(ymax);

    auto px = [&](double slot) {
        return ml + (std::log10(std::max(slot, 1.0)) - lx1) / std::max(lx2 - lx1, 1e-9) * pw;
    };
    auto py = [&](double v) {
        const double y = std::log10(std::max(v, floor));
        return mt + ph - (y - ly1) / std::max(ly2 - ly1, 1e-9) * ph;
    };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
       << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
          "font-family=\"sans-serif\">"
       << escape(title) << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#333333\"/>\n";

    // decade grid lines
    for (int e = static_cast<int>(std::ceil(lx1)); e <= static_cast<int>(std::floor(lx2)); ++e) {
        const double x = px(std::pow(10.0, e));
        os << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x << "\" y2=\"" << mt + ph
           << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << mt + ph + 18
           << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">1e" << e
           << "</text>\n";
    }
    for (int e = static_cast<int>(std::ceil(ly1)); e <= static_cast<int>(std::floor(ly2)); ++e) {
        const double y = py(std::pow(10.0, e));
        os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\"" << y
           << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4
           << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">1e" << e
           << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">slot</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        if (s.values.empty()) continue;
        const char* color = kColors[si % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        // decimate long series; the chart only needs ~2k segments
        const std::size_t stride = std::max<std::size_t>(1, s.values.size() / 2000);
        for (std::size_t i = 0; i < s.values.size(); i += stride) {
            os << px(static_cast<double>(i + 1)) << "," << py(s.values[i]) << " ";
        }
        os << px(static_cast<double>(s.values.size())) << ","
           << py(s.values.back());
        os << "\"/>\n";
        os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 16 * static_cast<double>(si)
           << "\" font-size=\"12\" font-family=\"sans-serif\" fill=\"" << color << "\">"
           << escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_svg(const std::string& svg, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << svg;
}

}  // namespace fogopt::plot
