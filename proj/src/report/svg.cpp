#include "eba/error.hpp"
#include "eba/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

namespace eba::report {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 40.0;
constexpr double kTop = 40.0;
constexpr double kPlotW = 420.0;
constexpr double kPlotH = 400.0;

constexpr std::array<const char*, 8> kPalette{"orange", "purple", "brown", "magenta",
                                              "teal",   "olive",  "gray",  "navy"};

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

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string dataset_color(const std::string& label, std::size_t index) {
    if (label == "LSUI400") return "red";
    if (label == "UIEB100") return "blue";
    if (label == "Ocean_ex") return "green";
    return kPalette[index % kPalette.size()];
}

std::string render_tsne_svg(const bias::TsneLayout& layout, const std::vector<std::string>& labels) {
    if (layout.coords.empty()) throw Error(ErrorKind::EmptyInput, "empty layout");
    if (labels.size() != layout.coords.size())
        throw Error(ErrorKind::LengthMismatch, "labels and coordinates differ in length");

    std::vector<std::string> order;
    std::vector<std::string> colors;
    std::size_t others = 0;
    for (const auto& l : labels) {
        if (std::find(order.begin(), order.end(), l) != order.end()) continue;
        order.push_back(l);
        const std::string c = dataset_color(l, others);
        if (c == kPalette[others % kPalette.size()]) ++others;
        colors.push_back(c);
    }

    double x0 = layout.coords[0][0], x1 = x0, y0 = layout.coords[0][1], y1 = y0;
    for (const auto& p : layout.coords) {
        x0 = std::min(x0, p[0]);
        x1 = std::max(x1, p[0]);
        y0 = std::min(y0, p[1]);
        y1 = std::max(y1, p[1]);
    }
    auto sx = [&](double v) { return x1 > x0 ? kLeft + (v - x0) / (x1 - x0) * kPlotW : kLeft + kPlotW / 2; };
    auto sy = [&](double v) { return y1 > y0 ? kTop + (y1 - v) / (y1 - y0) * kPlotH : kTop + kPlotH / 2; };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(kWidth) << "\" height=\""
        << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
        << "\" fill=\"white\"/>\n"
        << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(kPlotW) << "\" height=\""
        << num(kPlotH) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"0.5\"/>\n"
        << "<text x=\"" << num(kLeft) << "\" y=\"25.00\" font-family=\"sans-serif\" font-size=\"14\">t-SNE</text>\n";
    for (std::size_t i = 0; i < layout.coords.size(); ++i) {
        const auto idx = static_cast<std::size_t>(std::find(order.begin(), order.end(), labels[i]) - order.begin());
        out << "<circle cx=\"" << num(sx(layout.coords[i][0])) << "\" cy=\"" << num(sy(layout.coords[i][1]))
            << "\" r=\"3\" fill=\"" << colors[idx] << "\" fill-opacity=\"0.8\"/>\n";
    }
    out << "<g id=\"legend\">\n";
    for (std::size_t i = 0; i < order.size(); ++i) {
        const double y = kTop + 10.0 + 20.0 * static_cast<double>(i);
        out << "<rect x=\"480.00\" y=\"" << num(y - 8.0) << "\" width=\"10\" height=\"10\" fill=\"" << colors[i]
            << "\"/>\n"
            << "<text x=\"496.00\" y=\"" << num(y + 1.0) << "\" font-family=\"sans-serif\" font-size=\"12\">"
            << escape(order[i]) << "</text>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

void plot_tsne_svg(const bias::TsneLayout& layout, const std::vector<std::string>& labels,
                   const std::filesystem::path& path) {
    write_text(path, render_tsne_svg(layout, labels));
}

}  // namespace eba::report
