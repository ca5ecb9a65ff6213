#pragma once
// Minimal self-contained SVG line plots: axes, ticks, legend, polyline
// series.  Output is fully deterministic — no timestamps, no external
// resources — so identical data produces byte-identical files.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace shrink::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline std::string num(double v, const char* spec = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
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

}  // namespace detail

// Writes a line plot of the given series.  `comment` (if nonempty) is
// embedded verbatim in an XML comment so artifacts carry their resolved
// configuration.
inline void write_line_plot(const std::string& path, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel,
                            const std::vector<Series>& series,
                            const std::string& comment = {}) {
    if (series.empty()) throw std::invalid_argument("plot needs at least one series");
    for (const auto& s : series)
        if (s.x.size() != s.y.size() || s.x.empty())
            throw std::invalid_argument("series '" + s.name + "' is empty or ragged");

    double xlo = series[0].x[0], xhi = xlo, ylo = series[0].y[0], yhi = ylo;
    for (const auto& s : series) {
        for (double v : s.x) {
            xlo = std::min(xlo, v);
            xhi = std::max(xhi, v);
        }
        for (double v : s.y) {
            ylo = std::min(ylo, v);
            yhi = std::max(yhi, v);
        }
    }
    // pad ranges; degenerate (flat) ranges get a symmetric margin
    auto pad = [](double& lo, double& hi) {
        double span = hi - lo;
        if (span <= 0.0) span = std::max(1e-9, std::abs(lo) * 1e-3 + 1e-9);
        lo -= 0.05 * span;
        hi += 0.05 * span;
    };
    pad(xlo, xhi);
    pad(ylo, yhi);

    const double W = 720, H = 480, L = 80, R = 24, T = 44, B = 56;
    auto px = [&](double x) { return L + (x - xlo) / (xhi - xlo) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ylo) / (yhi - ylo) * (H - T - B); };

    static const char* palette[] = {"#1965b0", "#dc050c", "#4eb265",
                                    "#f4a736", "#882e72", "#72190e"};
    constexpr int NPAL = 6;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 720 480\" "
           "font-family=\"sans-serif\" font-size=\"13\">\n";
    if (!comment.empty()) out << "<!-- " << comment << " -->\n";
    out << "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
    out << "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << detail::xml_escape(title) << "</text>\n";

    // axes
    out << "<line x1=\"" << detail::num(L) << "\" y1=\"" << detail::num(H - B)
        << "\" x2=\"" << detail::num(W - R) << "\" y2=\"" << detail::num(H - B)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << detail::num(L) << "\" y1=\"" << detail::num(T) << "\" x2=\""
        << detail::num(L) << "\" y2=\"" << detail::num(H - B)
        << "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 5; ++i) {
        double fx = xlo + (xhi - xlo) * i / 5.0;
        double fy = ylo + (yhi - ylo) * i / 5.0;
        out << "<line x1=\"" << detail::num(px(fx)) << "\" y1=\"" << detail::num(H - B)
            << "\" x2=\"" << detail::num(px(fx)) << "\" y2=\"" << detail::num(H - B + 5)
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << detail::num(px(fx)) << "\" y=\"" << detail::num(H - B + 20)
            << "\" text-anchor=\"middle\">" << detail::tick_label(fx) << "</text>\n";
        out << "<line x1=\"" << detail::num(L - 5) << "\" y1=\"" << detail::num(py(fy))
            << "\" x2=\"" << detail::num(L) << "\" y2=\"" << detail::num(py(fy))
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << detail::num(L - 8) << "\" y=\"" << detail::num(py(fy) + 4)
            << "\" text-anchor=\"end\">" << detail::tick_label(fy) << "</text>\n";
    }
    out << "<text x=\"" << detail::num((L + W - R) / 2) << "\" y=\"" << detail::num(H - 12)
        << "\" text-anchor=\"middle\">" << detail::xml_escape(xlabel) << "</text>\n";
    out << "<text x=\"18\" y=\"" << detail::num((T + H - B) / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << detail::num((T + H - B) / 2) << ")\">" << detail::xml_escape(ylabel)
        << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        out << "<polyline fill=\"none\" stroke=\"" << palette[k % NPAL]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i) out << ' ';
            out << detail::num(px(s.x[i])) << ',' << detail::num(py(s.y[i]));
        }
        out << "\"/>\n";
        // legend entry
        double ly = T + 16.0 * static_cast<double>(k) + 8.0;
        out << "<line x1=\"" << detail::num(W - R - 150) << "\" y1=\"" << detail::num(ly)
            << "\" x2=\"" << detail::num(W - R - 126) << "\" y2=\"" << detail::num(ly)
            << "\" stroke=\"" << palette[k % NPAL] << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << detail::num(W - R - 120) << "\" y=\"" << detail::num(ly + 4)
            << "\">" << detail::xml_escape(s.name) << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace shrink::svg
