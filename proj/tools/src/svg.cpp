#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace sorterlab::cli {

namespace {

constexpr int kWidth = 900;
constexpr int kHeight = 520;
constexpr int kMarginLeft = 78;
constexpr int kMarginRight = 170;
constexpr int kMarginTop = 46;
constexpr int kMarginBottom = 58;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

Range padded(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
    if (lo == hi) return {lo - 1.0, hi + 1.0};
    const double pad = 0.04 * (hi - lo);
    return {lo - pad, hi + pad};
}

} // namespace

void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series) {
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    std::size_t total = 0;
    for (const Series& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
            ++total;
        }
    }
    const Range xr = padded(xlo, xhi);
    const Range yr = padded(ylo, yhi);

    const double pw = kWidth - kMarginLeft - kMarginRight;
    const double ph = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double x) {
        return kMarginLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw;
    };
    auto py = [&](double y) {
        return kMarginTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph;
    };

    std::ofstream out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
        << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"26\" font-family=\"sans-serif\" "
           "font-size=\"16\" text-anchor=\"middle\">"
        << title << "</text>\n";

    // axes frame and ticks
    out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
        << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double fx = xr.lo + (xr.hi - xr.lo) * i / n_ticks;
        const double fy = yr.lo + (yr.hi - yr.lo) * i / n_ticks;
        const double gx = px(fx);
        const double gy = py(fy);
        out << "<line x1=\"" << num(gx) << "\" y1=\"" << kMarginTop << "\" x2=\""
            << num(gx) << "\" y2=\"" << kMarginTop + ph
            << "\" stroke=\"#ddd\" stroke-width=\"0.6\"/>\n";
        out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << num(gy) << "\" x2=\""
            << kMarginLeft + pw << "\" y2=\"" << num(gy)
            << "\" stroke=\"#ddd\" stroke-width=\"0.6\"/>\n";
        out << "<text x=\"" << num(gx) << "\" y=\"" << kMarginTop + ph + 18
            << "\" font-family=\"sans-serif\" font-size=\"11\" "
               "text-anchor=\"middle\">"
            << label(fx) << "</text>\n";
        out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << num(gy + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" "
               "text-anchor=\"end\">"
            << label(fy) << "</text>\n";
    }
    out << "<text x=\"" << kMarginLeft + pw / 2 << "\" y=\"" << kHeight - 14
        << "\" font-family=\"sans-serif\" font-size=\"13\" "
           "text-anchor=\"middle\">"
        << xlabel << "</text>\n";
    out << "<text x=\"20\" y=\"" << kMarginTop + ph / 2
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 20 "
        << kMarginTop + ph / 2 << ")\">" << ylabel << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % kPaletteSize];
        const Series& sr = series[s];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.8\" points=\"";
        for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
            if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i])) continue;
            out << num(px(sr.x[i])) << ',' << num(py(sr.y[i])) << ' ';
        }
        out << "\"/>\n";
        if (sr.x.size() <= 64) {
            for (std::size_t i = 0; i < sr.x.size() && i < sr.y.size(); ++i) {
                if (!std::isfinite(sr.x[i]) || !std::isfinite(sr.y[i])) continue;
                out << "<circle cx=\"" << num(px(sr.x[i])) << "\" cy=\""
                    << num(py(sr.y[i])) << "\" r=\"2.5\" fill=\"" << color
                    << "\"/>\n";
            }
        }
        const double ly = kMarginTop + 14 + 18.0 * static_cast<double>(s);
        out << "<line x1=\"" << kMarginLeft + pw + 12 << "\" y1=\"" << num(ly)
            << "\" x2=\"" << kMarginLeft + pw + 34 << "\" y2=\"" << num(ly)
            << "\" stroke=\"" << color << "\" stroke-width=\"2.2\"/>\n";
        out << "<text x=\"" << kMarginLeft + pw + 40 << "\" y=\"" << num(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << sr.name
            << "</text>\n";
    }
    (void)total;
    out << "</svg>\n";
}

namespace {

void plasma(double v, int& r, int& g, int& b) {
    static const int stops[5][3] = {{13, 8, 135},
                                    {126, 3, 168},
                                    {204, 71, 120},
                                    {248, 149, 64},
                                    {240, 249, 33}};
    v = std::clamp(v, 0.0, 1.0);
    const double f = v * 4.0;
    const int i = std::min(3, static_cast<int>(f));
    const double t = f - i;
    r = static_cast<int>(std::lround(stops[i][0] + t * (stops[i + 1][0] - stops[i][0])));
    g = static_cast<int>(std::lround(stops[i][1] + t * (stops[i + 1][1] - stops[i][1])));
    b = static_cast<int>(std::lround(stops[i][2] + t * (stops[i + 1][2] - stops[i][2])));
}

} // namespace

void write_heatmap(const std::string& path, const std::string& title,
                   const std::string& xlabel, const std::string& ylabel,
                   const Eigen::MatrixXd& z, double x0, double x1, double y0,
                   double y1) {
    const int rows = static_cast<int>(z.rows());
    const int cols = static_cast<int>(z.cols());
    const int stride_r = std::max(1, rows / 128);
    const int stride_c = std::max(1, cols / 128);
    const int nr = (rows + stride_r - 1) / stride_r;
    const int nc = (cols + stride_c - 1) / stride_c;
    Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(nr, nc);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            pooled(i / stride_r, j / stride_c) =
                std::max(pooled(i / stride_r, j / stride_c), z(i, j));
    const double zmax = pooled.maxCoeff();

    const double pw = kWidth - kMarginLeft - 60;
    const double ph = kHeight - kMarginTop - kMarginBottom;
    const double cw = pw / nc;
    const double ch = ph / nr;

    std::ofstream out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
        << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"26\" font-family=\"sans-serif\" "
           "font-size=\"16\" text-anchor=\"middle\">"
        << title << "</text>\n";
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < nc; ++j) {
            int r, g, b;
            plasma(zmax > 0 ? pooled(i, j) / zmax : 0.0, r, g, b);
            // row 0 = smallest y, drawn at the bottom
            const double x = kMarginLeft + j * cw;
            const double y = kMarginTop + ph - (i + 1) * ch;
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" "
                          "height=\"%.2f\" fill=\"rgb(%d,%d,%d)\"/>\n",
                          x, y, cw + 0.5, ch + 0.5, r, g, b);
            out << buf;
        }
    }
    out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
        << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double fx = x0 + (x1 - x0) * i / n_ticks;
        const double fy = y0 + (y1 - y0) * i / n_ticks;
        const double gx = kMarginLeft + pw * i / n_ticks;
        const double gy = kMarginTop + ph - ph * i / n_ticks;
        out << "<text x=\"" << num(gx) << "\" y=\"" << kMarginTop + ph + 18
            << "\" font-family=\"sans-serif\" font-size=\"11\" "
               "text-anchor=\"middle\">"
            << label(fx) << "</text>\n";
        out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << num(gy + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" "
               "text-anchor=\"end\">"
            << label(fy) << "</text>\n";
    }
    out << "<text x=\"" << kMarginLeft + pw / 2 << "\" y=\"" << kHeight - 14
        << "\" font-family=\"sans-serif\" font-size=\"13\" "
           "text-anchor=\"middle\">"
        << xlabel << "</text>\n";
    out << "<text x=\"20\" y=\"" << kMarginTop + ph / 2
        << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 20 "
        << kMarginTop + ph / 2 << ")\">" << ylabel << "</text>\n";
    out << "</svg>\n";
}

} // namespace sorterlab::cli
