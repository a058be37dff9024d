#include "svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace liencycle::svg {

namespace {
constexpr int kMarginLeft = 60;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 30;
constexpr int kMarginBottom = 45;

std::string dash_attr(const std::string& dash) {
    return dash.empty() ? std::string{} : " stroke-dasharray=\"" + dash + "\"";
}
}  // namespace

std::string coord(double v) {
    if (std::abs(v) < 5e-4) v = 0.0;
    char buf[48];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 3);
    return std::string(buf, res.ptr);
}

Plot::Plot(double x_lo, double x_hi, double y_lo, double y_hi, int width, int height)
    : x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi), width_(width), height_(height) {
    if (!(x_hi_ > x_lo_)) x_hi_ = x_lo_ + 1.0;
    if (!(y_hi_ > y_lo_)) y_hi_ = y_lo_ + 1.0;
}

double Plot::px(double x) const {
    return kMarginLeft + (x - x_lo_) / (x_hi_ - x_lo_) * (width_ - kMarginLeft - kMarginRight);
}

double Plot::py(double y) const {
    return height_ - kMarginBottom -
           (y - y_lo_) / (y_hi_ - y_lo_) * (height_ - kMarginTop - kMarginBottom);
}

void Plot::polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                    double stroke_width, const std::string& dash) {
    if (pts.size() < 2) return;
    body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
             coord(stroke_width) + "\"" + dash_attr(dash) + " points=\"";
    for (const auto& [x, y] : pts) {
        const double cx = std::clamp(px(x), -1e4, 1e4);
        const double cy = std::clamp(py(y), -1e4, 1e4);
        body_ += coord(cx) + "," + coord(cy) + " ";
    }
    body_ += "\"/>\n";
}

void Plot::rect(double x0, double y0, double x1, double y1, const std::string& fill) {
    const double l = std::min(px(x0), px(x1)), r = std::max(px(x0), px(x1));
    const double t = std::min(py(y0), py(y1)), b = std::max(py(y0), py(y1));
    body_ += "<rect x=\"" + coord(l) + "\" y=\"" + coord(t) + "\" width=\"" + coord(r - l) +
             "\" height=\"" + coord(b - t) + "\" fill=\"" + fill + "\"/>\n";
}

void Plot::hline(double y, const std::string& color, const std::string& dash) {
    polyline({{x_lo_, y}, {x_hi_, y}}, color, 1.0, dash);
}

void Plot::vline(double x, const std::string& color, const std::string& dash) {
    polyline({{x, y_lo_}, {x, y_hi_}}, color, 1.0, dash);
}

void Plot::legend(const std::string& label, const std::string& color) {
    const double x = width_ - kMarginRight - 150;
    const double y = kMarginTop + 14 + 16 * legend_rows_++;
    overlay_ += "<rect x=\"" + coord(x) + "\" y=\"" + coord(y - 9) +
                "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
    overlay_ += "<text x=\"" + coord(x + 15) + "\" y=\"" + coord(y) +
                "\" font-size=\"12\" font-family=\"sans-serif\">" + label + "</text>\n";
}

void Plot::axes(const std::string& x_label, const std::string& y_label, const std::string& title) {
    const double l = kMarginLeft, r = width_ - kMarginRight;
    const double t = kMarginTop, b = height_ - kMarginBottom;
    overlay_ += "<rect x=\"" + coord(l) + "\" y=\"" + coord(t) + "\" width=\"" + coord(r - l) +
                "\" height=\"" + coord(b - t) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_lo_ + (x_hi_ - x_lo_) * i / 4.0;
        const double yv = y_lo_ + (y_hi_ - y_lo_) * i / 4.0;
        overlay_ += "<text x=\"" + coord(px(xv)) + "\" y=\"" + coord(b + 15) +
                    "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\">" +
                    coord(xv) + "</text>\n";
        overlay_ += "<text x=\"" + coord(l - 5) + "\" y=\"" + coord(py(yv) + 4) +
                    "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"end\">" +
                    coord(yv) + "</text>\n";
    }
    overlay_ += "<text x=\"" + coord(0.5 * (l + r)) + "\" y=\"" + coord(height_ - 8.0) +
                "\" font-size=\"13\" font-family=\"sans-serif\" text-anchor=\"middle\">" + x_label +
                "</text>\n";
    overlay_ += "<text x=\"14\" y=\"" + coord(0.5 * (t + b)) +
                "\" font-size=\"13\" font-family=\"sans-serif\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 14 " + coord(0.5 * (t + b)) + ")\">" + y_label + "</text>\n";
    overlay_ += "<text x=\"" + coord(0.5 * (l + r)) +
                "\" y=\"18\" font-size=\"14\" font-family=\"sans-serif\" text-anchor=\"middle\">" +
                title + "</text>\n";
}

void Plot::write(std::ostream& os) const {
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
       << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<clipPath id=\"plot\"><rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop
       << "\" width=\"" << width_ - kMarginLeft - kMarginRight << "\" height=\""
       << height_ - kMarginTop - kMarginBottom << "\"/></clipPath>\n"
       << "<g clip-path=\"url(#plot)\">\n"
       << body_ << "</g>\n"
       << overlay_ << "</svg>\n";
}

}  // namespace liencycle::svg
