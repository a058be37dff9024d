#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace liencycle::svg {

/// Minimal SVG canvas mapping data coordinates onto a fixed-size plot area.
class Plot {
public:
    Plot(double x_lo, double x_hi, double y_lo, double y_hi, int width = 640, int height = 480);

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  double stroke_width = 1.0, const std::string& dash = {});
    void rect(double x0, double y0, double x1, double y1, const std::string& fill);
    void hline(double y, const std::string& color, const std::string& dash = {});
    void vline(double x, const std::string& color, const std::string& dash = {});
    void legend(const std::string& label, const std::string& color);
    void axes(const std::string& x_label, const std::string& y_label, const std::string& title);

    void write(std::ostream& os) const;

private:
    double px(double x) const;
    double py(double y) const;

    double x_lo_, x_hi_, y_lo_, y_hi_;
    int width_, height_;
    int legend_rows_ = 0;
    std::string body_;
    std::string overlay_;
};

/// Fixed 3-decimal formatting for coordinates.
std::string coord(double v);

}  // namespace liencycle::svg
