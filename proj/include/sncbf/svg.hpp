#pragma once

#include <string>
#include <vector>

namespace sncbf::svg {

// Minimal deterministic SVG emitter: identical inputs give identical bytes.
class SvgBuilder {
 public:
  SvgBuilder(double width, double height);

  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke, double stroke_width = 1.0);
  void polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& stroke, double stroke_width = 1.5);
  // Closed filled region; xs/ys aligned.
  void polygon(const std::vector<double>& xs, const std::vector<double>& ys,
               const std::string& fill, double opacity = 1.0);
  void circle(double cx, double cy, double r, const std::string& fill,
              const std::string& stroke = "none", double stroke_width = 1.0);
  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& stroke = "none");
  // anchor: "start", "middle" or "end".
  void text(double x, double y, const std::string& s, double size = 12.0,
            const std::string& anchor = "start",
            const std::string& fill = "#222222");

  std::string str() const;  // complete document

 private:
  double width_, height_;
  std::string body_;
};

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  // Optional shaded band, aligned with x (e.g. min/max across seeds).
  std::vector<double> band_lo;
  std::vector<double> band_hi;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 480;
};

// Line plot with axes, ticks, legend, and per-series variance shading. The
// data window covers all points and bands with a small padding.
std::string line_plot(const PlotSpec& spec, const std::vector<Series>& series);

// Fixed series palette, cycled by index.
const std::string& palette_color(size_t i);

}  // namespace sncbf::svg
