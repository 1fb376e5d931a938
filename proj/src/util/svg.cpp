#include "sncbf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sncbf::svg {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// Tick step of the form {1, 2, 5} * 10^n giving 4..8 ticks over `span`.
double nice_step(double span) {
  if (!(span > 0)) return 1.0;
  double raw = span / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double frac = raw / mag;
  double step = frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0;
  return step * mag;
}

}  // namespace

SvgBuilder::SvgBuilder(double width, double height)
    : width_(width), height_(height) {}

void SvgBuilder::line(double x1, double y1, double x2, double y2,
                      const std::string& stroke, double stroke_width) {
  body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" +
           num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke +
           "\" stroke-width=\"" + num(stroke_width) + "\"/>\n";
}

void SvgBuilder::polyline(const std::vector<double>& xs,
                          const std::vector<double>& ys,
                          const std::string& stroke, double stroke_width) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("polyline: mismatched coordinate lists");
  if (xs.empty()) return;
  body_ += "<polyline points=\"";
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) body_ += " ";
    body_ += num(xs[i]) + "," + num(ys[i]);
  }
  body_ += "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
           num(stroke_width) + "\"/>\n";
}

void SvgBuilder::polygon(const std::vector<double>& xs,
                         const std::vector<double>& ys,
                         const std::string& fill, double opacity) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("polygon: mismatched coordinate lists");
  if (xs.empty()) return;
  body_ += "<polygon points=\"";
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) body_ += " ";
    body_ += num(xs[i]) + "," + num(ys[i]);
  }
  body_ += "\" fill=\"" + fill + "\" fill-opacity=\"" + num(opacity) +
           "\" stroke=\"none\"/>\n";
}

void SvgBuilder::circle(double cx, double cy, double r, const std::string& fill,
                        const std::string& stroke, double stroke_width) {
  body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" +
           num(r) + "\" fill=\"" + fill + "\" stroke=\"" + stroke +
           "\" stroke-width=\"" + num(stroke_width) + "\"/>\n";
}

void SvgBuilder::rect(double x, double y, double w, double h,
                      const std::string& fill, const std::string& stroke) {
  body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
           num(w) + "\" height=\"" + num(h) + "\" fill=\"" + fill +
           "\" stroke=\"" + stroke + "\"/>\n";
}

void SvgBuilder::text(double x, double y, const std::string& s, double size,
                      const std::string& anchor, const std::string& fill) {
  body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
           num(size) +
           "\" font-family=\"Helvetica, Arial, sans-serif\" text-anchor=\"" +
           anchor + "\" fill=\"" + fill + "\">" + escape(s) + "</text>\n";
}

std::string SvgBuilder::str() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) +
         "\" height=\"" + num(height_) + "\" viewBox=\"0 0 " + num(width_) +
         " " + num(height_) + "\">\n" + body_ + "</svg>\n";
}

const std::string& palette_color(size_t i) {
  static const std::vector<std::string> colors = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
      "#ff7f0e", "#8c564b", "#17becf"};
  return colors[i % colors.size()];
}

std::string line_plot(const PlotSpec& spec, const std::vector<Series>& series) {
  const double ml = 64, mr = 18, mt = 34, mb = 52;
  const double pw = spec.width - ml - mr;   // plot area
  const double ph = spec.height - mt - mb;

  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
  bool any = false;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      double lo = s.band_lo.empty() ? s.y[i] : std::min(s.y[i], s.band_lo[i]);
      double hi = s.band_hi.empty() ? s.y[i] : std::max(s.y[i], s.band_hi[i]);
      if (!any) {
        x_min = x_max = s.x[i];
        y_min = lo;
        y_max = hi;
        any = true;
      } else {
        x_min = std::min(x_min, s.x[i]);
        x_max = std::max(x_max, s.x[i]);
        y_min = std::min(y_min, lo);
        y_max = std::max(y_max, hi);
      }
    }
  }
  if (x_max <= x_min) x_max = x_min + 1;
  if (y_max <= y_min) y_max = y_min + 1;
  // Anchor at zero when the data sits just above it; pad the top.
  if (y_min > 0 && y_min < 0.25 * y_max) y_min = 0;
  y_max += 0.06 * (y_max - y_min);

  auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) {
    return mt + ph - (y - y_min) / (y_max - y_min) * ph;
  };

  SvgBuilder b(spec.width, spec.height);
  b.rect(0, 0, spec.width, spec.height, "#ffffff");

  // Gridlines and ticks.
  double ys = nice_step(y_max - y_min);
  for (double v = std::ceil(y_min / ys) * ys; v <= y_max + 1e-12 * ys; v += ys) {
    b.line(ml, py(v), ml + pw, py(v), "#dddddd", 1.0);
    b.text(ml - 6, py(v) + 4, num(v), 11, "end", "#444444");
  }
  double xs = nice_step(x_max - x_min);
  for (double v = std::ceil(x_min / xs) * xs; v <= x_max + 1e-12 * xs; v += xs) {
    b.line(px(v), mt, px(v), mt + ph, "#eeeeee", 1.0);
    b.text(px(v), mt + ph + 16, num(v), 11, "middle", "#444444");
  }
  b.rect(ml, mt, pw, ph, "none", "#888888");

  // Bands first so every line draws on top.
  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    if (s.band_lo.size() == s.x.size() && s.band_hi.size() == s.x.size() &&
        !s.x.empty()) {
      std::vector<double> xs2, ys2;
      for (size_t i = 0; i < s.x.size(); ++i) {
        xs2.push_back(px(s.x[i]));
        ys2.push_back(py(s.band_hi[i]));
      }
      for (size_t i = s.x.size(); i-- > 0;) {
        xs2.push_back(px(s.x[i]));
        ys2.push_back(py(s.band_lo[i]));
      }
      b.polygon(xs2, ys2, palette_color(si), 0.18);
    }
  }
  for (size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    std::vector<double> xs2, ys2;
    for (size_t i = 0; i < s.x.size(); ++i) {
      xs2.push_back(px(s.x[i]));
      ys2.push_back(py(s.y[i]));
    }
    b.polyline(xs2, ys2, palette_color(si), 2.0);
    for (size_t i = 0; i < xs2.size(); ++i)
      b.circle(xs2[i], ys2[i], 3.0, palette_color(si));
  }

  // Legend, top-left inside the plot area.
  double lx = ml + 10, ly = mt + 14;
  for (size_t si = 0; si < series.size(); ++si) {
    b.line(lx, ly - 4, lx + 22, ly - 4, palette_color(si), 2.5);
    b.text(lx + 28, ly, series[si].label, 12);
    ly += 16;
  }

  if (!spec.title.empty())
    b.text(spec.width / 2.0, 20, spec.title, 14, "middle");
  if (!spec.x_label.empty())
    b.text(ml + pw / 2.0, spec.height - 10, spec.x_label, 12, "middle");
  if (!spec.y_label.empty())
    b.text(14, mt - 8, spec.y_label, 12, "start");

  return b.str();
}

}  // namespace sncbf::svg
