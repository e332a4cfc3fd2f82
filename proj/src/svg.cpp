#include "swcrt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "swcrt/errors.hpp"

namespace swcrt {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void expand(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (!(lo < hi)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double m = 0.06 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

// round tick step to 1/2/5 x 10^k
double tick_step(double span, int target) {
  const double raw = span / std::max(1, target);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

const std::vector<std::string>& chart_palette() {
  static const std::vector<std::string> p = {
      "#1b6ca8", "#c2402a", "#2c8c4b", "#8a4f9e",
      "#c78a1e", "#4a7a8c", "#a83270", "#5a5a5a"};
  return p;
}

LineChart::LineChart(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)),
      y_label_(std::move(y_label)) {}

void LineChart::add_series(SvgSeries s) { series_.push_back(std::move(s)); }
void LineChart::add_band(SvgBand b) { bands_.push_back(std::move(b)); }
void LineChart::add_hline(SvgHLine h) { hlines_.push_back(h); }

std::string LineChart::render_at(double x0, double y0, double width,
                                 double height) const {
  const double ml = 52, mr = 14, mt = 30, mb = 42;  // margins
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;

  Range xr, yr;
  for (const auto& s : series_) {
    for (double v : s.x) xr.expand(v);
    for (double v : s.y) yr.expand(v);
  }
  for (const auto& b : bands_) {
    for (double v : b.x) xr.expand(v);
    for (double v : b.lo) yr.expand(v);
    for (double v : b.hi) yr.expand(v);
  }
  for (const auto& h : hlines_) yr.expand(h.y);
  xr.pad();
  yr.pad();

  auto px = [&](double v) { return x0 + ml + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double v) { return y0 + mt + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<g>\n";
  o << "<rect x=\"" << num(x0 + ml) << "\" y=\"" << num(y0 + mt) << "\" width=\""
    << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"#ffffff\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  // ticks
  const double xs = integer_x_ ? std::max(1.0, std::ceil((xr.hi - xr.lo) / 10.0))
                               : tick_step(xr.hi - xr.lo, 6);
  for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-12; t += xs) {
    o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(y0 + mt + ph)
      << "\" x2=\"" << num(px(t)) << "\" y2=\"" << num(y0 + mt + ph + 4)
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    o << "<text x=\"" << num(px(t)) << "\" y=\"" << num(y0 + mt + ph + 16)
      << "\" font-size=\"10\" text-anchor=\"middle\" font-family=\"sans-serif\">"
      << num(t) << "</text>\n";
  }
  const double ys = tick_step(yr.hi - yr.lo, 6);
  for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-12; t += ys) {
    o << "<line x1=\"" << num(x0 + ml - 4) << "\" y1=\"" << num(py(t))
      << "\" x2=\"" << num(x0 + ml) << "\" y2=\"" << num(py(t))
      << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    o << "<text x=\"" << num(x0 + ml - 7) << "\" y=\"" << num(py(t) + 3)
      << "\" font-size=\"10\" text-anchor=\"end\" font-family=\"sans-serif\">"
      << num(t) << "</text>\n";
  }

  for (const auto& b : bands_) {
    o << "<polygon points=\"";
    for (size_t i = 0; i < b.x.size(); ++i)
      o << num(px(b.x[i])) << "," << num(py(b.hi[i])) << " ";
    for (size_t i = b.x.size(); i-- > 0;)
      o << num(px(b.x[i])) << "," << num(py(b.lo[i])) << " ";
    o << "\" fill=\"" << b.color << "\" fill-opacity=\"" << num(b.opacity)
      << "\" stroke=\"none\"/>\n";
  }

  for (const auto& h : hlines_) {
    o << "<line x1=\"" << num(x0 + ml) << "\" y1=\"" << num(py(h.y)) << "\" x2=\""
      << num(x0 + ml + pw) << "\" y2=\"" << num(py(h.y)) << "\" stroke=\""
      << h.color << "\" stroke-width=\"1\"";
    if (!h.dash.empty()) o << " stroke-dasharray=\"" << h.dash << "\"";
    o << "/>\n";
  }

  for (const auto& s : series_) {
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\""
      << num(s.width) << "\"";
    if (!s.dash.empty()) o << " stroke-dasharray=\"" << s.dash << "\"";
    o << " points=\"";
    for (size_t i = 0; i < s.x.size(); ++i)
      o << num(px(s.x[i])) << "," << num(py(s.y[i])) << " ";
    o << "\"/>\n";
    if (s.markers)
      for (size_t i = 0; i < s.x.size(); ++i)
        o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
          << "\" r=\"2.4\" fill=\"" << s.color << "\"/>\n";
  }

  o << "<text x=\"" << num(x0 + ml + pw / 2) << "\" y=\"" << num(y0 + 16)
    << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
    << escape(title_) << "</text>\n";
  o << "<text x=\"" << num(x0 + ml + pw / 2) << "\" y=\"" << num(y0 + mt + ph + 32)
    << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">"
    << escape(x_label_) << "</text>\n";
  o << "<text x=\"" << num(x0 + 14) << "\" y=\"" << num(y0 + mt + ph / 2)
    << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\""
    << " transform=\"rotate(-90 " << num(x0 + 14) << " " << num(y0 + mt + ph / 2)
    << ")\">" << escape(y_label_) << "</text>\n";

  // legend
  double ly = y0 + mt + 12;
  for (const auto& s : series_) {
    if (s.label.empty()) continue;
    o << "<line x1=\"" << num(x0 + ml + 8) << "\" y1=\"" << num(ly) << "\" x2=\""
      << num(x0 + ml + 28) << "\" y2=\"" << num(ly) << "\" stroke=\"" << s.color
      << "\" stroke-width=\"2\"";
    if (!s.dash.empty()) o << " stroke-dasharray=\"" << s.dash << "\"";
    o << "/>\n<text x=\"" << num(x0 + ml + 32) << "\" y=\"" << num(ly + 3)
      << "\" font-size=\"10\" font-family=\"sans-serif\">" << escape(s.label)
      << "</text>\n";
    ly += 13;
  }
  o << "</g>\n";
  return o.str();
}

Figure::Figure(double panel_width, double panel_height)
    : panel_width_(panel_width), panel_height_(panel_height) {}

void Figure::add_panel(LineChart chart) { panels_.push_back(std::move(chart)); }

std::string Figure::svg() const {
  const double w = panel_width_ * std::max<size_t>(1, panels_.size());
  const double h = panel_height_;
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w)
    << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(w) << " " << num(h)
    << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (size_t i = 0; i < panels_.size(); ++i)
    o << panels_[i].render_at(i * panel_width_, 0, panel_width_, panel_height_);
  o << "</svg>\n";
  return o.str();
}

void Figure::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << svg();
  if (!out) throw IoError("write failed on '" + path + "'");
}

}  // namespace swcrt
