#pragma once

#include <string>
#include <vector>

namespace swcrt {

// Minimal deterministic SVG charting: every figure is a single self-contained
// <svg> element with no external references, suitable for golden-file tests.

struct SvgSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#000000";
  double width = 1.5;
  std::string dash;  // e.g. "4,3"; empty = solid
  std::string label;
  bool markers = false;
};

struct SvgBand {  // shaded ribbon between lo(x) and hi(x)
  std::vector<double> x;
  std::vector<double> lo;
  std::vector<double> hi;
  std::string color = "#bbbbbb";
  double opacity = 0.35;
};

struct SvgHLine {
  double y = 0.0;
  std::string color = "#888888";
  std::string dash = "4,3";
};

class LineChart {
 public:
  LineChart(std::string title, std::string x_label, std::string y_label);

  void add_series(SvgSeries s);
  void add_band(SvgBand b);
  void add_hline(SvgHLine h);
  void x_ticks_integer(bool v) { integer_x_ = v; }

  // Renders the chart body into an <svg> fragment at the given offset;
  // used by Figure to compose panels.
  std::string render_at(double x0, double y0, double width, double height) const;

 private:
  std::string title_, x_label_, y_label_;
  std::vector<SvgSeries> series_;
  std::vector<SvgBand> bands_;
  std::vector<SvgHLine> hlines_;
  bool integer_x_ = false;
};

// A row of chart panels sharing one canvas, written as one SVG file.
class Figure {
 public:
  explicit Figure(double panel_width = 360, double panel_height = 300);
  void add_panel(LineChart chart);
  std::string svg() const;
  void write(const std::string& path) const;

 private:
  double panel_width_, panel_height_;
  std::vector<LineChart> panels_;
};

const std::vector<std::string>& chart_palette();

}  // namespace swcrt
