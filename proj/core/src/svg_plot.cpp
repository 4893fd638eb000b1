#include "ntkm/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <vector>

#include "ntkm/csv.hpp"
#include "ntkm/errors.hpp"

namespace ntkm::bench {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 770.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 540.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Point {
  double x;  // log2 width (inf mapped past the largest finite width)
  double y;  // median final loss
  std::string width_label;
};

}  // namespace

void emit_plot(const std::string& csv_path, const std::string& svg_path) {
  const std::vector<LossRow> rows = read_csv(csv_path);

  // Gather per (model kind, width) losses across seeds.
  std::map<std::string, std::map<std::string, std::vector<double>>> by_series;
  double max_finite_log2 = 0.0;
  bool any_finite = false;
  for (const LossRow& row : rows) {
    const std::optional<double> loss =
        row.eval_loss.has_value() ? row.eval_loss : row.train_loss;
    if (!loss.has_value()) continue;
    by_series[row.model_kind][row.width].push_back(*loss);
    if (row.width != "inf") {
      const double w = std::strtod(row.width.c_str(), nullptr);
      if (w > 0.0) {
        max_finite_log2 = std::max(max_finite_log2, std::log2(w));
        any_finite = true;
      }
    }
  }
  const double inf_x = any_finite ? max_finite_log2 + 2.0 : 0.0;

  std::map<std::string, std::vector<Point>> series;
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& [kind, widths] : by_series) {
    std::vector<Point> pts;
    for (const auto& [width, losses] : widths) {
      Point p;
      p.width_label = width;
      p.x = width == "inf" ? inf_x : std::log2(std::strtod(width.c_str(), nullptr));
      p.y = median(losses);
      pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    for (const Point& p : pts) {
      x_min = std::min(x_min, p.x);
      x_max = std::max(x_max, p.x);
      y_min = std::min(y_min, p.y);
      y_max = std::max(y_max, p.y);
    }
    series.emplace(kind, std::move(pts));
  }

  const bool empty = series.empty();
  if (empty) {
    x_min = 0.0;
    x_max = 1.0;
    y_min = 0.0;
    y_max = 1.0;
  }
  if (x_max == x_min) {
    x_min -= 1.0;
    x_max += 1.0;
  }
  if (y_max == y_min) {
    const double pad = std::max(1e-12, std::abs(y_max) * 0.1);
    y_min -= pad;
    y_max += pad;
  } else {
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;
  }

  auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * (kRight - kLeft); };
  auto sy = [&](double y) { return kBottom - (y - y_min) / (y_max - y_min) * (kBottom - kTop); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
         num(kRight - kLeft) + "\" height=\"" + num(kBottom - kTop) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + num((kLeft + kRight) / 2) + "\" y=\"" + num(kHeight - 15.0) +
         "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\">"
         "width (log2 scale)</text>\n";
  svg += "<text x=\"20\" y=\"" + num((kTop + kBottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"14\" "
         "transform=\"rotate(-90 20 " + num((kTop + kBottom) / 2) + ")\">final loss</text>\n";

  // Y ticks: 5 evenly spaced.
  for (int i = 0; i <= 4; ++i) {
    const double y = y_min + (y_max - y_min) * i / 4.0;
    const double py = sy(y);
    svg += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(kLeft) +
           "\" y2=\"" + num(py) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(kLeft - 10) + "\" y=\"" + num(py + 4) +
           "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\">" + label(y) +
           "</text>\n";
  }

  // X ticks at every distinct width position.
  std::map<double, std::string> x_ticks;
  for (const auto& [kind, pts] : series) {
    for (const Point& p : pts) x_ticks.emplace(p.x, p.width_label);
  }
  for (const auto& [x, tick_label] : x_ticks) {
    const double px = sx(x);
    svg += "<line x1=\"" + num(px) + "\" y1=\"" + num(kBottom) + "\" x2=\"" + num(px) +
           "\" y2=\"" + num(kBottom + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + num(px) + "\" y=\"" + num(kBottom + 20) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">" +
           tick_label + "</text>\n";
  }

  int color_index = 0;
  double legend_y = kTop + 15.0;
  for (const auto& [kind, pts] : series) {
    const char* color = kPalette[color_index % 8];
    if (pts.size() > 1) {
      std::string poly = "<polyline fill=\"none\" stroke=\"";
      poly += color;
      poly += "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i > 0) poly += ' ';
        poly += num(sx(pts[i].x)) + "," + num(sy(pts[i].y));
      }
      poly += "\"/>\n";
      svg += poly;
    }
    for (const Point& p : pts) {
      svg += "<circle cx=\"" + num(sx(p.x)) + "\" cy=\"" + num(sy(p.y)) +
             "\" r=\"3\" fill=\"" + std::string(color) + "\"/>\n";
    }
    svg += "<line x1=\"" + num(kRight - 160) + "\" y1=\"" + num(legend_y - 4) + "\" x2=\"" +
           num(kRight - 140) + "\" y2=\"" + num(legend_y - 4) + "\" stroke=\"" +
           std::string(color) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(kRight - 135) + "\" y=\"" + num(legend_y) +
           "\" font-family=\"monospace\" font-size=\"12\">" + kind + "</text>\n";
    legend_y += 16.0;
    ++color_index;
  }

  svg += "</svg>\n";
  write_text_atomic(svg_path, svg);
}

}  // namespace ntkm::bench
