#include "lqrlab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lqrlab {

namespace {

// ---------------------------------------------------------------------------
// Minimal reader for the lab's own CSV dialect.

struct CsvTable {
  std::string kind;
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ls(line);
  while (std::getline(ls, field, ',')) out.push_back(field);
  return out;
}

CsvTable read_lab_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("render_plots: cannot open '" + path + "'");
  }
  CsvTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# lqrlab-csv v1 ", 0) != 0) {
    throw std::runtime_error("render_plots: '" + path +
                             "' lacks the lqrlab-csv v1 schema line");
  }
  std::istringstream hs(line.substr(2));
  std::string token;
  while (hs >> token) {
    if (token.rfind("kind=", 0) == 0) table.kind = token.substr(5);
    if (token.rfind("experiment=", 0) == 0) {
      table.experiment = token.substr(11);
    }
  }
  if (table.kind.empty()) {
    throw std::runtime_error("render_plots: schema line in '" + path +
                             "' is missing kind=");
  }
  if (!std::getline(in, line)) {
    throw std::runtime_error("render_plots: '" + path +
                             "' has no column header");
  }
  table.columns = split_commas(line);
  long line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != table.columns.size()) {
      throw std::runtime_error("render_plots: '" + path + "' line " +
                               std::to_string(line_no) + " has " +
                               std::to_string(fields.size()) +
                               " fields, expected " +
                               std::to_string(table.columns.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      std::size_t used = 0;
      try {
        row[c] = std::stod(fields[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != fields[c].size()) {
        throw std::runtime_error("render_plots: '" + path + "' line " +
                                 std::to_string(line_no) + " column '" +
                                 table.columns[c] +
                                 "' has a malformed number '" + fields[c] +
                                 "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::size_t column_index(const CsvTable& table, const std::string& name) {
  const auto it =
      std::find(table.columns.begin(), table.columns.end(), name);
  if (it == table.columns.end()) {
    throw std::runtime_error("render_plots: CSV is missing column '" + name +
                             "'");
  }
  return static_cast<std::size_t>(it - table.columns.begin());
}

// ---------------------------------------------------------------------------
// Geometry.

std::string fmt_px(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

std::string fmt_label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", v);
  return buffer;
}

struct Axis {
  bool log = false;
  double lo = 0.0;  // data range; log10 space when log
  double hi = 1.0;
  double pix_lo = 0.0;
  double pix_hi = 1.0;

  bool drawable(double v) const {
    return std::isfinite(v) && (!log || v > 0.0);
  }
  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return pix_lo + (t - lo) / (hi - lo) * (pix_hi - pix_lo);
  }
};

Axis fit_axis(std::vector<double> values, bool log, double pix_lo,
              double pix_hi) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [&](double v) {
                                return !std::isfinite(v) ||
                                       (log && !(v > 0.0));
                              }),
               values.end());
  if (values.empty()) {
    throw std::runtime_error(
        "render_plots: an axis has no drawable values (all rows flagged or "
        "non-positive on a log scale)");
  }
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (log) {
    lo = std::log10(lo);
    hi = std::log10(hi);
  }
  if (hi - lo < 1e-12) {  // flat data: open up a visible window
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  Axis axis;
  axis.log = log;
  axis.lo = lo - pad;
  axis.hi = hi + pad;
  axis.pix_lo = pix_lo;
  axis.pix_hi = pix_hi;
  return axis;
}

std::vector<double> axis_ticks(const Axis& axis) {
  std::vector<double> ticks;
  if (axis.log) {
    const int d0 = static_cast<int>(std::ceil(axis.lo - 1e-9));
    const int d1 = static_cast<int>(std::floor(axis.hi + 1e-9));
    const int span = std::max(1, d1 - d0);
    const int step = (span + 9) / 10;  // at most ~10 labeled decades
    for (int d = d0; d <= d1; d += step) {
      ticks.push_back(std::pow(10.0, d));
    }
    return ticks;
  }
  const double range = axis.hi - axis.lo;
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  const double step =
      (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
  double t = std::ceil(axis.lo / step) * step;
  for (; t <= axis.hi + 1e-9 * range; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * range ? 0.0 : t);
  }
  return ticks;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b",
                                    "#17becf", "#e377c2"};
constexpr int kPaletteSize = 8;

struct Panel {
  double x0, y0, width, height;  // full panel cell including margins
  double left = 72.0, right = 18.0, top = 34.0, bottom = 46.0;

  double plot_x0() const { return x0 + left; }
  double plot_x1() const { return x0 + width - right; }
  double plot_y0() const { return y0 + top; }
  double plot_y1() const { return y0 + height - bottom; }
};

class Svg {
 public:
  Svg(double width, double height) : width_(width), height_(height) {}

  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke, double stroke_width = 1.0,
            bool dashed = false) {
    body_ << "<line x1=\"" << fmt_px(x1) << "\" y1=\"" << fmt_px(y1)
          << "\" x2=\"" << fmt_px(x2) << "\" y2=\"" << fmt_px(y2)
          << "\" stroke=\"" << stroke << "\" stroke-width=\""
          << fmt_px(stroke_width) << "\"";
    if (dashed) body_ << " stroke-dasharray=\"5,4\"";
    body_ << "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const std::string& stroke) {
    if (pts.size() < 2) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke
          << "\" stroke-width=\"1.6\" points=\"";
    for (const auto& [x, y] : pts) {
      body_ << fmt_px(x) << ',' << fmt_px(y) << ' ';
    }
    body_ << "\"/>\n";
  }

  void polygon(const std::vector<std::pair<double, double>>& pts,
               const std::string& fill, double opacity) {
    if (pts.size() < 3) return;
    body_ << "<polygon fill=\"" << fill << "\" fill-opacity=\""
          << fmt_px(opacity) << "\" stroke=\"none\" points=\"";
    for (const auto& [x, y] : pts) {
      body_ << fmt_px(x) << ',' << fmt_px(y) << ' ';
    }
    body_ << "\"/>\n";
  }

  void circle(double cx, double cy, double radius, const std::string& fill) {
    body_ << "<circle cx=\"" << fmt_px(cx) << "\" cy=\"" << fmt_px(cy)
          << "\" r=\"" << fmt_px(radius) << "\" fill=\"" << fill
          << "\" fill-opacity=\"0.75\"/>\n";
  }

  void text(double x, double y, const std::string& content,
            const std::string& anchor = "start", double size = 11.0,
            const std::string& fill = "#333333") {
    body_ << "<text x=\"" << fmt_px(x) << "\" y=\"" << fmt_px(y)
          << "\" font-size=\"" << fmt_px(size) << "\" text-anchor=\""
          << anchor << "\" fill=\"" << fill << "\">" << content
          << "</text>\n";
  }

  std::string finish() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << fmt_px(width_) << "\" height=\"" << fmt_px(height_)
        << "\" viewBox=\"0 0 " << fmt_px(width_) << ' ' << fmt_px(height_)
        << "\" font-family=\"monospace\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double width_;
  double height_;
  std::ostringstream body_;
};

void draw_frame(Svg& svg, const Panel& panel, const Axis& x, const Axis& y,
                const std::string& title, const std::string& x_label,
                const std::string& y_label) {
  svg.line(panel.plot_x0(), panel.plot_y1(), panel.plot_x1(), panel.plot_y1(),
           "#333333");
  svg.line(panel.plot_x0(), panel.plot_y0(), panel.plot_x0(), panel.plot_y1(),
           "#333333");
  for (const double t : axis_ticks(x)) {
    const double px = x.map(t);
    svg.line(px, panel.plot_y1(), px, panel.plot_y1() + 4.0, "#333333");
    svg.line(px, panel.plot_y0(), px, panel.plot_y1(), "#e0e0e0", 0.6);
    svg.text(px, panel.plot_y1() + 16.0, fmt_label(t), "middle", 10.0);
  }
  for (const double t : axis_ticks(y)) {
    const double py = y.map(t);
    svg.line(panel.plot_x0() - 4.0, py, panel.plot_x0(), py, "#333333");
    svg.line(panel.plot_x0(), py, panel.plot_x1(), py, "#e0e0e0", 0.6);
    svg.text(panel.plot_x0() - 7.0, py + 3.5, fmt_label(t), "end", 10.0);
  }
  svg.text(panel.x0 + panel.width / 2.0, panel.y0 + 16.0, title, "middle",
           12.5, "#111111");
  svg.text(panel.x0 + panel.width / 2.0, panel.plot_y1() + 34.0, x_label,
           "middle", 11.0);
  svg.text(panel.x0 + 14.0, panel.plot_y0() - 6.0, y_label, "start", 11.0);
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;        // data space
  std::vector<double> band_half_width;                  // optional, y units
};

// Collects rows into one series per distinct value of the group column,
// preserving encounter order (writers emit rows sorted by group already).
std::vector<Series> group_rows(const CsvTable& table, std::size_t group_col,
                               std::size_t x_col, std::size_t y_col,
                               const char* group_name) {
  std::vector<double> keys;
  std::vector<Series> series;
  for (const auto& row : table.rows) {
    const double key = row[group_col];
    std::size_t si = 0;
    for (; si < keys.size(); ++si) {
      if (keys[si] == key ||
          (std::isnan(keys[si]) && std::isnan(key))) {
        break;
      }
    }
    if (si == keys.size()) {
      keys.push_back(key);
      series.push_back(
          {std::string(group_name) + "=" + fmt_label(key), {}, {}});
    }
    series[si].points.emplace_back(row[x_col], row[y_col]);
  }
  return series;
}

void draw_series(Svg& svg, const Axis& x, const Axis& y,
                 const std::vector<Series>& series, bool with_markers) {
  for (std::size_t si = 0; si < series.size(); ++si) {
    const std::string color = kPalette[si % kPaletteSize];
    // Std bands first so lines stay visible on top of them.
    if (!series[si].band_half_width.empty()) {
      std::vector<std::pair<double, double>> band;
      std::vector<std::pair<double, double>> lower;
      for (std::size_t i = 0; i < series[si].points.size(); ++i) {
        const auto& [px, py] = series[si].points[i];
        const double half = series[si].band_half_width[i];
        const double up = py + half;
        const double dn = py - half;
        if (!x.drawable(px) || !y.drawable(up) || !y.drawable(dn)) continue;
        band.emplace_back(x.map(px), y.map(up));
        lower.emplace_back(x.map(px), y.map(dn));
      }
      for (auto it = lower.rbegin(); it != lower.rend(); ++it) {
        band.push_back(*it);
      }
      svg.polygon(band, color, 0.15);
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& [px, py] : series[si].points) {
      if (!x.drawable(px) || !y.drawable(py)) continue;
      pts.emplace_back(x.map(px), y.map(py));
    }
    svg.polyline(pts, color);
    if (with_markers || pts.size() == 1) {
      for (const auto& [px, py] : pts) svg.circle(px, py, 2.4, color);
    }
  }
}

void draw_legend(Svg& svg, const Panel& panel,
                 const std::vector<Series>& series) {
  double ly = panel.plot_y0() + 12.0;
  const double lx = panel.plot_x1() - 150.0;
  for (std::size_t si = 0; si < series.size(); ++si) {
    const std::string color = kPalette[si % kPaletteSize];
    svg.line(lx, ly - 3.5, lx + 18.0, ly - 3.5, color, 2.0);
    svg.text(lx + 24.0, ly, series[si].label, "start", 10.5);
    ly += 15.0;
  }
}

std::vector<double> column_values(const CsvTable& table, std::size_t col,
                                  std::size_t flag_col) {
  std::vector<double> values;
  for (const auto& row : table.rows) {
    if (row[flag_col] != 0.0) continue;
    values.push_back(row[col]);
  }
  return values;
}

std::string sweep_x_label(const std::string& experiment) {
  if (experiment == "sigma_a") return "exploration covariance scale";
  if (experiment == "b_mag") return "input magnitude";
  if (experiment == "rho") return "closed-loop spectral radius (target)";
  return "sweep value";
}

void render_sweep(const CsvTable& table, Svg& svg, const PlotOptions& opts) {
  const std::size_t x_col = column_index(table, "sweep_value");
  const std::size_t scale_col = column_index(table, "scale");
  const std::size_t nu_col = column_index(table, "empirical_nu_mean");
  const std::size_t bound_col = column_index(table, "bound_mean");
  const std::size_t flag_col = column_index(table, "flagged");
  const bool log_x = table.experiment != "rho";

  CsvTable clean = table;  // flagged rows carry NaNs; drop them up front
  clean.rows.erase(std::remove_if(clean.rows.begin(), clean.rows.end(),
                                  [&](const std::vector<double>& row) {
                                    return row[flag_col] != 0.0;
                                  }),
                   clean.rows.end());
  if (clean.rows.empty()) {
    throw std::runtime_error(
        "render_plots: every sweep row is flagged; nothing to draw");
  }

  const Panel top{0.0, 0.0, 760.0, 470.0};
  const Panel bottom{0.0, 470.0, 760.0, 470.0};
  const std::vector<double> xs = column_values(clean, x_col, flag_col);

  const Axis x_top = fit_axis(xs, log_x, top.plot_x0(), top.plot_x1());
  const Axis y_top = fit_axis(column_values(clean, nu_col, flag_col),
                              opts.log_y, top.plot_y1(), top.plot_y0());
  auto nu_series = group_rows(clean, scale_col, x_col, nu_col, "scale");
  draw_frame(svg, top, x_top, y_top, "measured estimator variance",
             sweep_x_label(table.experiment), "sum of estimator variances");
  draw_series(svg, x_top, y_top, nu_series, true);
  draw_legend(svg, top, nu_series);

  const Axis x_bot = fit_axis(xs, log_x, bottom.plot_x0(), bottom.plot_x1());
  const Axis y_bot = fit_axis(column_values(clean, bound_col, flag_col),
                              opts.log_y, bottom.plot_y1(), bottom.plot_y0());
  auto bound_series = group_rows(clean, scale_col, x_col, bound_col, "scale");
  draw_frame(svg, bottom, x_bot, y_bot, "analytic variance bound",
             sweep_x_label(table.experiment), "bound value");
  draw_series(svg, x_bot, y_bot, bound_series, true);
  draw_legend(svg, bottom, bound_series);
}

void render_scatter(const CsvTable& table, Svg& svg, const PlotOptions& opts) {
  const std::size_t n_col = column_index(table, "n");
  const std::size_t sm_col =
      column_index(table, "empirical_second_moment_mean");
  const std::size_t bound_col = column_index(table, "bound_mean");
  const std::size_t flag_col = column_index(table, "flagged");

  CsvTable clean = table;
  clean.rows.erase(std::remove_if(clean.rows.begin(), clean.rows.end(),
                                  [&](const std::vector<double>& row) {
                                    return row[flag_col] != 0.0;
                                  }),
                   clean.rows.end());
  if (clean.rows.empty()) {
    throw std::runtime_error(
        "render_plots: every scatter row is flagged; nothing to draw");
  }

  const Panel panel{0.0, 0.0, 760.0, 560.0};
  const Axis x = fit_axis(column_values(clean, bound_col, flag_col),
                          opts.log_y, panel.plot_x0(), panel.plot_x1());
  const Axis y = fit_axis(column_values(clean, sm_col, flag_col), opts.log_y,
                          panel.plot_y1(), panel.plot_y0());
  draw_frame(svg, panel, x, y, "bound versus measured second moment",
             "analytic bound", "measured second moment");

  // Identity line over the overlap of both ranges.
  const double lo = std::max(x.log ? std::pow(10.0, x.lo) : x.lo,
                             y.log ? std::pow(10.0, y.lo) : y.lo);
  const double hi = std::min(x.log ? std::pow(10.0, x.hi) : x.hi,
                             y.log ? std::pow(10.0, y.hi) : y.hi);
  if (lo < hi && x.drawable(lo) && y.drawable(lo)) {
    svg.line(x.map(lo), y.map(lo), x.map(hi), y.map(hi), "#555555", 1.0,
             true);
    svg.text(x.map(hi), y.map(hi) - 6.0, "y = x", "end", 10.5, "#555555");
  }

  std::vector<Series> series =
      group_rows(clean, n_col, bound_col, sm_col, "n");
  for (std::size_t si = 0; si < series.size(); ++si) {
    const std::string color = kPalette[si % kPaletteSize];
    for (const auto& [px, py] : series[si].points) {
      if (!x.drawable(px) || !y.drawable(py)) continue;
      svg.circle(x.map(px), y.map(py), 3.0, color);
    }
  }
  draw_legend(svg, panel, series);
}

void render_curves(const CsvTable& table, Svg& svg) {
  const std::size_t sa_col = column_index(table, "sigma_a_scale");
  const std::size_t ss_col = column_index(table, "sigma_s_scale");
  const std::size_t it_col = column_index(table, "iteration");
  const std::size_t mean_col = column_index(table, "eval_return_mean");
  const std::size_t std_col = column_index(table, "eval_return_std");

  if (table.rows.empty()) {
    throw std::runtime_error("render_plots: curves CSV has no rows");
  }
  const Panel panel{0.0, 0.0, 760.0, 560.0};
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& row : table.rows) {
    xs.push_back(row[it_col]);
    ys.push_back(row[mean_col] + row[std_col]);
    ys.push_back(row[mean_col] - row[std_col]);
  }
  const Axis x = fit_axis(xs, false, panel.plot_x0(), panel.plot_x1());
  const Axis y = fit_axis(ys, false, panel.plot_y1(), panel.plot_y0());
  draw_frame(svg, panel, x, y, "learning curves (mean +- std over runs)",
             "iteration", "mean evaluation return");

  // One series per (sigma_a, sigma_s) cell, keyed on both columns.
  std::vector<std::pair<double, double>> keys;
  std::vector<Series> series;
  for (const auto& row : table.rows) {
    const std::pair<double, double> key{row[sa_col], row[ss_col]};
    std::size_t si = 0;
    for (; si < keys.size(); ++si) {
      if (keys[si] == key) break;
    }
    if (si == keys.size()) {
      keys.push_back(key);
      series.push_back({"sa=" + fmt_label(key.first) +
                            " ss=" + fmt_label(key.second),
                        {},
                        {}});
    }
    series[si].points.emplace_back(row[it_col], row[mean_col]);
    series[si].band_half_width.push_back(row[std_col]);
  }
  draw_series(svg, x, y, series, false);
  draw_legend(svg, panel, series);
}

}  // namespace

void render_plots(const std::string& csv_path, const std::string& svg_path,
                  const PlotOptions& opts) {
  const CsvTable table = read_lab_csv(csv_path);
  Svg svg(760.0, table.kind == "sweep" ? 940.0 : 560.0);
  if (table.kind == "sweep") {
    render_sweep(table, svg, opts);
  } else if (table.kind == "scatter") {
    render_scatter(table, svg, opts);
  } else if (table.kind == "curves") {
    render_curves(table, svg);
  } else {
    throw std::runtime_error("render_plots: unsupported CSV kind '" +
                             table.kind + "'");
  }

  const std::string content = svg.finish();
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("render_plots: cannot open '" + svg_path +
                             "' for writing");
  }
  out << content;
  if (!out.good()) {
    throw std::runtime_error("render_plots: write to '" + svg_path +
                             "' failed");
  }
}

}  // namespace lqrlab
