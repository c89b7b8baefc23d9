#pragma once

#include <string>

namespace lqrlab {

struct PlotOptions {
  // Log-scale value axes where the data allows it (positive values only).
  // Learning curves always use a linear value axis (returns are negative).
  bool log_y = true;
};

// Renders the figures for one experiment CSV (written by the CSV writers in
// experiments.hpp) into a single self-contained SVG file:
//   - sweep CSVs: two stacked panels, measured estimator variance on top and
//     the analytic bound below, one polyline per noise-scale family;
//   - scatter CSVs: log-log bound-versus-measurement scatter with the
//     identity line;
//   - curves CSVs: mean evaluation return per iteration with a +-1 std band,
//     one series per noise setting.
// Flagged rows and values that cannot be drawn on the chosen axes are
// skipped. The SVG bytes are a pure function of the CSV contents and the
// options. Throws std::runtime_error on malformed CSV input or when nothing
// is drawable.
void render_plots(const std::string& csv_path, const std::string& svg_path,
                  const PlotOptions& opts = {});

}  // namespace lqrlab
