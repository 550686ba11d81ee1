#pragma once

#include <array>
#include <string>
#include <vector>

#include "shamopt/errors.hpp"

namespace shamopt {

/// One recorded point of an optimization run. The X-dependent metrics
/// (f_value, gradient norms, dist_to_opt) are taken at the pre-update
/// iterate X_k; the remaining diagnostics come from step k's update.
/// Fields a problem cannot supply (no value(), no known optimum) are NaN.
struct TraceRecord {
  long long k = 0;
  double f_value = 0.0;
  double grad_fro = 0.0;
  double grad_nuclear = 0.0;
  double run_avg_grad_fro = 0.0;
  double run_avg_grad_nuclear = 0.0;
  double dist_to_opt = 0.0;
  double update_op_norm = 0.0;
  double x_op_norm = 0.0;
  double trace_l_sqrt = 0.0;
  double trace_r_sqrt = 0.0;
};

inline const char* trace_csv_header() {
  return "k,f_value,grad_fro,grad_nuclear,run_avg_grad_fro,"
         "run_avg_grad_nuclear,dist_to_opt,update_op_norm,x_op_norm,"
         "trace_l_sqrt,trace_r_sqrt";
}

/// Fixed header, 17-significant-digit decimals.
void write_trace_csv(const std::vector<TraceRecord>& records,
                     const std::string& path);

std::vector<TraceRecord> read_trace_csv(const std::string& path);

struct PlotSeries {
  std::string label;
  std::vector<std::array<double, 2>> points;  // (x, y)
};

struct PlotStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = true;
};

void emit_plot_svg(const std::vector<PlotSeries>& series,
                   const PlotStyle& style, const std::string& path);

}  // namespace shamopt
