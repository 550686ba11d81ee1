#include "shamopt/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace shamopt {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_field(const std::string& s, const std::string& path) {
  if (s == "nan" || s == "-nan") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(path + ": bad numeric field '" + s + "'");
  }
}

}  // namespace

void write_trace_csv(const std::vector<TraceRecord>& records,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << trace_csv_header() << '\n';
  for (const auto& r : records) {
    out << r.k << ',' << fmt17(r.f_value) << ',' << fmt17(r.grad_fro) << ','
        << fmt17(r.grad_nuclear) << ',' << fmt17(r.run_avg_grad_fro) << ','
        << fmt17(r.run_avg_grad_nuclear) << ',' << fmt17(r.dist_to_opt) << ','
        << fmt17(r.update_op_norm) << ',' << fmt17(r.x_op_norm) << ','
        << fmt17(r.trace_l_sqrt) << ',' << fmt17(r.trace_r_sqrt) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  if (line != trace_csv_header()) {
    throw IoError(path + ": unexpected header '" + line + "'");
  }
  std::vector<TraceRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 11) {
      throw IoError(path + ": expected 11 fields, got " +
                    std::to_string(fields.size()));
    }
    TraceRecord r;
    r.k = static_cast<long long>(parse_field(fields[0], path));
    r.f_value = parse_field(fields[1], path);
    r.grad_fro = parse_field(fields[2], path);
    r.grad_nuclear = parse_field(fields[3], path);
    r.run_avg_grad_fro = parse_field(fields[4], path);
    r.run_avg_grad_nuclear = parse_field(fields[5], path);
    r.dist_to_opt = parse_field(fields[6], path);
    r.update_op_norm = parse_field(fields[7], path);
    r.x_op_norm = parse_field(fields[8], path);
    r.trace_l_sqrt = parse_field(fields[9], path);
    r.trace_r_sqrt = parse_field(fields[10], path);
    records.push_back(r);
  }
  return records;
}

namespace {

constexpr int kWidth = 760;
constexpr int kHeight = 520;
constexpr int kLeft = 72, kRight = 24, kTop = 40, kBottom = 56;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt_tick(double v) {
  char buf[32];
  const double a = std::abs(v);
  if (v != 0.0 && (a >= 1e4 || a < 1e-3)) {
    std::snprintf(buf, sizeof(buf), "%.1e", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%g", v);
  }
  return buf;
}

}  // namespace

void emit_plot_svg(const std::vector<PlotSeries>& series,
                   const PlotStyle& style, const std::string& path) {
  // Collect plottable points (log axes drop non-positive coordinates).
  constexpr double inf = std::numeric_limits<double>::infinity();
  double xmin = inf, xmax = -inf, ymin = inf, ymax = -inf;
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!style.log_x || x > 0.0) &&
           (!style.log_y || y > 0.0);
  };
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      if (!usable(p[0], p[1])) continue;
      xmin = std::min(xmin, p[0]);
      xmax = std::max(xmax, p[0]);
      ymin = std::min(ymin, p[1]);
      ymax = std::max(ymax, p[1]);
    }
  }
  if (!(xmin <= xmax)) {
    // Nothing plottable; keep a valid frame.
    xmin = style.log_x ? 1.0 : 0.0;
    xmax = style.log_x ? 10.0 : 1.0;
    ymin = style.log_y ? 1.0 : 0.0;
    ymax = style.log_y ? 10.0 : 1.0;
  }
  auto tx = [&](double v) { return style.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return style.log_y ? std::log10(v) : v; };
  double x0 = tx(xmin), x1 = tx(xmax), y0 = ty(ymin), y1 = ty(ymax);
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) {
    return kTop + ph - (ty(v) - y0) / (y1 - y0) * ph;
  };

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << esc(style.title) << "</text>\n";

  // Axis ticks: decades for log axes, 5 even splits otherwise.
  auto emit_ticks = [&](bool horizontal) {
    const bool log_axis = horizontal ? style.log_x : style.log_y;
    const double lo = horizontal ? x0 : y0;
    const double hi = horizontal ? x1 : y1;
    std::vector<double> ticks;  // in data units
    if (log_axis) {
      for (int e = static_cast<int>(std::floor(lo));
           e <= static_cast<int>(std::ceil(hi)); ++e) {
        const double v = std::pow(10.0, e);
        if (std::log10(v) >= lo - 1e-9 && std::log10(v) <= hi + 1e-9) {
          ticks.push_back(v);
        }
      }
      if (ticks.size() > 12) {
        std::vector<double> thin;
        for (std::size_t i = 0; i < ticks.size(); i += (ticks.size() / 8 + 1))
          thin.push_back(ticks[i]);
        ticks = thin;
      }
    } else {
      for (int i = 0; i <= 5; ++i) ticks.push_back(lo + (hi - lo) * i / 5.0);
    }
    for (double v : ticks) {
      if (horizontal) {
        const double x = log_axis ? px(v) : kLeft + (v - lo) / (hi - lo) * pw;
        out << "<line x1=\"" << x << "\" y1=\"" << kTop + ph << "\" x2=\"" << x
            << "\" y2=\"" << kTop + ph + 5
            << "\" stroke=\"black\"/>\n<text x=\"" << x << "\" y=\""
            << kTop + ph + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">"
            << fmt_tick(v) << "</text>\n";
      } else {
        const double y =
            log_axis ? py(v) : kTop + ph - (v - lo) / (hi - lo) * ph;
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << y << "\" x2=\""
            << kLeft << "\" y2=\"" << y << "\" stroke=\"black\"/>\n<text x=\""
            << kLeft - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"11\">"
            << fmt_tick(v) << "</text>\n";
      }
    }
  };
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  emit_ticks(true);
  emit_ticks(false);
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << esc(style.x_label) << "</text>\n"
      << "<text x=\"18\" y=\"" << kTop + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 "
      << kTop + ph / 2 << ")\">" << esc(style.y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& p : series[si].points) {
      if (!usable(p[0], p[1])) continue;
      out << px(p[0]) << ',' << py(p[1]) << ' ';
    }
    out << "\"/>\n";
    // Legend entry.
    const double ly = kTop + 12 + 16 * static_cast<double>(si);
    out << "<line x1=\"" << kLeft + pw - 150 << "\" y1=\"" << ly << "\" x2=\""
        << kLeft + pw - 126 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n<text x=\"" << kLeft + pw - 120
        << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << esc(series[si].label) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace shamopt
