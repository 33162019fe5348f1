#include "smm/io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "smm/error.h"

namespace smm {
namespace {

// Endpoints of the color ramp, light to dark.
constexpr int kLow[3] = {247, 251, 255};
constexpr int kHigh[3] = {8, 48, 107};

std::string RampColor(double t) {
  t = std::clamp(t, 0.0, 1.0);
  char buf[8];
  int rgb[3];
  for (int i = 0; i < 3; ++i) {
    rgb[i] = static_cast<int>(std::lround(kLow[i] + t * (kHigh[i] - kLow[i])));
  }
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

std::string Fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
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

}  // namespace

std::string FormatDouble(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header)
    : header_(std::move(header)) {}

void CsvTable::AddRow(std::vector<std::string> cells) {
  Require(cells.size() == header_.size(), ErrorCode::kDimensionMismatch,
          "CSV row width differs from the header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::ToString() const {
  std::string out;
  auto append = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  append(header_);
  for (const auto& row : rows_) append(row);
  return out;
}

void CsvTable::Write(const std::string& path) const {
  WriteTextFile(path, ToString());
}

CsvTable MarginalCsv(const StateMarginal& m) {
  CsvTable table({"state_index", "probability"});
  for (std::size_t s = 0; s < m.size(); ++s) {
    table.AddRow({std::to_string(s), FormatDouble(m[s])});
  }
  return table;
}

std::vector<std::string> MetricsHeader() {
  return {"iteration",          "entropy_ha[nats]", "kl_to_target[nats]",
          "objective_value[nats]", "mass_left",     "mass_right"};
}

std::vector<std::string> MetricsCells(const IterationMetrics& m) {
  return {std::to_string(m.iteration), FormatDouble(m.entropy_ha),
          FormatDouble(m.kl_to_target), FormatDouble(m.objective_value),
          FormatDouble(m.mass_left),   FormatDouble(m.mass_right)};
}

CsvTable MetricsCsv(const std::vector<IterationMetrics>& metrics) {
  CsvTable table(MetricsHeader());
  for (const auto& m : metrics) table.AddRow(MetricsCells(m));
  return table;
}

std::string RenderHeatmapSvg(const StateMarginal& marginal,
                             std::span<const Cell> layout,
                             const HeatmapOptions& options) {
  Require(marginal.size() == layout.size(), ErrorCode::kDimensionMismatch,
          "marginal does not match the layout");
  Require(options.cell_px > 0, ErrorCode::kInvalidArgument,
          "cell size must be positive");
  int min_x = layout[0].x, max_x = min_x, min_y = layout[0].y, max_y = min_y;
  for (const Cell& c : layout) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  double top = 0.0;
  for (double p : marginal.probs()) top = std::max(top, p);
  const double lo = options.log_floor;
  const double hi = std::max(std::log(top), lo);
  const double span = hi - lo;
  auto shade = [&](double p) {
    if (span <= 0.0) return 1.0;
    const double lp = p > 0.0 ? std::max(std::log(p), lo) : lo;
    return (lp - lo) / span;
  };

  const int px = options.cell_px;
  const int grid_w = (max_x - min_x + 1) * px;
  const int grid_h = (max_y - min_y + 1) * px;
  const int margin = 10;
  const int title_h = options.title.empty() ? 0 : 20;
  const int legend_w = 90;
  const int width = margin * 3 + grid_w + legend_w;
  const int height = std::max(grid_h, 120) + margin * 2 + title_h;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"#ffffff\"/>\n";
  if (!options.title.empty()) {
    svg << "<text x=\"" << margin << "\" y=\"" << margin + 12
        << "\" font-family=\"monospace\" font-size=\"12\">"
        << Escape(options.title) << "</text>\n";
  }
  const int gx = margin, gy = margin + title_h;
  svg << "<rect x=\"" << gx << "\" y=\"" << gy << "\" width=\"" << grid_w
      << "\" height=\"" << grid_h << "\" fill=\"#404040\"/>\n";
  for (std::size_t s = 0; s < layout.size(); ++s) {
    const int x = gx + (layout[s].x - min_x) * px;
    const int y = gy + (layout[s].y - min_y) * px;
    svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << px
        << "\" height=\"" << px << "\" fill=\"" << RampColor(shade(marginal[s]))
        << "\"><title>state " << s << ": " << FormatDouble(marginal[s])
        << "</title></rect>\n";
  }

  // Legend: vertical ramp, top = hi.
  const int lx = gx + grid_w + margin;
  const int steps = 10;
  const int bar_h = 100;
  for (int i = 0; i < steps; ++i) {
    const double t = 1.0 - (i + 0.5) / steps;
    svg << "<rect x=\"" << lx << "\" y=\"" << gy + i * bar_h / steps
        << "\" width=\"12\" height=\"" << bar_h / steps << "\" fill=\""
        << RampColor(t) << "\"/>\n";
  }
  svg << "<text x=\"" << lx + 16 << "\" y=\"" << gy + 8
      << "\" font-family=\"monospace\" font-size=\"10\">" << Fixed(hi, 2)
      << "</text>\n";
  svg << "<text x=\"" << lx + 16 << "\" y=\"" << gy + bar_h
      << "\" font-family=\"monospace\" font-size=\"10\">" << Fixed(lo, 2)
      << "</text>\n";
  svg << "<text x=\"" << lx << "\" y=\"" << gy + bar_h + 14
      << "\" font-family=\"monospace\" font-size=\"10\">log p (nats)</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void EmitHeatmap(const StateMarginal& marginal, std::span<const Cell> layout,
                 const std::string& path, const HeatmapOptions& options) {
  WriteTextFile(path, RenderHeatmapSvg(marginal, layout, options));
}

void WriteTextFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(out.good(), ErrorCode::kIo, "cannot open " + path + " for writing");
  out << contents;
  out.close();
  Require(!out.fail(), ErrorCode::kIo, "failed writing " + path);
}

std::string ReadTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace smm
