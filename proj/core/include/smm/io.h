#ifndef SMM_IO_H_
#define SMM_IO_H_

#include <span>
#include <string>
#include <vector>

#include "smm/fictitious_play.h"
#include "smm/gridworld.h"
#include "smm/marginal.h"

namespace smm {

// Shortest round-trip decimal form ("%.17g"), so reruns are byte-identical.
std::string FormatDouble(double x);

// Minimal CSV builder: one header row, then rows of cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void AddRow(std::vector<std::string> cells);
  std::string ToString() const;
  void Write(const std::string& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// state_index,probability
CsvTable MarginalCsv(const StateMarginal& m);

// iteration,entropy_ha[nats],kl_to_target[nats],objective_value[nats],
// mass_left,mass_right
CsvTable MetricsCsv(const std::vector<IterationMetrics>& metrics);
std::vector<std::string> MetricsHeader();
std::vector<std::string> MetricsCells(const IterationMetrics& m);

struct HeatmapOptions {
  int cell_px = 24;
  double log_floor = -13.815510557964274;  // log(1e-6)
  std::string title;
};

// One rect per layout cell colored by log-probability, plus a legend.
std::string RenderHeatmapSvg(const StateMarginal& marginal,
                             std::span<const Cell> layout,
                             const HeatmapOptions& options = {});
void EmitHeatmap(const StateMarginal& marginal, std::span<const Cell> layout,
                 const std::string& path, const HeatmapOptions& options = {});

void WriteTextFile(const std::string& path, const std::string& contents);
std::string ReadTextFile(const std::string& path);

}  // namespace smm

#endif  // SMM_IO_H_
