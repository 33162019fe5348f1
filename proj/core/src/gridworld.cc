#include "smm/gridworld.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <set>
#include <sstream>

#include "smm/error.h"

namespace smm {
namespace {

constexpr int kDx[kNumGridActions] = {0, 0, -1, 1};
constexpr int kDy[kNumGridActions] = {-1, 1, 0, 0};

bool RowMajorLess(const Cell& a, const Cell& b) {
  return a.y != b.y ? a.y < b.y : a.x < b.x;
}

void CheckConnected(const std::vector<Cell>& cells) {
  std::set<Cell> all(cells.begin(), cells.end());
  std::set<Cell> seen{cells.front()};
  std::queue<Cell> frontier;
  frontier.push(cells.front());
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop();
    for (std::size_t m = 0; m < kNumGridActions; ++m) {
      const Cell n{c.x + kDx[m], c.y + kDy[m]};
      if (all.count(n) && seen.insert(n).second) frontier.push(n);
    }
  }
  Require(seen.size() == all.size(), ErrorCode::kInvalidArgument,
          "layout is disconnected");
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ParseDouble(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  Require(used == value.size() && used > 0, ErrorCode::kConfig,
          "key '" + key + "' expects a number, got '" + value + "'");
  return v;
}

}  // namespace

std::optional<std::size_t> Gridworld::StateOf(Cell c) const {
  auto it = std::lower_bound(cells.begin(), cells.end(), c, RowMajorLess);
  if (it == cells.end() || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - cells.begin());
}

std::vector<double> Gridworld::Coordinates() const {
  std::vector<double> coords;
  coords.reserve(2 * cells.size());
  for (const Cell& c : cells) {
    coords.push_back(c.x);
    coords.push_back(c.y);
  }
  return coords;
}

Gridworld BuildCrossGridworld(const GridworldSpec& spec) {
  Require(!spec.cells.empty(), ErrorCode::kInvalidArgument, "layout is empty");
  Require(spec.slip_success_prob >= 0.0 && spec.slip_success_prob <= 1.0,
          ErrorCode::kInvalidArgument, "slip_success_prob must be in [0,1]");
  Require(spec.horizon >= 1, ErrorCode::kInvalidArgument,
          "horizon must be >= 1");
  if (spec.noisy_tv_xi) {
    Require(spec.noisy_tv_cell.has_value(), ErrorCode::kInvalidArgument,
            "xi is set but the layout has no TV cell");
    Require(*spec.noisy_tv_xi >= 0.0 && *spec.noisy_tv_xi <= 1.0,
            ErrorCode::kInvalidArgument, "xi must be in [0,1]");
  }

  std::vector<Cell> cells = spec.cells;
  std::sort(cells.begin(), cells.end(), RowMajorLess);
  Require(std::adjacent_find(cells.begin(), cells.end()) == cells.end(),
          ErrorCode::kInvalidArgument, "layout lists a cell twice");
  CheckConnected(cells);

  const std::size_t S = cells.size();
  auto index_of = [&](Cell c) -> std::optional<std::size_t> {
    auto it = std::lower_bound(cells.begin(), cells.end(), c, RowMajorLess);
    if (it == cells.end() || *it != c) return std::nullopt;
    return static_cast<std::size_t>(it - cells.begin());
  };

  std::optional<std::size_t> tv_state;
  if (spec.noisy_tv_cell) {
    tv_state = index_of(*spec.noisy_tv_cell);
    Require(tv_state.has_value(), ErrorCode::kInvalidArgument,
            "TV cell is not in the layout");
  }
  std::optional<std::size_t> start_state;
  if (spec.start_cell) {
    start_state = index_of(*spec.start_cell);
    Require(start_state.has_value(), ErrorCode::kInvalidArgument,
            "start cell is not in the layout");
  }

  const double success = spec.slip_success_prob;
  const double random_mass = (1.0 - success) / kNumGridActions;
  const double xi = spec.xi();
  std::vector<double> P(S * kNumGridActions * S, 0.0);
  for (std::size_t s = 0; s < S; ++s) {
    const Cell c = cells[s];
    std::size_t moved[kNumGridActions];
    for (std::size_t m = 0; m < kNumGridActions; ++m) {
      moved[m] = index_of({c.x + kDx[m], c.y + kDy[m]}).value_or(s);
    }
    const bool is_tv = tv_state && *tv_state == s;
    for (std::size_t a = 0; a < kNumGridActions; ++a) {
      double* row = &P[(s * kNumGridActions + a) * S];
      const double ordinary = is_tv ? 1.0 - xi : 1.0;
      for (std::size_t m = 0; m < kNumGridActions; ++m) {
        const double p = (m == a ? success : 0.0) + random_mass;
        row[moved[m]] += ordinary * p;
      }
      if (is_tv && xi > 0.0) {
        std::vector<std::size_t> hood{s};
        for (std::size_t m = 0; m < kNumGridActions; ++m) {
          if (moved[m] != s) hood.push_back(moved[m]);
        }
        const double each = xi / static_cast<double>(hood.size());
        for (std::size_t n : hood) row[n] += each;
      }
    }
  }

  std::vector<double> p0(S, 0.0);
  if (start_state) {
    p0[*start_state] = 1.0;
  } else {
    std::fill(p0.begin(), p0.end(), 1.0 / static_cast<double>(S));
  }

  return Gridworld{spec, cells,
                   TabularMDP(S, kNumGridActions, std::move(P), std::move(p0),
                              spec.horizon),
                   tv_state, start_state};
}

Gridworld BuildRadialHallGridworld(int num_halls, int hall_length,
                                   double slip_success_prob, int horizon) {
  Require(num_halls >= 1 && num_halls <= 4, ErrorCode::kInvalidArgument,
          "a grid star supports 1 to 4 halls");
  Require(hall_length >= 1, ErrorCode::kInvalidArgument,
          "hall_length must be >= 1");
  // Hall directions in order: up, right, down, left.
  constexpr int kHallDx[4] = {0, 1, 0, -1};
  constexpr int kHallDy[4] = {-1, 0, 1, 0};
  GridworldSpec spec;
  const Cell hub{hall_length, hall_length};
  spec.cells.push_back(hub);
  for (int h = 0; h < num_halls; ++h) {
    for (int i = 1; i <= hall_length; ++i) {
      spec.cells.push_back({hub.x + i * kHallDx[h], hub.y + i * kHallDy[h]});
    }
  }
  spec.slip_success_prob = slip_success_prob;
  spec.start_cell = hub;
  spec.horizon = horizon;
  return BuildCrossGridworld(spec);
}

GridworldSpec CrossSpec(int horizontal_arm, int vertical_arm,
                        double slip_success_prob, std::optional<double> xi,
                        int horizon) {
  Require(horizontal_arm >= 0 && vertical_arm >= 0,
          ErrorCode::kInvalidArgument, "arm lengths must be >= 0");
  GridworldSpec spec;
  const Cell center{horizontal_arm, vertical_arm};
  for (int i = 0; i <= 2 * horizontal_arm; ++i) {
    spec.cells.push_back({i, vertical_arm});
  }
  for (int j = 0; j <= 2 * vertical_arm; ++j) {
    if (j != vertical_arm) spec.cells.push_back({horizontal_arm, j});
  }
  spec.slip_success_prob = slip_success_prob;
  spec.noisy_tv_cell = center;
  spec.noisy_tv_xi = xi;
  spec.start_cell = center;
  spec.horizon = horizon;
  return spec;
}

std::vector<int> LeftRightSides(const Gridworld& world, int pivot_x) {
  std::vector<int> sides;
  sides.reserve(world.cells.size());
  for (const Cell& c : world.cells) {
    sides.push_back(c.x < pivot_x ? -1 : (c.x > pivot_x ? 1 : 0));
  }
  return sides;
}

std::vector<int> LeftRightSides(const Gridworld& world) {
  if (world.tv_state) return LeftRightSides(world, world.cells[*world.tv_state].x);
  if (world.start_state) {
    return LeftRightSides(world, world.cells[*world.start_state].x);
  }
  int lo = world.cells.front().x, hi = lo;
  for (const Cell& c : world.cells) {
    lo = std::min(lo, c.x);
    hi = std::max(hi, c.x);
  }
  return LeftRightSides(world, (lo + hi) / 2);
}

ConfigText ParseConfigText(const std::string& text) {
  ConfigText config;
  std::istringstream in(text);
  std::string line;
  bool in_layout = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (in_layout) {
      if (!trimmed.empty() &&
          trimmed.find_first_not_of("#.TSB") == std::string::npos) {
        config.layout.push_back(trimmed);
        continue;
      }
      in_layout = false;
    }
    if (trimmed.empty() || trimmed.rfind("//", 0) == 0 || trimmed[0] == ';') {
      continue;
    }
    if (trimmed == "layout:") {
      Require(config.layout.empty(), ErrorCode::kConfig,
              "layout given twice (line " + std::to_string(line_no) + ")");
      in_layout = true;
      continue;
    }
    const auto eq = trimmed.find('=');
    Require(eq != std::string::npos, ErrorCode::kConfig,
            "expected 'key = value' on line " + std::to_string(line_no));
    const std::string key = Trim(trimmed.substr(0, eq));
    Require(!key.empty(), ErrorCode::kConfig,
            "empty key on line " + std::to_string(line_no));
    Require(!config.values.count(key), ErrorCode::kConfig,
            "duplicate key '" + key + "'");
    config.values[key] = Trim(trimmed.substr(eq + 1));
  }
  return config;
}

GridworldSpec GridworldSpecFromConfig(const ConfigText& config) {
  GridworldSpec spec;
  Require(!config.layout.empty(), ErrorCode::kConfig, "config has no layout");
  for (int y = 0; y < static_cast<int>(config.layout.size()); ++y) {
    const std::string& row = config.layout[y];
    for (int x = 0; x < static_cast<int>(row.size()); ++x) {
      const char ch = row[x];
      if (ch == '#') continue;
      spec.cells.push_back({x, y});
      if (ch == 'T' || ch == 'B') {
        Require(!spec.noisy_tv_cell, ErrorCode::kConfig,
                "layout has more than one TV cell");
        spec.noisy_tv_cell = Cell{x, y};
      }
      if (ch == 'S' || ch == 'B') {
        Require(!spec.start_cell, ErrorCode::kConfig,
                "layout has more than one start cell");
        spec.start_cell = Cell{x, y};
      }
    }
  }
  const auto& v = config.values;
  if (auto it = v.find("slip_success_prob"); it != v.end()) {
    spec.slip_success_prob = ParseDouble(it->first, it->second);
  }
  if (auto it = v.find("xi"); it != v.end()) {
    spec.noisy_tv_xi = ParseDouble(it->first, it->second);
  }
  if (auto it = v.find("horizon"); it != v.end()) {
    const double h = ParseDouble(it->first, it->second);
    Require(h >= 1 && h == std::floor(h), ErrorCode::kConfig,
            "horizon must be a positive integer");
    spec.horizon = static_cast<int>(h);
  }
  return spec;
}

GridworldSpec ParseGridworldSpec(const std::string& text) {
  return GridworldSpecFromConfig(ParseConfigText(text));
}

std::vector<std::string> LayoutRows(const GridworldSpec& spec) {
  Require(!spec.cells.empty(), ErrorCode::kInvalidArgument, "layout is empty");
  int max_x = 0, max_y = 0;
  for (const Cell& c : spec.cells) {
    Require(c.x >= 0 && c.y >= 0, ErrorCode::kInvalidArgument,
            "layout coordinates must be nonnegative to serialize");
    max_x = std::max(max_x, c.x);
    max_y = std::max(max_y, c.y);
  }
  std::vector<std::string> rows(max_y + 1, std::string(max_x + 1, '#'));
  for (const Cell& c : spec.cells) rows[c.y][c.x] = '.';
  if (spec.noisy_tv_cell) {
    rows[spec.noisy_tv_cell->y][spec.noisy_tv_cell->x] = 'T';
  }
  if (spec.start_cell) {
    char& ch = rows[spec.start_cell->y][spec.start_cell->x];
    ch = ch == 'T' ? 'B' : 'S';
  }
  return rows;
}

std::string SerializeGridworldSpec(const GridworldSpec& spec) {
  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", spec.slip_success_prob);
  out << "slip_success_prob = " << buf << "\n";
  if (spec.noisy_tv_xi) {
    std::snprintf(buf, sizeof(buf), "%.17g", *spec.noisy_tv_xi);
    out << "xi = " << buf << "\n";
  }
  out << "horizon = " << spec.horizon << "\n";
  out << "layout:\n";
  for (const auto& row : LayoutRows(spec)) out << row << "\n";
  return out.str();
}

}  // namespace smm
