#ifndef SMM_GRIDWORLD_H_
#define SMM_GRIDWORLD_H_

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smm/mdp.h"

namespace smm {

// x grows to the right, y grows downward (ASCII row order).
struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

enum Action : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr std::size_t kNumGridActions = 4;

struct GridworldSpec {
  std::vector<Cell> cells;
  double slip_success_prob = 0.1;
  std::optional<Cell> noisy_tv_cell;
  std::optional<double> noisy_tv_xi;
  // Episodes start here; uniform over cells when unset.
  std::optional<Cell> start_cell;
  int horizon = 30;

  double xi() const { return noisy_tv_xi.value_or(0.0); }
};

struct Gridworld {
  GridworldSpec spec;
  std::vector<Cell> cells;  // state index -> cell, row-major order
  TabularMDP mdp;
  std::optional<std::size_t> tv_state;
  std::optional<std::size_t> start_state;

  std::optional<std::size_t> StateOf(Cell c) const;
  // Grid coordinates as doubles, two per state.
  std::vector<double> Coordinates() const;
};

// Validates the spec and builds the tensor. Throws on a disconnected layout,
// a TV cell outside the layout, or xi without a TV cell.
Gridworld BuildCrossGridworld(const GridworldSpec& spec);

// Star layout: hub plus up to four straight arms (up, right, down, left).
Gridworld BuildRadialHallGridworld(int num_halls, int hall_length,
                                   double slip_success_prob, int horizon);

// Plus-shaped layout: a horizontal hallway with arms of horizontal_arm cells
// crossing a vertical one with arms of vertical_arm cells. TV cell and start
// at the intersection.
GridworldSpec CrossSpec(int horizontal_arm, int vertical_arm,
                        double slip_success_prob, std::optional<double> xi,
                        int horizon);
inline GridworldSpec CrossSpec(int arm_length, double slip_success_prob,
                               std::optional<double> xi, int horizon) {
  return CrossSpec(arm_length, arm_length, slip_success_prob, xi, horizon);
}

// -1 for cells left of pivot_x, +1 right of it, 0 on the pivot column.
std::vector<int> LeftRightSides(const Gridworld& world, int pivot_x);
// Pivot defaults to the TV cell, then the start cell, then the layout's
// middle column.
std::vector<int> LeftRightSides(const Gridworld& world);

// Plain-text config: "key = value" lines, comments starting with "//" or ";"
// ('#' is a wall), and a "layout:" line followed by ASCII rows. Characters:
// '#' wall, '.' passable, 'T' TV cell, 'S' start, 'B' start and TV.
struct ConfigText {
  std::map<std::string, std::string> values;
  std::vector<std::string> layout;
};

ConfigText ParseConfigText(const std::string& text);
GridworldSpec GridworldSpecFromConfig(const ConfigText& config);
GridworldSpec ParseGridworldSpec(const std::string& text);
std::string SerializeGridworldSpec(const GridworldSpec& spec);
std::vector<std::string> LayoutRows(const GridworldSpec& spec);

}  // namespace smm

#endif  // SMM_GRIDWORLD_H_
