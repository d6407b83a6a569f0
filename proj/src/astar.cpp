/*
 Copyright 2026 The cdplan Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "cdplan/astar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "cdplan/errors.hpp"

namespace cdplan {

Vec3 Grid::position(const GridIndex& i) const {
  return origin + Vec3(i.x * deltas.x(), i.y * deltas.y(), i.z * deltas.z());
}

bool Grid::contains(const GridIndex& i) const {
  return i.x >= 1 && i.x <= counts[0] && i.y >= 1 && i.y <= counts[1] && i.z >= 1 &&
         i.z <= counts[2];
}

std::size_t Grid::node_count() const {
  return static_cast<std::size_t>(counts[0]) * counts[1] * counts[2];
}

std::size_t Grid::flat(const GridIndex& i) const {
  return (static_cast<std::size_t>(i.z - 1) * counts[1] + (i.y - 1)) * counts[0] +
         (i.x - 1);
}

std::optional<GridIndex> Grid::lattice_index(const Vec3& p, double tol) const {
  std::array<int, 3> idx{};
  for (int a = 0; a < 3; ++a) {
    const double f = (p[a] - origin[a]) / deltas[a];
    const double r = std::round(f);
    if (std::abs(f - r) > tol) return std::nullopt;
    idx[a] = static_cast<int>(r);
  }
  return GridIndex{idx[0], idx[1], idx[2]};
}

void Grid::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (!(deltas[a] > 0.0) || !std::isfinite(deltas[a])) {
      throw PlanningError(ErrorCode::kSchemaError, "grid deltas must be positive");
    }
    if (counts[a] < 1) {
      throw PlanningError(ErrorCode::kSchemaError, "grid counts must be >= 1");
    }
  }
}

FreeSet::FreeSet(Grid grid, double r_max, ObstacleMesh mesh, ValidityOptions options)
    : grid_(std::move(grid)),
      r_max_(r_max),
      mesh_(std::move(mesh)),
      options_(options),
      memo_(grid_.node_count()) {}

bool FreeSet::contains(const GridIndex& i) const {
  if (!grid_.contains(i)) return false;
  auto& slot = memo_[grid_.flat(i)];
  const std::uint8_t cached = slot.load(std::memory_order_relaxed);
  if (cached != 0) return cached == 1;
  // Racing evaluations compute the same value, so a plain store is enough.
  const bool valid = is_valid_center(grid_.position(i), r_max_, mesh_, options_);
  slot.store(valid ? 1 : 2, std::memory_order_relaxed);
  return valid;
}

std::size_t FreeSet::evaluated() const {
  std::size_t n = 0;
  for (const auto& s : memo_) n += s.load(std::memory_order_relaxed) != 0;
  return n;
}

Passability FreeSet::passability() const {
  return [this](const GridIndex& i) { return contains(i); };
}

std::vector<GridIndex> neighbors(const GridIndex& node, const Grid& grid,
                                 const Passability& free) {
  std::vector<GridIndex> out;
  out.reserve(26);
  for (int hz = -1; hz <= 1; ++hz) {
    for (int hy = -1; hy <= 1; ++hy) {
      for (int hx = -1; hx <= 1; ++hx) {
        if (hx == 0 && hy == 0 && hz == 0) continue;
        const GridIndex n{node.x + hx, node.y + hy, node.z + hz};
        if (grid.contains(n) && free(n)) out.push_back(n);
      }
    }
  }
  return out;
}

namespace {

struct OpenEntry {
  double f;
  double h;
  GridIndex index;
  double g;
};

// Min-heap order on (f, h, index).
struct OpenAfter {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    return a.index > b.index;
  }
};

std::string describe(const GridIndex& i) {
  return "(" + std::to_string(i.x) + "," + std::to_string(i.y) + "," + std::to_string(i.z) +
         ")";
}

}  // namespace

PathResult astar(const GridIndex& start, const GridIndex& goal, const Grid& grid,
                 const Passability& free) {
  if (!grid.contains(start) || !free(start)) {
    throw PlanningError(ErrorCode::kInvalidEndpoint,
                        "start node " + describe(start) + " is not a valid center");
  }
  if (!grid.contains(goal) || !free(goal)) {
    throw PlanningError(ErrorCode::kInvalidEndpoint,
                        "goal node " + describe(goal) + " is not a valid center");
  }

  const Vec3 goal_pos = grid.position(goal);
  auto heuristic = [&](const GridIndex& i) { return (grid.position(i) - goal_pos).norm(); };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> g(grid.node_count(), kInf);
  std::vector<std::size_t> parent(grid.node_count(), std::numeric_limits<std::size_t>::max());
  std::vector<bool> closed(grid.node_count(), false);
  std::vector<GridIndex> index_of(grid.node_count());

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenAfter> open;
  const std::size_t s = grid.flat(start);
  g[s] = 0.0;
  index_of[s] = start;
  open.push({heuristic(start), heuristic(start), start, 0.0});

  bool reached = false;
  while (!open.empty()) {
    const OpenEntry best = open.top();
    open.pop();
    const std::size_t b = grid.flat(best.index);
    if (closed[b] || best.g > g[b]) continue;  // stale entry
    closed[b] = true;
    if (best.index == goal) {
      reached = true;
      break;
    }
    const Vec3 best_pos = grid.position(best.index);
    for (const GridIndex& n : neighbors(best.index, grid, free)) {
      const std::size_t k = grid.flat(n);
      if (closed[k]) continue;
      const double tentative = g[b] + (grid.position(n) - best_pos).norm();
      if (tentative < g[k]) {
        g[k] = tentative;
        parent[k] = b;
        index_of[k] = n;
        const double h = heuristic(n);
        open.push({tentative + h, h, n, tentative});
      }
    }
  }
  if (!reached) {
    throw PlanningError(ErrorCode::kNoPath,
                        "open set exhausted before reaching " + describe(goal));
  }

  PathResult result;
  for (std::size_t k = grid.flat(goal);; k = parent[k]) {
    result.nodes.push_back(index_of[k]);
    if (k == s) break;
  }
  std::reverse(result.nodes.begin(), result.nodes.end());
  result.positions.reserve(result.nodes.size());
  for (const auto& n : result.nodes) result.positions.push_back(grid.position(n));
  result.cost = g[grid.flat(goal)];
  return result;
}

namespace {

// Positions in `nodes` kept by waypoint compression.
std::vector<std::size_t> turn_points(std::span<const GridIndex> nodes) {
  std::vector<std::size_t> keep;
  if (nodes.empty()) return keep;
  keep.push_back(0);
  auto step = [&](std::size_t k) {
    return std::array<int, 3>{nodes[k].x - nodes[k - 1].x, nodes[k].y - nodes[k - 1].y,
                              nodes[k].z - nodes[k - 1].z};
  };
  for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
    if (step(k) != step(k + 1)) keep.push_back(k);
  }
  if (nodes.size() > 1) keep.push_back(nodes.size() - 1);
  return keep;
}

}  // namespace

std::vector<GridIndex> compress_indices(std::span<const GridIndex> nodes) {
  std::vector<GridIndex> out;
  for (std::size_t k : turn_points(nodes)) out.push_back(nodes[k]);
  return out;
}

std::vector<Vec3> compress_waypoints(const PathResult& path) {
  std::vector<Vec3> out;
  for (std::size_t k : turn_points(path.nodes)) out.push_back(path.positions[k]);
  return out;
}

}  // namespace cdplan
