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

#pragma once

#include <array>
#include <atomic>
#include <compare>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cdplan/geometry.hpp"

namespace cdplan {

/// 1-based lattice index; node (1,1,1) sits at origin + deltas.
struct GridIndex {
  int x = 1;
  int y = 1;
  int z = 1;

  auto operator<=>(const GridIndex&) const = default;
};

struct Grid {
  Vec3 origin = Vec3::Zero();
  Vec3 deltas = Vec3::Ones();
  std::array<int, 3> counts = {1, 1, 1};

  Vec3 position(const GridIndex& i) const;
  bool contains(const GridIndex& i) const;
  std::size_t node_count() const;
  std::size_t flat(const GridIndex& i) const;
  /// Lattice index of `p` if it lies on a lattice point (within `tol` per
  /// axis, in units of the spacing). The index may fall outside `counts`.
  std::optional<GridIndex> lattice_index(const Vec3& p, double tol = 1e-9) const;
  /// Throws SchemaError on non-positive deltas or counts.
  void validate() const;
};

using Passability = std::function<bool(const GridIndex&)>;

/// Valid-center set over a grid, evaluated lazily and memoized. Lookups may
/// run concurrently from several threads.
class FreeSet {
 public:
  FreeSet(Grid grid, double r_max, ObstacleMesh mesh, ValidityOptions options = {});

  FreeSet(const FreeSet&) = delete;
  FreeSet& operator=(const FreeSet&) = delete;

  bool contains(const GridIndex& i) const;
  const Grid& grid() const { return grid_; }
  double r_max() const { return r_max_; }
  /// Number of nodes evaluated so far.
  std::size_t evaluated() const;
  Passability passability() const;

 private:
  Grid grid_;
  double r_max_;
  ObstacleMesh mesh_;
  ValidityOptions options_;
  // 0 = unknown, 1 = free, 2 = blocked
  mutable std::vector<std::atomic<std::uint8_t>> memo_;
};

/// On-grid, passable members of the 26-neighbourhood of `node`.
std::vector<GridIndex> neighbors(const GridIndex& node, const Grid& grid,
                                 const Passability& free);

struct PathResult {
  std::vector<GridIndex> nodes;
  std::vector<Vec3> positions;
  double cost = 0.0;
};

/// Minimum-length grid path under straight-line step costs with the
/// straight-line distance to `goal` as heuristic. Ties in f are broken by
/// smaller heuristic, then by lexicographic node index.
/// Throws InvalidEndpoint or NoPath.
PathResult astar(const GridIndex& start, const GridIndex& goal, const Grid& grid,
                 const Passability& free);

/// Endpoints plus every node where the step direction changes.
std::vector<Vec3> compress_waypoints(const PathResult& path);
std::vector<GridIndex> compress_indices(std::span<const GridIndex> nodes);

}  // namespace cdplan
