#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "footstep/qp.h"

namespace footstep::opt {

/// Builds the QP for a partial assignment. The vector holds one chosen
/// candidate value per leading step; steps beyond its length are relaxed.
using QpFactory = std::function<QuadraticProgram(const std::vector<int>&)>;

struct MiqpSettings {
  bool use_relaxation_bounds{true};
  /// A node is pruned when its bound exceeds the incumbent by more than this
  /// (relative to 1 + |incumbent|).
  double prune_tolerance{1e-9};
  QpSettings qp;
};

struct MiqpStats {
  int qp_solves{0};
  int relaxations_solved{0};
  int leaves_solved{0};
  /// Leaves eliminated without their own QP solve, by bound or infeasibility.
  long leaves_pruned{0};
  int nodes_pruned{0};
  long leaf_count{0};
};

enum class MiqpStatus { kOptimal, kInfeasible };

struct MiqpResult {
  MiqpStatus status{MiqpStatus::kInfeasible};
  std::vector<int> assignment;
  QpSolution solution;
  MiqpStats stats;
};

/// Exact minimization over the Cartesian product of per-step candidates.
/// Depth-first in the given candidate order; `incumbent_hint`, when it is a
/// valid leaf, is solved first to seed the incumbent.
MiqpResult SolveAssignmentMiqp(
    const QpFactory& factory,
    const std::vector<std::vector<int>>& candidates,
    const std::optional<std::vector<int>>& incumbent_hint = std::nullopt,
    const MiqpSettings& settings = {});

}  // namespace footstep::opt
