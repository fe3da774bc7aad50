#include "footstep/miqp.h"

#include <algorithm>
#include <cmath>

#include "footstep/errors.h"

namespace footstep::opt {

namespace {

class DepthFirstSearch {
 public:
  DepthFirstSearch(const QpFactory& factory,
                   const std::vector<std::vector<int>>& candidates,
                   const MiqpSettings& settings)
      : factory_(factory), candidates_(candidates), settings_(settings) {
    const int steps = static_cast<int>(candidates.size());
    leaves_below_.assign(steps + 1, 1);
    for (int k = steps - 1; k >= 0; --k)
      leaves_below_[k] =
          leaves_below_[k + 1] * static_cast<long>(candidates[k].size());
    result_.stats.leaf_count = leaves_below_[0];
  }

  void SolveLeaf(const std::vector<int>& assignment) {
    const QpSolution sol = SolveQp(factory_(assignment), nullptr, settings_.qp);
    ++result_.stats.qp_solves;
    ++result_.stats.leaves_solved;
    visited_.push_back(assignment);
    if (sol.optimal() && (result_.status != MiqpStatus::kOptimal ||
                          sol.objective < result_.solution.objective)) {
      result_.status = MiqpStatus::kOptimal;
      result_.assignment = assignment;
      result_.solution = sol;
    }
  }

  void Search(std::vector<int>& partial) {
    const int depth = static_cast<int>(partial.size());
    const int steps = static_cast<int>(candidates_.size());
    if (depth == steps) {
      if (std::find(visited_.begin(), visited_.end(), partial) ==
          visited_.end())
        SolveLeaf(partial);
      return;
    }
    if (depth > 0 && settings_.use_relaxation_bounds) {
      const QpSolution relax =
          SolveQp(factory_(partial), nullptr, settings_.qp);
      ++result_.stats.qp_solves;
      ++result_.stats.relaxations_solved;
      const bool infeasible = relax.status == QpStatus::kInfeasible;
      const bool dominated =
          relax.optimal() && result_.status == MiqpStatus::kOptimal &&
          relax.objective >
              result_.solution.objective -
                  settings_.prune_tolerance *
                      (1.0 + std::abs(result_.solution.objective));
      if (infeasible || dominated) {
        ++result_.stats.nodes_pruned;
        long eliminated = leaves_below_[depth];
        for (const auto& v : visited_)
          if (std::equal(partial.begin(), partial.end(), v.begin()))
            --eliminated;
        result_.stats.leaves_pruned += eliminated;
        return;
      }
    }
    for (int c : candidates_[depth]) {
      partial.push_back(c);
      Search(partial);
      partial.pop_back();
    }
  }

  MiqpResult Take() { return std::move(result_); }

 private:
  const QpFactory& factory_;
  const std::vector<std::vector<int>>& candidates_;
  const MiqpSettings& settings_;
  std::vector<long> leaves_below_;
  std::vector<std::vector<int>> visited_;
  MiqpResult result_;
};

bool IsLeaf(const std::vector<int>& assignment,
            const std::vector<std::vector<int>>& candidates) {
  if (assignment.size() != candidates.size()) return false;
  for (size_t k = 0; k < candidates.size(); ++k)
    if (std::find(candidates[k].begin(), candidates[k].end(), assignment[k]) ==
        candidates[k].end())
      return false;
  return true;
}

}  // namespace

MiqpResult SolveAssignmentMiqp(
    const QpFactory& factory, const std::vector<std::vector<int>>& candidates,
    const std::optional<std::vector<int>>& incumbent_hint,
    const MiqpSettings& settings) {
  if (candidates.empty())
    throw ProblemConstructionError("assignment problem needs at least one step");
  for (const auto& c : candidates)
    if (c.empty())
      throw ProblemConstructionError("every step needs at least one candidate");

  DepthFirstSearch search(factory, candidates, settings);
  if (incumbent_hint && IsLeaf(*incumbent_hint, candidates))
    search.SolveLeaf(*incumbent_hint);
  std::vector<int> partial;
  partial.reserve(candidates.size());
  search.Search(partial);
  return search.Take();
}

}  // namespace footstep::opt
