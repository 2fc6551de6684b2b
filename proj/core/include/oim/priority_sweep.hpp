#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "oim/empirical_model.hpp"

namespace oim {

enum class SweepKind { full, prioritized };

struct SweepStats {
  std::size_t backups = 0;
  double max_priority = 0.0;
};

/// State queue for prioritized sweeping.
///
/// After a state y is backed up with value change dV, each predecessor x
/// (any (x,a) with n(x,a,y) > 0) is queued with priority P^(x,a,y)*|dV|,
/// keeping the larger priority if x is already queued. Entries below the
/// threshold are never queued. The queue persists across steps, so work
/// left over when the backup budget runs out is resumed next step.
class PrioritySweeper {
 public:
  PrioritySweeper() = default;
  PrioritySweeper(std::size_t n_states, double threshold, std::size_t budget);

  double threshold() const noexcept { return threshold_; }
  std::size_t budget() const noexcept { return budget_; }

  /// Queue x with the given priority if it reaches the threshold.
  void push(StateId x, double priority);
  bool contains(StateId x) const { return priority_[x] > 0.0; }
  double priority(StateId x) const { return priority_[x]; }
  std::size_t size() const noexcept { return queued_; }
  bool empty() const noexcept { return queued_ == 0; }
  void clear();

  /// Backs up `current` first, then pops states in priority order until the
  /// queue is empty or the budget is spent.
  ///
  /// backup(x) performs the backup and returns |dV(x)|; weight(x, a, y)
  /// returns the model probability P^(x,a,y) used to scale priorities.
  template <class Backup, class Weight>
  SweepStats run(StateId current, const TransitionCounts& counts, Backup&& backup,
                 Weight&& weight) {
    SweepStats stats;
    remove(current);
    process(current, counts, backup, weight, stats);
    while (stats.backups < budget_ && !empty()) {
      const auto [p, x] = pop();
      stats.max_priority = std::max(stats.max_priority, p);
      process(x, counts, backup, weight, stats);
    }
    return stats;
  }

 private:
  template <class Backup, class Weight>
  void process(StateId y, const TransitionCounts& counts, Backup& backup, Weight& weight,
               SweepStats& stats) {
    const double change = backup(y);
    ++stats.backups;
    if (change <= 0.0) return;
    for (const StateAction& pred : counts.predecessors(y))
      push(pred.x, weight(pred.x, pred.a, y) * change);
  }

  std::pair<double, StateId> pop();
  void remove(StateId x);
  void compact();

  // Below this many states a scan of priority_ beats the heap.
  static constexpr std::size_t kLinearScanLimit = 64;

  double threshold_ = 1e-5;
  std::size_t budget_ = 1000;
  bool linear_ = true;
  std::size_t queued_ = 0;
  std::vector<double> priority_;                  // 0 when not queued
  std::vector<std::pair<double, StateId>> heap_;  // may hold stale entries
};

/// Repeated in-place sweeps over all states until the largest |dV| drops
/// below threshold or max_sweeps is reached. Returns the number of sweeps
/// and the final largest change.
template <class Backup>
std::pair<std::size_t, double> sweep_until_converged(std::size_t n_states, double threshold,
                                                     std::size_t max_sweeps, Backup&& backup) {
  double largest = 0.0;
  std::size_t sweeps = 0;
  while (sweeps < max_sweeps) {
    largest = 0.0;
    for (StateId x = 0; x < n_states; ++x) largest = std::max(largest, backup(x));
    ++sweeps;
    if (largest < threshold) break;
  }
  return {sweeps, largest};
}

}  // namespace oim
