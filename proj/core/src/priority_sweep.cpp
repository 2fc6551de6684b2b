#include "oim/priority_sweep.hpp"

#include "oim/errors.hpp"

namespace oim {

PrioritySweeper::PrioritySweeper(std::size_t n_states, double threshold, std::size_t budget)
    : threshold_(threshold),
      budget_(budget),
      linear_(n_states <= kLinearScanLimit),
      priority_(n_states, 0.0) {
  if (!(threshold > 0.0)) throw UsageError("priority threshold must be positive");
  if (budget == 0) throw UsageError("backup budget must be >= 1");
}

void PrioritySweeper::push(StateId x, double priority) {
  if (!(priority >= threshold_) || priority <= priority_[x]) return;
  if (priority_[x] == 0.0) ++queued_;
  priority_[x] = priority;
  if (linear_) return;
  heap_.emplace_back(priority, x);
  std::push_heap(heap_.begin(), heap_.end());
  if (heap_.size() > 4 * priority_.size() + 64) compact();
}

void PrioritySweeper::compact() {
  heap_.clear();
  for (StateId y = 0; y < priority_.size(); ++y)
    if (priority_[y] > 0.0) heap_.emplace_back(priority_[y], y);
  std::make_heap(heap_.begin(), heap_.end());
}

std::pair<double, StateId> PrioritySweeper::pop() {
  if (linear_ && queued_ > 0) {
    // ties go to the larger index, as with the heap's pair ordering
    StateId best = 0;
    for (StateId y = 1; y < priority_.size(); ++y)
      if (priority_[y] >= priority_[best]) best = y;
    const double p = priority_[best];
    priority_[best] = 0.0;
    --queued_;
    return {p, best};
  }
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end());
    const auto top = heap_.back();
    heap_.pop_back();
    if (priority_[top.second] == top.first) {
      priority_[top.second] = 0.0;
      --queued_;
      return top;
    }
  }
  throw UsageError("pop from empty priority queue");
}

void PrioritySweeper::remove(StateId x) {
  if (priority_[x] == 0.0) return;
  priority_[x] = 0.0;
  --queued_;
  // The heap entry goes stale and is skipped by pop().
}

void PrioritySweeper::clear() {
  std::fill(priority_.begin(), priority_.end(), 0.0);
  heap_.clear();
  queued_ = 0;
}

}  // namespace oim
