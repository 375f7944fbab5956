#pragma once

#include <cstddef>
#include <functional>

namespace fracneu {

/// Worker count: FRACNEU_THREADS if set and positive, otherwise the
/// hardware concurrency.
unsigned thread_count();

/// Calls body(begin, end) on disjoint contiguous chunks of [0, n).
/// Chunks never share output rows, so results do not depend on the
/// number of threads.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if ((sum_ >= 0 ? sum_ : -sum_) >= (x >= 0 ? x : -x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace fracneu
