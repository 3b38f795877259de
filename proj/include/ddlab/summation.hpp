#pragma once

#include <cmath>

namespace ddlab {

// Neumaier-compensated accumulator. Every reduction that must not depend on
// thread count accumulates fixed-size blocks with this and then combines the
// block results in index order.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
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

}  // namespace ddlab
