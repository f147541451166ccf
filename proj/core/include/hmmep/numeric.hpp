#pragma once

#include <cmath>
#include <span>

namespace hmmep {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) noexcept {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// -p log p with the convention 0 log 0 = 0.
inline double neg_xlogx(double p) noexcept { return p > 0.0 ? -p * std::log(p) : 0.0; }

/// Shannon entropy (nats) of a probability vector.
inline double entropy(std::span<const double> probs) noexcept {
  double h = 0.0;
  for (double p : probs) h += neg_xlogx(p);
  return h;
}

/// a / b where 0/0 (and anything over a zero divisor) contributes nothing.
inline double safe_ratio(double a, double b) noexcept { return b > 0.0 ? a / b : 0.0; }

}  // namespace hmmep
