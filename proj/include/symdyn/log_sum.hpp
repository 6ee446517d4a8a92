#pragma once

#include <cmath>
#include <limits>

namespace symdyn {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Accumulates log(sum_i exp(x_i)) without overflow. The running sum is kept
/// relative to the largest term seen so far and carried with Neumaier
/// compensation.
class LogSumExp {
 public:
  void add(double log_term) {
    if (log_term == kNegInf) return;
    if (log_term > max_) {
      const double scale = max_ == kNegInf ? 0.0 : std::exp(max_ - log_term);
      sum_ *= scale;
      comp_ *= scale;
      max_ = log_term;
    }
    accumulate(std::exp(log_term - max_));
  }

  void merge(const LogSumExp& other) {
    if (other.max_ == kNegInf) return;
    if (other.max_ > max_) {
      const double scale = max_ == kNegInf ? 0.0 : std::exp(max_ - other.max_);
      sum_ *= scale;
      comp_ *= scale;
      max_ = other.max_;
    }
    const double f = std::exp(other.max_ - max_);
    accumulate(other.sum_ * f);
    accumulate(other.comp_ * f);
  }

  [[nodiscard]] double value() const {
    if (max_ == kNegInf) return kNegInf;
    return max_ + std::log(sum_ + comp_);
  }
  [[nodiscard]] bool empty() const { return max_ == kNegInf; }

 private:
  void accumulate(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double max_ = kNegInf;
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace symdyn
