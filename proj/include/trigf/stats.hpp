#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace trigf {

// Neumaier compensated summation.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double log_sum_exp(std::span<const double> logs) {
  if (logs.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(logs.begin(), logs.end());
  if (!std::isfinite(m)) return m;
  KahanSum s;
  for (double l : logs) s.add(std::exp(l - m));
  return m + std::log(s.value());
}

// Streaming mean / standard error (Welford).
class MeanAccumulator {
 public:
  void add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct BinomialEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  size_t n = 0;
};

inline BinomialEstimate binomial_estimate(size_t successes, size_t n) {
  BinomialEstimate e;
  e.n = n;
  if (n == 0) return e;
  e.p_hat = static_cast<double>(successes) / static_cast<double>(n);
  e.std_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(n));
  return e;
}

struct MedianEstimate {
  double median = 0.0;
  double std_error = 0.0;  // from the order-statistic normal approximation
};

inline MedianEstimate median_estimate(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(xs.begin(), xs.end());
  size_t n = xs.size();
  MedianEstimate m;
  m.median = (n % 2 == 1) ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
  double half = 0.98 * std::sqrt(static_cast<double>(n));  // ~95% CI ranks
  auto rank = [&](double r) {
    long i = std::lround(r);
    i = std::clamp<long>(i, 0, static_cast<long>(n) - 1);
    return xs[static_cast<size_t>(i)];
  };
  double lo = rank(static_cast<double>(n) / 2.0 - half);
  double hi = rank(static_cast<double>(n) / 2.0 + half);
  m.std_error = (hi - lo) / 3.92;
  return m;
}

struct KsResult {
  double statistic = 0.0;   // sup |F1 - F2|
  double p_value = 1.0;     // asymptotic Kolmogorov distribution
  double critical_1pct = 0.0;
  size_t n1 = 0, n2 = 0;
  bool pass_1pct() const { return statistic < critical_1pct; }
};

// Two-sample Kolmogorov-Smirnov. Handles ties (atoms) by evaluating the ECDF
// difference at every pooled jump point.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double d = 0.0;
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  r.n1 = a.size();
  r.n2 = b.size();
  double ne = na * nb / (na + nb);
  // c(alpha) = sqrt(-ln(alpha/2)/2); c(0.01) = 1.6276
  r.critical_1pct = std::sqrt(-0.5 * std::log(0.005)) / std::sqrt(ne);
  double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double q = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += sign * term;
    sign = -sign;
    if (term < 1e-12) break;
  }
  r.p_value = std::clamp(2.0 * q, 0.0, 1.0);
  return r;
}

}  // namespace trigf
