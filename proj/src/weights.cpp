#include "trigf/weights.hpp"

#include <cmath>
#include <stdexcept>

#include "trigf/stats.hpp"

namespace trigf {

namespace {
const double kSqrt3 = std::sqrt(3.0);
const double kSqrtPi = std::sqrt(M_PI);
const double kLog12 = std::log(12.0);
}  // namespace

const ModelConstants& ModelConstants::get() {
  static const ModelConstants c = [] {
    ModelConstants m;
    m.t_triangle = kSqrt3 / (8.0 * kSqrtPi);
    m.a_triangle = 1.0 / (2.0 * kSqrt3);
    m.time_factor = 2.0 * m.t_triangle / m.a_triangle;
    m.boltzmann_weight = 1.0 / (12.0 * kSqrt3);
    return m;
  }();
  return c;
}

double cycle_weight(int p) {
  if (p < 0) throw std::invalid_argument("cycle_weight: p < 0");
  if (p == 0) return 0.0;
  if (p == 1) return std::sqrt(2.0) * (2.0 + kSqrt3) / (3.0 * kSqrtPi);
  double pd = p;
  return std::sqrt(6.0) / (9.0 * kSqrtPi) * pd * (2.0 * pd - 1.0) * (2.0 * pd - 3.0);
}

double volume_weight(int p) {
  if (p < 1) throw std::invalid_argument("volume_weight: p < 1");
  if (p == 1) return 1.0 + 2.0 / kSqrt3;
  double pd = p;
  return (2.0 * pd - 3.0) * (2.0 * pd - 1.0) / 3.0;
}

double log_z_closed_form(int p) {
  if (p < 1) throw std::invalid_argument("log_z_closed_form: p < 1");
  if (p == 1) return std::log((2.0 - kSqrt3) / 4.0);
  if (p == 2) return std::log(3.0 * kSqrt3 / 4.0);
  // Z(p) = 6^p (2p-5)!! / (8 sqrt3 p!), (2p-5)!! = (2p-4)!/(2^(p-2) (p-2)!)
  double pd = p;
  return pd * std::log(6.0) + std::lgamma(2.0 * pd - 3.0) -
         (pd - 2.0) * std::log(2.0) - std::lgamma(pd - 1.0) -
         std::log(8.0 * kSqrt3) - std::lgamma(pd + 1.0);
}

WeightTable::WeightTable(int p_max) : p_max_(p_max) {
  if (p_max < 3) throw std::invalid_argument("WeightTable: p_max < 3");
  size_t n = static_cast<size_t>(p_max) + 1;
  log_z_.resize(n);
  log_c_.resize(n);
  log_f_.resize(n);
  f_.resize(n);
  g_.resize(n);
  log_z_[0] = -std::numeric_limits<double>::infinity();
  log_z_[1] = std::log((2.0 - kSqrt3) / 4.0);
  log_z_[2] = std::log(3.0 * kSqrt3 / 4.0);
  log_z_[3] = std::log(3.0 * kSqrt3 / 2.0);
  // Z(p+1)/Z(p) = 6 (2p-3)/(p+1), stable for p >= 3.
  for (int p = 3; p < p_max; ++p) {
    log_z_[p + 1] = log_z_[p] + std::log(6.0 * (2.0 * p - 3.0) / (p + 1.0));
  }
  log_c_[0] = log_f_[0] = -std::numeric_limits<double>::infinity();
  f_[0] = 0.0;
  g_[0] = std::numeric_limits<double>::quiet_NaN();
  for (int p = 1; p <= p_max; ++p) {
    f_[p] = cycle_weight(p);
    log_f_[p] = std::log(f_[p]);
    log_c_[p] = log_f_[p] + log_z_[p];
    g_[p] = volume_weight(p);
  }
}

int WeightTable::check(int p) const {
  if (p < 0 || p > p_max_) throw std::out_of_range("WeightTable: p out of range");
  return p;
}

double WeightTable::z_recurrence_residual(int p) const {
  if (p < 1 || p + 1 > p_max_) throw std::out_of_range("z_recurrence_residual");
  std::vector<double> logs;
  logs.reserve(static_cast<size_t>(p) + 2);
  logs.push_back(std::log(ModelConstants::get().boltzmann_weight) + log_z_[p + 1]);
  for (int k = 0; k < p; ++k) logs.push_back(log_z_[k + 1] + log_z_[p - k]);
  if (p == 2) logs.push_back(0.0);
  double log_rhs = log_sum_exp(logs);
  return std::fabs(std::expm1(log_rhs - log_z_[p]));
}

namespace {

// sum_{k>K} k^-a via the midpoint Euler-Maclaurin expansion.
double power_tail(double K, double a) {
  double x = K + 0.5;
  return std::pow(x, 1.0 - a) / (a - 1.0) - (a / 24.0) * std::pow(x, -a - 1.0);
}

}  // namespace

double WeightTable::sum_z12_tail_corrected(int P) const {
  if (P + 1 > p_max_) throw std::out_of_range("sum_z12: table too small");
  KahanSum s;
  for (int p = 0; p <= P; ++p) s.add(std::exp(log_z_[p + 1] - p * kLog12));
  // Z(p+1) 12^-p ~ t p^-5/2; calibrate the constant from the last term so the
  // first-order correction cancels.
  double t_hat = std::exp(log_z_[P + 1] - P * kLog12 + 2.5 * std::log(static_cast<double>(P)));
  return s.value() + t_hat * power_tail(P, 2.5);
}

double WeightTable::sum_pz12_tail_corrected(int P) const {
  if (P + 1 > p_max_) throw std::out_of_range("sum_pz12: table too small");
  KahanSum s;
  for (int p = 0; p <= P; ++p)
    s.add(static_cast<double>(p) * std::exp(log_z_[p + 1] - p * kLog12));
  double t_hat = std::exp(log_z_[P + 1] - P * kLog12 + 2.5 * std::log(static_cast<double>(P)));
  return s.value() + t_hat * power_tail(P, 1.5);
}

WeightTable WeightTable::perturbed(int p, double eps) const {
  WeightTable w = *this;
  w.log_z_[w.check(p)] += std::log1p(eps);
  return w;
}

namespace {

BigInt double_factorial(int64_t m) {
  if (m <= 0) return 1;  // covers (-1)!! = 1
  BigInt r = 1;
  for (int64_t k = m; k >= 2; k -= 2) r *= k;
  return r;
}

BigInt factorial(int64_t m) {
  BigInt r = 1;
  for (int64_t k = 2; k <= m; ++k) r *= k;
  return r;
}

}  // namespace

BigInt count_triangulations(int64_t n, int64_t p) {
  if (p <= 0) throw std::invalid_argument("count_triangulations: p must be positive");
  if (n < 0) throw std::invalid_argument("count_triangulations: n must be nonnegative");
  if (n == 0 && p == 1) return 0;
  // 4^(n-1) p (2p)! (2p+3n-5)!! / ((p!)^2 n! (2p+n-1)!!), cleared of the
  // 1/4 by multiplying both sides by 4.
  BigInt num = p;
  num *= factorial(2 * p);
  num *= double_factorial(2 * p + 3 * n - 5);
  num <<= 2 * n;  // 4^n
  BigInt den = factorial(p);
  den *= den;
  den *= factorial(n);
  den *= double_factorial(2 * p + n - 1);
  den <<= 2;  // the deferred 1/4
  BigInt q, r;
  boost::multiprecision::divide_qr(num, den, q, r);
  if (r != 0) throw std::logic_error("count_triangulations: non-integral result");
  return q;
}

CountTable::CountTable(int n_max, int p_max) : n_max_(n_max), p_max_(p_max) {
  if (n_max < 0 || p_max < 1) throw std::invalid_argument("CountTable: bad bounds");
  if (n_max > 60 || p_max > 60) throw std::invalid_argument("CountTable: desk scale is <= 60");
  rows_.resize(static_cast<size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    // Row n is needed up to p_max + (n_max - n) by the C-event term above it.
    int pm = p_max + (n_max - n);
    auto& row = rows_[static_cast<size_t>(n)];
    row.assign(static_cast<size_t>(pm) + 2, 0);
    for (int p = 1; p <= pm; ++p) {
      BigInt total = 0;
      if (n > 0) total += rows_[static_cast<size_t>(n - 1)][static_cast<size_t>(p) + 1];
      for (int k = 0; k < p; ++k) {
        const auto& a = rows_;
        for (int n1 = 0; n1 <= n; ++n1) {
          const BigInt& left = n1 == n ? row[static_cast<size_t>(k) + 1]
                                       : a[static_cast<size_t>(n1)][static_cast<size_t>(k) + 1];
          if (left == 0) continue;
          const BigInt& right = n1 == 0 ? row[static_cast<size_t>(p - k)]
                                        : a[static_cast<size_t>(n - n1)][static_cast<size_t>(p - k)];
          total += left * right;
        }
      }
      if (n == 0 && p == 2) total += 1;
      row[static_cast<size_t>(p)] = total;
    }
  }
}

const BigInt& CountTable::at(int n, int p) const {
  if (n < 0 || n > n_max_ || p < 1 || p > p_max_)
    throw std::out_of_range("CountTable::at");
  return rows_[static_cast<size_t>(n)][static_cast<size_t>(p)];
}

}  // namespace trigf
