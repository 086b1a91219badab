#pragma once

// Enumeration of triangulations of the p-gon with a simple boundary and the
// derived per-perimeter weights used everywhere else:
//
//   Z(p)  critical Boltzmann partition function
//   C(p)  polynomial-correction constant in  #T(n,p) ~ C(p) (12 sqrt 3)^n n^-5/2
//   f(p) = C(p)/Z(p)   cycle weight (cubic in p)
//   g(p)               expected inner-vertex count of a Boltzmann p-gon
//
// Exact counts use big integers; everything indexed by perimeter is kept in
// IEEE log space so that ratios of astronomically large weights stay exact to
// roundoff.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <vector>

namespace trigf {

using BigInt = boost::multiprecision::cpp_int;

struct ModelConstants {
  double t_triangle;        // sqrt(3) / (8 sqrt(pi))
  double a_triangle;        // 1 / (2 sqrt(3))
  double time_factor;       // 2 t / a = 3 / (2 sqrt(pi))
  double boltzmann_weight;  // 1 / (12 sqrt 3)

  static const ModelConstants& get();
};

class WeightTable {
 public:
  explicit WeightTable(int p_max);

  int p_max() const { return p_max_; }

  double log_z(int p) const { return log_z_[check(p)]; }
  double log_c(int p) const { return log_c_[check(p)]; }
  double log_f(int p) const { return log_f_[check(p)]; }
  // f(0) = 0 by convention.
  double f(int p) const { return p == 0 ? 0.0 : f_[check(p)]; }
  double g(int p) const { return g_[check(p)]; }

  // Relative residual of the one-step identity
  //   Z(p) = (12 sqrt3)^-1 Z(p+1) + sum_{k<p} Z(k+1) Z(p-k) + [p=2],
  // evaluated with log-sum-exp. Requires p <= p_max - 1.
  double z_recurrence_residual(int p) const;

  // Partial sum of Z(p+1) 12^-p over p in [0, P] plus an analytic tail
  // estimate calibrated from the last term (the series converges to
  // (3 - sqrt3)/6). Same for the p-weighted sum, which converges to sqrt3/6.
  double sum_z12_tail_corrected(int P) const;
  double sum_pz12_tail_corrected(int P) const;

  // Test hook: returns a copy with log Z(p) shifted by log1p(eps).
  WeightTable perturbed(int p, double eps) const;

 private:
  int check(int p) const;
  int p_max_;
  std::vector<double> log_z_, log_c_, log_f_, f_, g_;
};

// log Z(p) straight from the closed form via lgamma (independent of the
// recurrence route used to build the table).
double log_z_closed_form(int p);

double cycle_weight(int p);   // f(p)
double volume_weight(int p);  // g(p), p >= 1

// Exact #T(n,p): triangulations of the p-gon with n inner vertices, from the
// closed product formula with double factorials expanded exactly.
// (0,1) -> 0; (0,2) -> 1 (trivial triangulation). Rejects p <= 0 or n < 0.
BigInt count_triangulations(int64_t n, int64_t p);

// Independent oracle for the same counts, built from the one-triangle
// peeling decomposition:
//   #T(n,p) = #T(n-1,p+1) + sum_{k<p} sum_{n1+n2=n} #T(n1,k+1) #T(n2,p-k)
//             + [n=0][p=2],
// with the first term absent when n = 0.
class CountTable {
 public:
  CountTable(int n_max, int p_max);
  const BigInt& at(int n, int p) const;
  int n_max() const { return n_max_; }
  int p_max() const { return p_max_; }

 private:
  int n_max_, p_max_;
  std::vector<std::vector<BigInt>> rows_;  // rows_[n][p], p up to p_max+n_max-n
};

inline CountTable count_oracle_dp(int n_max, int p_max) {
  return CountTable(n_max, p_max);
}

}  // namespace trigf
