#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "trigf/gf.hpp"
#include "trigf/llc.hpp"
#include "trigf/stats.hpp"

using namespace trigf;

int main() {
  WeightTable w(1 << 18);
  const int p = 1000;
  const uint64_t n_steps = static_cast<uint64_t>(std::floor(std::pow(p, 1.5) * 0.05));
  const size_t n = 20000;
  LlcKernelCache kernels(w);
  std::vector<double> a(n), b(n), c(n);
  double t_cont = 2.0 * ModelConstants::get().t_triangle *
                  (static_cast<double>(n_steps) / std::pow(p, 1.5));
  XiModel m3(XiConfig{1e-3, true});
  XiModel m4(XiConfig{1e-4, true});
  for (size_t i = 0; i < n; ++i) {
    a[i] = llc_value_after(p, n_steps, derive_key(1, i), kernels) / double(p);
    b[i] = pssmp_values(m3, -1.5, 1.0, {t_cont}, derive_key(2, i), 1e-8)[0];
    c[i] = pssmp_values(m4, -1.5, 1.0, {t_cont}, derive_key(3, i), 1e-8)[0];
  }
  auto show = [&](const char* name, std::vector<double> v) {
    std::sort(v.begin(), v.end());
    MeanAccumulator acc;
    for (double x : v) acc.add(x);
    std::printf("%s mean %.5f q05 %.4f q25 %.4f q50 %.4f q75 %.4f q95 %.4f\n", name,
                acc.mean(), v[n / 20], v[n / 4], v[n / 2], v[3 * n / 4], v[19 * n / 20]);
  };
  show("discrete p=1000 ", a);
  show("continuum d=1e-3", b);
  show("continuum d=1e-4", c);
  std::printf("KS(disc, 1e-3) = %.4f\n", ks_two_sample(a, b).statistic);
  std::printf("KS(disc, 1e-4) = %.4f\n", ks_two_sample(a, c).statistic);
  std::printf("KS(1e-3, 1e-4) = %.4f (crit %.4f)\n", ks_two_sample(b, c).statistic,
              ks_two_sample(b, c).critical_1pct);
  // where is the sup attained?
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double dmax = 0, at = 0;
  while (i < n && j < n) {
    double x = std::min(a[i], b[j]);
    while (i < n && a[i] == x) ++i;
    while (j < n && b[j] == x) ++j;
    double d = std::fabs(double(i) / n - double(j) / n);
    if (d > dmax) {
      dmax = d;
      at = x;
    }
  }
  std::printf("sup at value %.4f (D=%.4f)\n", at, dmax);
  return 0;
}
