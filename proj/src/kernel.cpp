#include "trigf/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trigf/stats.hpp"

namespace trigf {

namespace {

double log_b_event_c(int p, const WeightTable& w) {
  return std::log(ModelConstants::get().boltzmann_weight) + w.log_z(p + 1) -
         w.log_z(p);
}

double log_b_split(int p, int k, const WeightTable& w) {
  return w.log_z(k + 1) + w.log_z(p - k) - w.log_z(p);
}

void check_normalized(double total, int p, const char* what) {
  if (std::fabs(total - 1.0) > 1e-8) {
    throw std::logic_error(std::string(what) + " not normalized at p=" +
                           std::to_string(p) + ", total=" + std::to_string(total));
  }
}

}  // namespace

double StepMasses::total() const {
  KahanSum s;
  s.add(prob_c);
  for (double g : prob_g) s.add(g);
  s.add(prob_v);
  return s.value();
}

StepMasses step_law_masses(int p, const WeightTable& w) {
  if (p < 1 || p + 1 > w.p_max()) throw std::out_of_range("step_law_masses: p");
  StepMasses m;
  m.p = p;
  m.prob_c = std::exp(log_b_event_c(p, w));
  m.prob_g.resize(static_cast<size_t>(p));
  for (int k = 0; k < p; ++k) {
    // b_k = b_{p-1-k} holds exactly in log space; evaluate once per pair.
    if (k <= p - 1 - k) {
      m.prob_g[static_cast<size_t>(k)] = std::exp(log_b_split(p, k, w));
    } else {
      m.prob_g[static_cast<size_t>(k)] = m.prob_g[static_cast<size_t>(p - 1 - k)];
    }
  }
  m.prob_v = p == 2 ? std::exp(-w.log_z(2)) : 0.0;
  check_normalized(m.total(), p, "step law");
  return m;
}

StepLaw::StepLaw(int p, const WeightTable& w) : p_(p) {
  if (p < 1 || p + 1 > w.p_max()) throw std::out_of_range("StepLaw: p");
  prob_c_ = std::exp(log_b_event_c(p, w));
  prob_v_ = p == 2 ? std::exp(-w.log_z(2)) : 0.0;
  int n_pairs = (p + 1) / 2;
  cum_.resize(static_cast<size_t>(n_pairs) + 2);
  KahanSum s;
  s.add(prob_c_);
  cum_[0] = s.value();
  for (int j = 0; j < n_pairs; ++j) {
    double b = std::exp(log_b_split(p, j, w));
    s.add(j == p - 1 - j ? b : 2.0 * b);
    cum_[static_cast<size_t>(j) + 1] = s.value();
  }
  s.add(prob_v_);
  total_ = s.value();
  cum_.back() = total_;
  check_normalized(total_, p, "step law");
}

PeelEvent StepLaw::sample(RandomStream& rs) const {
  double u = rs.next_double() * total_;
  size_t idx = static_cast<size_t>(
      std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
  if (idx >= cum_.size()) idx = cum_.size() - 1;
  if (idx == 0) return PeelEvent::c();
  if (idx == cum_.size() - 1 && prob_v_ > 0.0) return PeelEvent::v();
  int j = static_cast<int>(std::min(idx, cum_.size() - 2)) - 1;
  if (j == p_ - 1 - j) return PeelEvent::split(j);
  return PeelEvent::split(rs.next_bit() ? p_ - 1 - j : j);
}

PeelEvent StepLaw::event_at(double u01, bool side) const {
  double u = u01 * total_;
  size_t idx = static_cast<size_t>(
      std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
  if (idx >= cum_.size()) idx = cum_.size() - 1;
  if (idx == 0) return PeelEvent::c();
  if (idx == cum_.size() - 1 && prob_v_ > 0.0) return PeelEvent::v();
  int j = static_cast<int>(std::min(idx, cum_.size() - 2)) - 1;
  if (j == p_ - 1 - j) return PeelEvent::split(j);
  return PeelEvent::split(side ? p_ - 1 - j : j);
}

PeelEvent StepLawCache::sample(int p, RandomStream& rs) {
  if (p <= threshold_) return law(p).sample(rs);
  // One cumulative walk; same event order as the materialized law.
  double prob_c = std::exp(log_b_event_c(p, w_));
  double u = rs.next_double();
  if (u < prob_c) return PeelEvent::c();
  double acc = prob_c;
  int n_pairs = (p + 1) / 2;
  for (int j = 0; j < n_pairs - 1; ++j) {
    acc += 2.0 * std::exp(log_b_split(p, j, w_));
    if (u < acc) return PeelEvent::split(rs.next_bit() ? p - 1 - j : j);
  }
  // Rounding may leave u at the very top; attribute it to the last pair.
  int j = n_pairs - 1;
  if (j == p - 1 - j) return PeelEvent::split(j);
  return PeelEvent::split(rs.next_bit() ? p - 1 - j : j);
}

const StepLaw& StepLawCache::law(int p) {
  auto it = index_.find(p);
  if (it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return *it->second;
  }
  lru_.emplace_front(p, w_);
  index_[p] = lru_.begin();
  if (lru_.size() > max_entries_) {
    index_.erase(lru_.back().perimeter());
    lru_.pop_back();
  }
  return lru_.front();
}

double half_plane_prob(int k, const WeightTable& w) {
  if (k < -1) throw std::invalid_argument("half_plane_prob: k < -1");
  if (k == -1) return 1.0 / std::sqrt(3.0);
  return std::exp(w.log_z(k + 1) - k * std::log(12.0));
}

HalfPlaneIdentities half_plane_identities(const WeightTable& w, int K1, int K2) {
  HalfPlaneIdentities h;
  double q_m1 = half_plane_prob(-1, w);
  h.sum_q = w.sum_z12_tail_corrected(K1);
  h.sum_kq = w.sum_pz12_tail_corrected(K2);
  h.residual_mass = q_m1 + 2.0 * h.sum_q - 1.0;
  h.residual_drift = q_m1 - 2.0 * h.sum_kq;
  return h;
}

LlcKernel::LlcKernel(int p, const WeightTable& w, OddSplitRule rule) : p_(p) {
  if (p < 1 || p + 1 > w.p_max()) throw std::out_of_range("LlcKernel: p");
  row_.emplace_back(p + 1, std::exp(log_b_event_c(p, w)));
  // Strict symmetric pairs: G_k and G_{p-1-k} both send the chain to p-k.
  for (int k = 0; 2 * k < p - 1; ++k) {
    row_.emplace_back(p - k, 2.0 * std::exp(log_b_split(p, k, w)));
  }
  if (p % 2 == 1) {
    int m = (p - 1) / 2;  // equal split into two (m+1)-cycles
    int target = rule == OddSplitRule::AsPrinted ? m : m + 1;
    row_.emplace_back(target, std::exp(log_b_split(p, m, w)));
  }
  if (p == 2) row_.emplace_back(0, std::exp(-w.log_z(2)));
  cum_.resize(row_.size());
  KahanSum s;
  for (size_t i = 0; i < row_.size(); ++i) {
    s.add(row_[i].second);
    cum_[i] = s.value();
  }
  check_normalized(cum_.back(), p, "llc kernel row");
}

double LlcKernel::row_sum() const {
  KahanSum s;
  for (const auto& [q, mass] : row_) s.add(mass);
  return s.value();
}

int LlcKernel::sample(RandomStream& rs) const {
  double u = rs.next_double() * cum_.back();
  size_t idx = static_cast<size_t>(
      std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
  if (idx >= row_.size()) idx = row_.size() - 1;
  return row_[idx].first;
}

double LlcKernel::f_drift(const WeightTable& w) const {
  KahanSum s;
  for (const auto& [q, mass] : row_) s.add(mass * w.f(q));
  return s.value() - w.f(p_);
}

double LlcKernel::log_second_moment() const {
  KahanSum s;
  for (const auto& [q, mass] : row_) {
    if (q == 0) continue;  // ln 0; the test functions vanish there
    double x = std::log(static_cast<double>(q) / p_);
    s.add(x * x * mass);
  }
  return std::pow(static_cast<double>(p_), 1.5) * s.value();
}

UiptStepLaw::UiptStepLaw(int p, const WeightTable& w) : p_(p), w_(&w) {
  if (p < 1 || p + 1 > w.p_max()) throw std::out_of_range("UiptStepLaw: p");
  double fp = w.f(p);
  prob_c_ = std::exp(log_b_event_c(p, w)) * w.f(p + 1) / fp;
  prob_g_.resize(static_cast<size_t>(p));
  for (int k = 0; k < p; ++k) {
    double b = k <= p - 1 - k ? std::exp(log_b_split(p, k, w))
                              : std::exp(log_b_split(p, p - 1 - k, w));
    prob_g_[static_cast<size_t>(k)] = b * (w.f(k + 1) + w.f(p - k)) / fp;
  }
  // Event V carries f(0) = 0: the distinguished hole is never closed.
  cum_.resize(prob_g_.size() + 1);
  KahanSum s;
  s.add(prob_c_);
  cum_[0] = s.value();
  for (size_t k = 0; k < prob_g_.size(); ++k) {
    s.add(prob_g_[k]);
    cum_[k + 1] = s.value();
  }
  check_normalized(s.value(), p, "uipt step law");
}

double UiptStepLaw::total() const {
  KahanSum s;
  s.add(prob_c_);
  for (double g : prob_g_) s.add(g);
  return s.value();
}

double UiptStepLaw::child_one_prob(int k) const {
  double f1 = w_->f(k + 1);
  double f2 = w_->f(p_ - k);
  return f1 / (f1 + f2);
}

UiptStepLaw::Step UiptStepLaw::sample(RandomStream& rs) const {
  double u = rs.next_double() * cum_.back();
  size_t idx = static_cast<size_t>(
      std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
  if (idx == 0) return {PeelEvent::c(), p_ + 1};
  int k = static_cast<int>(std::min(idx, cum_.size() - 1)) - 1;
  int child = rs.next_double() < child_one_prob(k) ? k + 1 : p_ - k;
  return {PeelEvent::split(k), child};
}

}  // namespace trigf
