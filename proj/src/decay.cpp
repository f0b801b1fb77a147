// SPDX-License-Identifier: Apache-2.0
#include "metacog/decay.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "metacog/errors.hpp"

namespace metacog {

std::vector<QueryAggregate> aggregate_queries(std::span<const ResponseSample> samples) {
  if (samples.empty()) throw InvalidInput("aggregate_queries: no samples");

  std::vector<QueryAggregate> out;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<Scalar> uncertainty_sum;

  for (const ResponseSample& s : samples) {
    auto [it, inserted] = slot.try_emplace(s.query_id, out.size());
    if (inserted) {
      out.push_back(QueryAggregate{s.query_id, 0.0, 0.0, 0});
      uncertainty_sum.push_back(0.0);
    }
    QueryAggregate& agg = out[it->second];
    uncertainty_sum[it->second] += sequence_uncertainty(std::span<const Scalar>(s.token_logprobs)).value;
    agg.mean_accuracy += s.correct ? 1.0 : 0.0;
    agg.k += 1;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].mean_uncertainty = uncertainty_sum[i] / out[i].k;
    out[i].mean_accuracy /= out[i].k;
  }
  return out;
}

std::vector<BinCentroid> bin_equidistant(std::span<const QueryAggregate> aggregates, int m) {
  if (aggregates.empty()) throw InvalidInput("bin_equidistant: no aggregates");
  if (m < 2) throw InvalidInput("bin_equidistant: m must be >= 2");

  Scalar lo = aggregates[0].mean_uncertainty;
  Scalar hi = lo;
  for (const QueryAggregate& a : aggregates) {
    lo = std::min(lo, a.mean_uncertainty);
    hi = std::max(hi, a.mean_uncertainty);
  }
  if (hi <= lo) throw DegenerateRange("bin_equidistant: all aggregates share one uncertainty");

  const Scalar width = (hi - lo) / m;
  std::vector<BinCentroid> bins(static_cast<std::size_t>(m));
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  for (int i = 0; i < m; ++i) {
    bins[i].bin_index = i;
    bins[i].phi = bins[i].psi = 0.0;
    bins[i].count = 0;
  }
  for (const QueryAggregate& a : aggregates) {
    auto idx = static_cast<int>((a.mean_uncertainty - lo) / width);
    idx = std::clamp(idx, 0, m - 1);  // the max lands in the closed last bin
    bins[idx].phi += a.mean_uncertainty;
    bins[idx].psi += a.mean_accuracy;
    bins[idx].count += 1;
    used[idx] = true;
  }

  std::vector<BinCentroid> out;
  for (int i = 0; i < m; ++i) {
    if (!used[i]) continue;
    BinCentroid c = bins[i];
    c.phi /= c.count;
    c.psi /= c.count;
    out.push_back(c);
  }
  return out;
}

namespace {

struct Objective {
  // F(a,b) = sum_i w_i * (psi_i - a*e_i - b)^2 with e_i = exp(-phi_i)
  Vector e, psi, w;

  Scalar value(Scalar a, Scalar b) const {
    return (w.array() * (psi.array() - a * e.array() - b).square()).sum();
  }
  // gradient of F and the Gauss-Newton normal matrix J^T W J
  void derivatives(Scalar a, Scalar b, Eigen::Vector2d& grad, Eigen::Matrix2d& jtj) const {
    const Array r = psi.array() - a * e.array() - b;
    grad[0] = -2.0 * (w.array() * r * e.array()).sum();
    grad[1] = -2.0 * (w.array() * r).sum();
    jtj(0, 0) = (w.array() * e.array().square()).sum();
    jtj(0, 1) = jtj(1, 0) = (w.array() * e.array()).sum();
    jtj(1, 1) = w.sum();
  }
};

}  // namespace

DecayFit fit_decay(std::vector<BinCentroid> centroids, const DecayFitConfig& config) {
  std::vector<Scalar> distinct;
  for (const BinCentroid& c : centroids) distinct.push_back(c.phi);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3)
    throw InsufficientData("fit_decay: need >= 3 centroids with distinct phi");

  const auto n = static_cast<Index>(centroids.size());
  Objective obj;
  obj.e.resize(n);
  obj.psi.resize(n);
  obj.w.resize(n);
  Scalar psi_min = centroids[0].psi, psi_max = centroids[0].psi;
  for (Index i = 0; i < n; ++i) {
    obj.e[i] = std::exp(-centroids[i].phi);
    obj.psi[i] = centroids[i].psi;
    obj.w[i] = config.count_weighted ? static_cast<Scalar>(centroids[i].count) : 1.0;
    psi_min = std::min(psi_min, centroids[i].psi);
    psi_max = std::max(psi_max, centroids[i].psi);
  }

  Scalar a = psi_max - psi_min;
  Scalar b = psi_min;
  Scalar damping = 1e-3;
  Scalar f = obj.value(a, b);
  bool converged = false;
  int iter = 0;

  Eigen::Vector2d grad;
  Eigen::Matrix2d jtj;
  for (; iter < config.max_iterations; ++iter) {
    obj.derivatives(a, b, grad, jtj);
    if (grad.norm() < config.gradient_tolerance) {
      converged = true;
      break;
    }
    Eigen::Matrix2d damped = jtj;
    damped(0, 0) += damping * jtj(0, 0);
    damped(1, 1) += damping * jtj(1, 1);
    // Step solves (J^T W J + damping*diag) d = J^T W r; grad = -2 J^T W r.
    const Eigen::Vector2d step = damped.ldlt().solve(-0.5 * grad);
    const Scalar f_new = obj.value(a + step[0], b + step[1]);
    if (f_new < f) {
      a += step[0];
      b += step[1];
      f = f_new;
      damping = std::max(damping * 0.3, 1e-12);
    } else {
      damping = std::min(damping * 10.0, 1e12);
    }
  }
  if (!converged) {
    obj.derivatives(a, b, grad, jtj);
    converged = grad.norm() < config.gradient_tolerance;
  }

  DecayFit fit;
  fit.a = a;
  fit.b = b;
  fit.iterations = iter;
  fit.converged = converged;

  const Scalar w_total = obj.w.sum();
  const Scalar ss_res = obj.value(a, b);
  fit.rmse = std::sqrt(ss_res / w_total);
  const Scalar psi_mean = (obj.w.array() * obj.psi.array()).sum() / w_total;
  const Scalar ss_tot = (obj.w.array() * (obj.psi.array() - psi_mean).square()).sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.centroids = std::move(centroids);
  return fit;
}

Scalar predict_decay(const DecayFit& fit, Scalar u) {
  return fit.a * std::exp(-u) + fit.b;
}

}  // namespace metacog
