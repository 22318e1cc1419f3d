#pragma once

// Small statistics helpers shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "bmdl/count_tensor.hpp"

namespace testing_support {

inline double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

// Computed on x / max|x| so that subnormal or huge samples keep their spread.
inline double std_error(const std::vector<double>& x) {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (!(scale > 0.0) || !std::isfinite(scale)) return std::sqrt(variance(x) / static_cast<double>(x.size()));
  std::vector<double> y;
  y.reserve(x.size());
  for (double v : x) y.push_back(v / scale);
  return scale * std::sqrt(variance(y) / static_cast<double>(x.size()));
}

/// Standard error of the mean of an autocorrelated series, by batch means.
inline double batch_means_se(const std::vector<double>& x, std::size_t batches = 50) {
  const std::size_t b = x.size() / batches;
  std::vector<double> means;
  for (std::size_t i = 0; i < batches; ++i) {
    double s = 0.0;
    for (std::size_t t = i * b; t < (i + 1) * b; ++t) s += x[t];
    means.push_back(s / static_cast<double>(b));
  }
  return std::sqrt(variance(means) / static_cast<double>(batches));
}

/// Two-sample Kolmogorov-Smirnov statistic.
template <typename T>
double ks_statistic(std::vector<T> a, std::vector<T> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const T x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Asymptotic two-sample KS critical value at level alpha = 0.01.
inline double ks_critical_01(std::size_t n, std::size_t m) {
  const double c = 1.628;  // sqrt(-log(0.01 / 2) / 2)
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

/// Exact CRT mean by direct summation.
inline double crt_mean_oracle(std::int64_t n, double r) {
  double s = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) s += r / (r + static_cast<double>(i) - 1.0);
  return s;
}

inline double crt_variance_oracle(std::int64_t n, double r) {
  double s = 0.0;
  for (std::int64_t i = 1; i <= n; ++i) {
    const double p = r / (r + static_cast<double>(i) - 1.0);
    s += p * (1.0 - p);
  }
  return s;
}

/// Tensor with the given dense [domain][gene][sample] counts.
inline bmdl::CountTensor make_tensor(const std::vector<std::vector<std::vector<std::int64_t>>>& dense) {
  bmdl::CountTensor t;
  const std::size_t V = dense.front().size();
  for (std::size_t v = 0; v < V; ++v) t.gene_ids.push_back("g" + std::to_string(v));
  for (std::size_t d = 0; d < dense.size(); ++d) {
    bmdl::DomainData dom;
    dom.name = "d" + std::to_string(d);
    dom.counts = bmdl::SparseCounts::from_dense(dense[d]);
    dom.counts.num_genes = V;
    for (std::size_t j = 0; j < dom.counts.num_samples(); ++j)
      dom.sample_ids.push_back(dom.name + "_s" + std::to_string(j));
    t.domains.push_back(std::move(dom));
  }
  return t;
}

/// All-zero tensor of the given shape.
inline bmdl::CountTensor zero_tensor(std::size_t V, const std::vector<std::size_t>& J) {
  std::vector<std::vector<std::vector<std::int64_t>>> dense;
  for (auto j : J) dense.push_back(std::vector<std::vector<std::int64_t>>(V, std::vector<std::int64_t>(j, 0)));
  return make_tensor(dense);
}

/// |a - b| within k standard errors of the difference of two independent means.
inline bool within_se(double a, double se_a, double b, double se_b, double k = 3.0) {
  return std::abs(a - b) <= k * std::sqrt(se_a * se_a + se_b * se_b);
}

}  // namespace testing_support
