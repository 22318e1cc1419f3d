#include "bmdl/distributions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "bmdl/error.hpp"

namespace bmdl::dist {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

[[noreturn]] void domain_fail(const char* what, double value) {
  throw ParameterError(std::string(what) + " (got " + std::to_string(value) + ")");
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) domain_fail(what, x);
}

// Categorical draw by inverse CDF over cumulative weights.
std::size_t draw_category(std::span<const double> cumulative, RandomStream& rng) {
  const double target = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  if (it == cumulative.end()) --it;
  // Skip zero-width categories that upper_bound can land on when target hits a tie.
  auto idx = static_cast<std::size_t>(it - cumulative.begin());
  while (idx > 0 && cumulative[idx] == cumulative[idx - 1]) --idx;
  return idx;
}

}  // namespace

double sample_log_gamma(double shape, RandomStream& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) domain_fail("gamma shape must be positive", shape);
  if (shape >= 1.0) {
    std::gamma_distribution<double> g(shape, 1.0);
    return std::log(g(rng));
  }
  // Gamma(a) = Gamma(a + 1) * U^(1/a), evaluated in log space.
  std::gamma_distribution<double> g(shape + 1.0, 1.0);
  const double base = std::log(g(rng));
  return base + std::log(rng.uniform_open()) / shape;
}

double sample_gamma(GammaParams params, RandomStream& rng) {
  require_finite(params.shape, "gamma shape must be finite");
  if (params.shape < 0.0) domain_fail("gamma shape must be non-negative", params.shape);
  if (!(params.scale > 0.0) || !std::isfinite(params.scale))
    domain_fail("gamma scale must be positive and finite", params.scale);
  if (params.shape == 0.0) return 0.0;

  double x;
  if (params.shape >= 1.0) {
    std::gamma_distribution<double> g(params.shape, 1.0);
    x = g(rng) * params.scale;
  } else {
    x = std::exp(sample_log_gamma(params.shape, rng) + std::log(params.scale));
  }
  if (!std::isfinite(x)) throw NumericError("gamma draw overflowed");
  return std::max(x, kTiny);
}

double sample_beta(double a, double b, RandomStream& rng) {
  require_finite(a, "beta parameter must be finite");
  require_finite(b, "beta parameter must be finite");
  if (!(a > 0.0)) domain_fail("beta parameter a must be positive", a);
  if (!(b > 0.0)) domain_fail("beta parameter b must be positive", b);
  const double la = sample_log_gamma(a, rng);
  const double lb = sample_log_gamma(b, rng);
  const double x = 1.0 / (1.0 + std::exp(lb - la));
  return std::clamp(x, kBetaClamp, 1.0 - kBetaClamp);
}

void sample_dirichlet_into(std::span<const double> concentrations, std::span<double> out,
                           RandomStream& rng) {
  if (concentrations.empty()) throw ParameterError("dirichlet needs at least one component");
  if (out.size() != concentrations.size()) throw ParameterError("dirichlet output size mismatch");
  for (double c : concentrations) {
    require_finite(c, "dirichlet concentration must be finite");
    if (!(c > 0.0)) domain_fail("dirichlet concentration must be positive", c);
  }
  if (concentrations.size() == 1) {
    out[0] = 1.0;
    return;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < concentrations.size(); ++i) {
    out[i] = sample_log_gamma(concentrations[i], rng);
    top = std::max(top, out[i]);
  }
  double total = 0.0;
  for (double& x : out) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : out) x = std::max(x / total, kTiny);
}

std::vector<double> sample_dirichlet(std::span<const double> concentrations, RandomStream& rng) {
  std::vector<double> out(concentrations.size());
  sample_dirichlet_into(concentrations, out, rng);
  return out;
}

std::int64_t sample_poisson(double rate, RandomStream& rng) {
  require_finite(rate, "poisson rate must be finite");
  if (rate < 0.0) domain_fail("poisson rate must be non-negative", rate);
  if (rate == 0.0) return 0;
  if (rate > 1e12) {
    if (rate > 4e18) throw NumericError("poisson rate exceeds the representable count range");
    // Skewness is below 1e-6 here; the normal limit is exact to double precision in practice.
    std::normal_distribution<double> normal(0.0, 1.0);
    const double x = std::round(rate + std::sqrt(rate) * normal(rng));
    return static_cast<std::int64_t>(std::max(0.0, x));
  }
  std::poisson_distribution<std::int64_t> pois(rate);
  return pois(rng);
}

std::int64_t sample_binomial(std::int64_t trials, double prob, RandomStream& rng) {
  if (trials < 0) domain_fail("binomial trials must be non-negative", static_cast<double>(trials));
  require_finite(prob, "binomial probability must be finite");
  if (prob < 0.0 || prob > 1.0) domain_fail("binomial probability must lie in [0, 1]", prob);
  if (trials == 0 || prob == 0.0) return 0;
  if (prob == 1.0) return trials;
  std::binomial_distribution<std::int64_t> binom(trials, prob);
  return binom(rng);
}

bool sample_bernoulli(double prob, RandomStream& rng) {
  require_finite(prob, "bernoulli probability must be finite");
  if (prob < 0.0 || prob > 1.0) domain_fail("bernoulli probability must lie in [0, 1]", prob);
  return rng.uniform() < prob;
}

std::vector<std::int64_t> sample_multinomial(std::int64_t total, std::span<const double> probs,
                                             RandomStream& rng) {
  if (total < 0) domain_fail("multinomial total must be non-negative", static_cast<double>(total));
  if (probs.empty()) throw ParameterError("multinomial needs at least one category");
  double sum = 0.0;
  for (double p : probs) {
    require_finite(p, "multinomial probability must be finite");
    if (p < 0.0) domain_fail("multinomial probability must be non-negative", p);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) domain_fail("multinomial probabilities must sum to 1", sum);
  std::vector<std::int64_t> out(probs.size(), 0);
  split_counts(total, probs, sum, out, rng);
  return out;
}

void split_counts(std::int64_t total, std::span<const double> weights, double weight_sum,
                  std::span<std::int64_t> out, RandomStream& rng) {
  const std::size_t n = weights.size();
  if (total <= 0) return;
  if (n == 1) {
    out[0] += total;
    return;
  }

  if (total <= static_cast<std::int64_t>(2 * n) && n <= 512) {
    std::array<double, 512> cumulative;
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += weights[k];
      cumulative[k] = acc;
    }
    const std::span<const double> cdf(cumulative.data(), n);
    for (std::int64_t i = 0; i < total; ++i) ++out[draw_category(cdf, rng)];
    return;
  }

  std::size_t last = n;
  for (std::size_t k = n; k-- > 0;) {
    if (weights[k] > 0.0) {
      last = k;
      break;
    }
  }
  std::int64_t left = total;
  double mass = weight_sum;
  for (std::size_t k = 0; k < n && left > 0; ++k) {
    if (k == last) {
      out[k] += left;
      break;
    }
    if (weights[k] <= 0.0) continue;
    const double p = mass > 0.0 ? std::min(1.0, weights[k] / mass) : 1.0;
    const std::int64_t x = sample_binomial(left, p, rng);
    out[k] += x;
    left -= x;
    mass -= weights[k];
  }
}

std::int64_t sample_crt_exact(std::int64_t n, double r, RandomStream& rng) {
  if (n < 0) domain_fail("CRT customer count must be non-negative", static_cast<double>(n));
  require_finite(r, "CRT concentration must be finite");
  if (r < 0.0) domain_fail("CRT concentration must be non-negative", r);
  if (n == 0 || r == 0.0) return 0;
  std::int64_t tables = 1;
  for (std::int64_t t = 1; t < n; ++t) {
    // customer t + 1 opens a table with probability r / (r + t)
    if (rng.uniform() * (r + static_cast<double>(t)) < r) ++tables;
  }
  return tables;
}

std::int64_t sample_crt_approx(std::int64_t n, double r, std::int64_t cutoff, RandomStream& rng) {
  if (cutoff < 1) domain_fail("CRT cutoff must be at least 1", static_cast<double>(cutoff));
  if (n <= cutoff) return sample_crt_exact(n, r, rng);
  if (r == 0.0) return 0;
  const std::int64_t head = sample_crt_exact(cutoff, r, rng);
  const double tail_rate = r * (digamma(static_cast<double>(n) + r) -
                                digamma(static_cast<double>(cutoff) + r));
  return head + sample_poisson(std::max(0.0, tail_rate), rng);
}

std::int64_t sample_logarithmic(double p, RandomStream& rng) {
  require_finite(p, "logarithmic parameter must be finite");
  if (!(p > 0.0 && p < 1.0)) domain_fail("logarithmic parameter must lie in (0, 1)", p);
  // Kemp's accelerated generator (LK).
  const double log_q0 = std::log1p(-p);
  for (;;) {
    const double v = rng.uniform();
    if (v >= p) return 1;
    const double u = rng.uniform();
    const double q = -std::expm1(log_q0 * u);
    if (v <= q * q) {
      if (v == 0.0) continue;
      const double x = std::floor(1.0 + std::log(v) / std::log(q));
      if (x < 1.0 || !std::isfinite(x)) continue;
      return static_cast<std::int64_t>(x);
    }
    return v >= q ? 1 : 2;
  }
}

double digamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) domain_fail("digamma argument must be positive", x);
  double shift = 0.0;
  while (x < 6.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Asymptotic series in 1/x^2 (Bernoulli numbers B_2..B_14).
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

}  // namespace bmdl::dist
