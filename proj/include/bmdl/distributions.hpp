#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bmdl/random.hpp"

namespace bmdl::dist {

/// Gamma distribution in shape/scale form (scale = 1 / rate).
/// shape == 0 is the point mass at zero.
struct GammaParams {
  double shape;
  double scale;
};

/// Default Chinese-restaurant-table cutoff for the approximate sampler.
inline constexpr std::int64_t kDefaultCrtCutoff = 1000;

/// Beta draws are kept inside [kBetaClamp, 1 - kBetaClamp] so -log(1 - p) stays finite.
inline constexpr double kBetaClamp = 1e-12;

double sample_gamma(GammaParams params, RandomStream& rng);
inline double sample_gamma(double shape, double scale, RandomStream& rng) {
  return sample_gamma(GammaParams{shape, scale}, rng);
}

/// log of a Gamma(shape, 1) variate; stays finite where the variate itself underflows.
double sample_log_gamma(double shape, RandomStream& rng);

double sample_beta(double a, double b, RandomStream& rng);

std::vector<double> sample_dirichlet(std::span<const double> concentrations, RandomStream& rng);

/// Writes a Dirichlet draw into `out` (same length as `concentrations`).
void sample_dirichlet_into(std::span<const double> concentrations, std::span<double> out,
                           RandomStream& rng);

std::int64_t sample_poisson(double rate, RandomStream& rng);

std::int64_t sample_binomial(std::int64_t trials, double prob, RandomStream& rng);

bool sample_bernoulli(double prob, RandomStream& rng);

/// `probs` must be non-negative and sum to 1 within 1e-9.
std::vector<std::int64_t> sample_multinomial(std::int64_t total, std::span<const double> probs,
                                             RandomStream& rng);

/// Multinomial split of `total` over non-negative `weights` with known positive sum;
/// adds the category counts into `out`. No validation: this is the sampler's inner loop.
void split_counts(std::int64_t total, std::span<const double> weights, double weight_sum,
                  std::span<std::int64_t> out, RandomStream& rng);

/// Number of occupied tables after `n` customers with concentration `r`:
/// sum of Bernoulli(r / (r + t - 1)), t = 1..n.
std::int64_t sample_crt_exact(std::int64_t n, double r, RandomStream& rng);

/// CRT(m, r) + Poisson(r [psi(n + r) - psi(m + r)]) when n > m, exact otherwise.
std::int64_t sample_crt_approx(std::int64_t n, double r, std::int64_t cutoff, RandomStream& rng);

/// Logarithmic-series variate: P(u) = -p^u / (u log(1 - p)), u >= 1.
std::int64_t sample_logarithmic(double p, RandomStream& rng);

double digamma(double x);

}  // namespace bmdl::dist
