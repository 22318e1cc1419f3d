#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bmdl/count_tensor.hpp"
#include "bmdl/distributions.hpp"
#include "bmdl/random.hpp"

namespace bmdl {

/// Fixed scalars of the hierarchical prior, plus truncation K and the CRT cutoff.
///
/// Gamma priors are shape/scale: c_j ~ Gamma(e0, 1/f0), c_d ~ Gamma(h0, 1/u0),
/// eta ~ Gamma(s0, 1/w0), c0 ~ Gamma(s0, 1/t0), gamma0 ~ Gamma(a0, 1/b0),
/// p ~ Beta(a0, b0), pi_k ~ Beta(c/K, c(1 - 1/K)).
struct Hyperparameters {
  int K = 100;
  double a0 = 0.01, b0 = 0.01;
  double e0 = 0.01, f0 = 0.01;
  double h0 = 0.01, u0 = 0.01;
  double s0 = 0.01, w0 = 0.01;
  double t0 = 0.01;
  double c_ibp = 1.0;
  std::int64_t crt_cutoff = dist::kDefaultCrtCutoff;

  /// Throws ParameterError unless every scalar is strictly positive and finite.
  void validate() const;

  /// Same structure with every prior scalar (not K or the cutoff) set to `value`.
  Hyperparameters with_all_priors(double value) const;
};

enum class ModelVariant { BMDL, HGNBP, HDP_NBFA, NB_HDP, TARGET_ONLY };

std::string_view to_string(ModelVariant v);
ModelVariant parse_variant(std::string_view name);

inline bool pins_z(ModelVariant v) {
  return v == ModelVariant::HGNBP || v == ModelVariant::HDP_NBFA || v == ModelVariant::NB_HDP;
}
inline bool pins_sample_scale(ModelVariant v) {
  return v == ModelVariant::HDP_NBFA || v == ModelVariant::NB_HDP;
}
inline bool pins_p(ModelVariant v) { return v == ModelVariant::NB_HDP; }

inline constexpr double kPinnedP = 0.5;
inline constexpr double kPinnedSampleScale = 1.0;
inline constexpr int kInitAttempts = 1000;

/// One full assignment of the model's latent variables.
struct LatentState {
  Eigen::MatrixXd phi;                 // V x K, columns on the simplex
  std::vector<Eigen::MatrixXd> theta;  // per domain, K x J_d
  Eigen::MatrixXd r;                   // K x D
  Eigen::VectorXd s;                   // K
  Eigen::MatrixXi z;                   // K x D, entries 0/1
  Eigen::VectorXd pi;                  // K
  std::vector<Eigen::VectorXd> p;      // per domain, J_d
  std::vector<Eigen::VectorXd> c_j;    // per domain, J_d
  Eigen::VectorXd c_d;                 // D
  double c0 = 1.0;
  double gamma0 = 1.0;
  double eta = 1.0;

  int num_factors() const { return static_cast<int>(phi.cols()); }
  std::size_t num_domains() const { return theta.size(); }

  friend bool operator==(const LatentState& a, const LatentState& b);
};

/// Draws every latent variable from its prior, then applies the variant's pins.
LatentState init_state(const CountTensor& tensor, const Hyperparameters& hp, ModelVariant variant,
                       RandomStream& rng);

/// Fixed overdispersed starting point: every selector on, unit scales and
/// weights, theta_kj ~ Gamma(1, 1), phi columns ~ Dir(1, ..., 1), then pins.
/// Starting from prior draws under vague hyperparameters leaves almost every
/// factor with r = 0 and theta = 0, a region the sampler rarely leaves.
LatentState init_dispersed(const CountTensor& tensor, const Hyperparameters& hp,
                           ModelVariant variant, RandomStream& rng);

enum class InitStrategy { Dispersed, Prior };
std::string_view to_string(InitStrategy s);
InitStrategy parse_init_strategy(std::string_view name);

LatentState initialize(const CountTensor& tensor, const Hyperparameters& hp, ModelVariant variant,
                       InitStrategy strategy, RandomStream& rng);

/// Sets the coordinates pinned by `variant` to their fixed values.
void apply_pins(LatentState& state, ModelVariant variant);

/// Throws ParameterError when `state` is not shaped for `tensor` or violates a
/// support invariant (phi columns off the simplex, negative scores, z not binary ...).
void check_state(const CountTensor& tensor, const LatentState& state, const Hyperparameters& hp);

/// Unnormalized log joint density: NB likelihood of every count with sub-counts
/// marginalized, plus all prior terms. Point masses contribute 0 when consistent
/// and -infinity otherwise.
double log_joint(const CountTensor& tensor, const LatentState& state, const Hyperparameters& hp);

namespace logpdf {
double gamma(double x, double shape, double scale);
double beta(double x, double a, double b);
double negative_binomial(std::int64_t n, double r, double p);
}  // namespace logpdf

}  // namespace bmdl
