#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "bmdl/chain.hpp"
#include "bmdl/count_tensor.hpp"
#include "bmdl/model.hpp"
#include "bmdl/random.hpp"

namespace bmdl {

/// Global factors held fixed while extracting per-sample scores.
struct FrozenFactors {
  Eigen::MatrixXd phi;       // V x K, columns on the simplex
  Eigen::VectorXd r_target;  // K, target-domain weights from the last sample
  Hyperparameters hp;
  ModelVariant variant = ModelVariant::BMDL;
  std::vector<std::string> gene_ids;  // empty skips the id comparison

  /// Posterior-mean loadings and last-sample weights of domain `target`.
  static FrozenFactors from_summary(const PosteriorSummary& summary, std::size_t target,
                                    const Hyperparameters& hp, ModelVariant variant,
                                    std::vector<std::string> gene_ids = {});

  /// Throws ParameterError when phi is not column-stochastic or r has a negative entry.
  void validate() const;
  int num_factors() const { return static_cast<int>(phi.cols()); }
};

struct ExtractionConfig {
  int iterations = 1000;
  int collect_last = 500;
  void validate() const;
};

struct FeatureMatrix {
  Eigen::MatrixXd theta_bar;  // J x K
  std::vector<std::string> sample_ids;
  std::optional<std::vector<int>> labels;

  std::size_t num_samples() const { return static_cast<std::size_t>(theta_bar.rows()); }
  int num_factors() const { return static_cast<int>(theta_bar.cols()); }
};

/// Posterior-mean factor scores for every sample of `samples`.
///
/// Sample j runs its own blocked Gibbs chain over {l and split, theta_j, p_j, c_j}
/// on stream `rng.split(j)`, so results depend only on (rng seed, j, counts).
/// `gene_ids`, when non-empty, must equal `frozen.gene_ids` (if that is non-empty).
FeatureMatrix extract(const SparseCounts& samples, const FrozenFactors& frozen,
                      const ExtractionConfig& config, const RandomStream& rng,
                      const std::vector<std::string>& gene_ids = {});

FeatureMatrix extract(const DomainData& domain, const std::vector<std::string>& gene_ids,
                      const FrozenFactors& frozen, const ExtractionConfig& config,
                      const RandomStream& rng);

}  // namespace bmdl
