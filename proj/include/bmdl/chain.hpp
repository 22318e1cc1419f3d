#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bmdl/count_tensor.hpp"
#include "bmdl/gibbs.hpp"
#include "bmdl/model.hpp"
#include "bmdl/random.hpp"

namespace bmdl {

struct ChainConfig {
  int iterations = 3000;
  int burn_in = 1500;
  int thin = 1;

  bool collect_phi = true;
  bool collect_r = true;
  bool collect_s = true;
  bool collect_z = true;
  bool collect_log_joint = true;

  /// When false, pi and the c-scales keep their initial prior draws.
  bool resample_pi = true;
  bool resample_scales = true;
  InitStrategy init = InitStrategy::Dispersed;

  /// Throws ParameterError unless iterations > 0, 0 <= burn_in < iterations, thin > 0.
  void validate() const;
};

/// Factors whose weight exceeds `relative` times the largest weight.
int active_factor_count(const Eigen::VectorXd& weights, double relative = 0.01);

struct PosteriorSummary {
  Eigen::MatrixXd phi_mean;      // V x K; mean over collected samples (last phi if none collected)
  Eigen::MatrixXd r_mean;        // K x D
  Eigen::VectorXd s_mean;        // K
  Eigen::MatrixXd z_activation;  // K x D, fraction of collected samples with z = 1
  Eigen::MatrixXd r_last;        // K x D
  Eigen::MatrixXi z_last;        // K x D
  std::vector<double> log_joint_trace;
  std::vector<int> active_factor_count;  // per domain, on r_last
  int samples_collected = 0;
  int iterations = 0;
  std::int64_t degenerate_entries = 0;
  LatentState final_state;
};

/// Resumable Gibbs chain over a fixed tensor.
///
/// The chain owns its random stream, the latent state, and every running
/// accumulator, so a checkpoint taken at any iteration boundary continues
/// bit-identically.
class Chain {
 public:
  static constexpr int kCheckpointVersion = 1;

  /// Draws the initial state per `config.init` with `rng`.
  Chain(const CountTensor& tensor, Hyperparameters hp, ModelVariant variant, ChainConfig config,
        RandomStream rng);

  /// Rebuilds a chain from `checkpoint_text()`; throws CheckpointError when the
  /// format, version, or tensor fingerprint does not match.
  static Chain from_checkpoint(const CountTensor& tensor, const std::string& text);
  static Chain load(const CountTensor& tensor, const std::filesystem::path& path);

  int iteration() const { return iteration_; }
  bool done() const { return iteration_ >= config_.iterations; }

  /// One sweep plus bookkeeping. No-op once done().
  void step();
  void run_until(int iteration);
  void run() { run_until(config_.iterations); }

  PosteriorSummary summary() const;

  const LatentState& state() const { return state_; }
  const Hyperparameters& hyperparameters() const { return hp_; }
  ModelVariant variant() const { return variant_; }
  const ChainConfig& config() const { return config_; }
  const RandomStream& stream() const { return rng_; }

  /// Lets a caller extend or shorten a resumed run.
  void set_iterations(int iterations);

  /// Free-form JSON object text carried through checkpoints untouched.
  const std::string& metadata() const { return metadata_; }
  void set_metadata(std::string json_object) { metadata_ = std::move(json_object); }

  std::string checkpoint_text() const;
  void save(const std::filesystem::path& path) const;

 private:
  Chain(const CountTensor& tensor, Hyperparameters hp, ModelVariant variant, ChainConfig config,
        RandomStream rng, LatentState state);
  void reset_accumulators();

  const CountTensor* tensor_;
  Hyperparameters hp_;
  ModelVariant variant_;
  ChainConfig config_;
  RandomStream rng_;
  LatentState state_;
  AugmentedCounts aug_;
  int iteration_ = 0;

  int collected_ = 0;
  Eigen::MatrixXd phi_sum_, r_sum_, z_sum_;
  Eigen::VectorXd s_sum_;
  std::vector<double> log_joint_trace_;
  std::int64_t degenerate_entries_ = 0;
  std::string metadata_ = "{}";
};

/// init + config.iterations sweeps.
PosteriorSummary run_chain(const CountTensor& tensor, const Hyperparameters& hp,
                           ModelVariant variant, const ChainConfig& config, RandomStream& rng);

}  // namespace bmdl
