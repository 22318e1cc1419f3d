#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "bmdl/count_tensor.hpp"
#include "bmdl/random.hpp"

namespace bmdl {

/// Two-domain (or target-only) generator with a controllable number of
/// loading columns shared between the source and the target domain.
///
/// Sample class is carried only by the sample scale: c_j ~ Gamma(a_class, scale).
struct SynthConfig {
  int num_features = 1000;
  int factors_per_domain = 50;
  int shared_factors = 0;
  int source_samples = 200;  // 0 generates a single (target) domain
  int target_samples = 20;
  int test_samples = -1;     // fresh target draws for scoring; -1 means target_samples
  bool balanced = true;
  std::array<double, 2> class_scale_a{100.0, 150.0};
  double class_scale_scale = 0.01;
  double dirichlet_eta = 0.1;

  // Global draws of the generative chain; see the ledger for why these are
  // not the vague 0.01 priors.
  double gamma0 = -1.0;  // -1 means factors_per_domain, i.e. s_k ~ Gamma(1, 1/c0)
  double c0 = 1.0;
  double c_d = 1.0;
  std::array<double, 2> p_beta{990.0, 10.0};

  std::uint64_t seed = 1;

  void validate() const;
  int effective_test_samples() const { return test_samples < 0 ? target_samples : test_samples; }
  double effective_gamma0() const { return gamma0 < 0 ? factors_per_domain : gamma0; }
};

struct SynthTruth {
  Eigen::MatrixXd phi;    // V x K_true
  Eigen::VectorXd s;      // K_true
  Eigen::VectorXd r;      // K_true
  Eigen::MatrixXd theta;  // K_true x J
  Eigen::VectorXd p;      // J
  Eigen::VectorXd c_j;    // J
};

struct SynthDataset {
  CountTensor tensor;           // source first (when present), target last
  std::size_t target_index = 0;
  std::vector<SynthTruth> truth;  // per tensor domain
  DomainData test;                // fresh target-domain draws, labelled
  SynthTruth test_truth;          // phi/r/s copied from the target domain
  std::vector<bool> shared_mask;  // per target column: copied from the source?
  std::vector<int> shared_source_column;  // source column index or -1
};

/// Deterministic in (config, config.seed). Every generative component draws
/// from its own split stream, so changing `shared_factors` alters only the
/// target loading matrix.
SynthDataset generate(const SynthConfig& config);

}  // namespace bmdl
