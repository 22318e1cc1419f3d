#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bmdl/chain.hpp"
#include "bmdl/features.hpp"
#include "bmdl/model.hpp"
#include "bmdl/synth.hpp"

namespace bmdl {

/// Linear max-margin classifier. Objective:
///   0.5 |w|^2 + (C / n) sum_i max(0, 1 - y_i (w.x_i + b)),
/// i.e. C weighs the mean hinge loss, so duplicating every point leaves the
/// solution unchanged.
struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double C = 1.0;
  int positive_label = 1;  // the larger of the two training labels
  int negative_label = 0;

  double score(const Eigen::Ref<const Eigen::VectorXd>& x) const { return weights.dot(x) + bias; }
  /// A score of exactly 0 goes to the positive class.
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return score(x) >= 0.0 ? positive_label : negative_label;
  }
};

struct SvmOptions {
  double tolerance = 1e-6;  // maximal KKT violation at exit
  long max_iterations = 10'000'000;
};

/// Dual solution exposed for certification.
struct SvmSolution {
  LinearModel model;
  Eigen::VectorXd alpha;  // in [0, C/n]
  double primal = 0.0;
  double dual = 0.0;
  long iterations = 0;
};

/// SMO on the dual with second-order working-set selection. Deterministic.
/// Throws DataError unless the labels take exactly two values.
SvmSolution solve_linear_svm(const Eigen::MatrixXd& X, const std::vector<int>& labels, double C,
                             const SvmOptions& options = {});

LinearModel train_linear(const Eigen::MatrixXd& X, const std::vector<int>& labels, double C = 1.0);
LinearModel train_linear(const FeatureMatrix& features, double C = 1.0);

/// Primal objective of (w, b) on the data, for certificates and tests.
double svm_primal(const Eigen::MatrixXd& X, const std::vector<int>& labels, double C,
                  const Eigen::VectorXd& w, double b, int positive_label);

double evaluate(const LinearModel& model, const Eigen::MatrixXd& X, const std::vector<int>& labels);
double evaluate(const LinearModel& model, const FeatureMatrix& features);

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
};

struct ExperimentReport {
  std::string condition;
  ModelVariant variant = ModelVariant::BMDL;
  std::vector<RunRecord> runs;
  double mean = 0.0;
  double std = 0.0;         // sample standard deviation (n - 1)
  std::string fingerprint;  // JSON object text

  /// Recomputes mean and std from `runs`.
  void summarize();
  std::vector<double> accuracies() const;
};

/// One synthetic condition evaluated for several variants over repeated runs.
struct ExperimentSpec {
  std::string condition = "default";
  SynthConfig data;
  std::vector<ModelVariant> variants{ModelVariant::BMDL, ModelVariant::TARGET_ONLY};
  int runs = 10;
  Hyperparameters hp;
  ChainConfig chain;
  ExtractionConfig extraction;
  double C = 1.0;
  std::uint64_t seed = 1;

  /// Dataset seed of run `r`: shared by every variant and every condition
  /// derived from the same spec, so comparisons are paired.
  std::uint64_t run_seed(int r) const { return derive_seed(seed, static_cast<std::uint64_t>(r)); }
};

/// Result of a single (variant, run) job, exposed for diagnostics.
struct RunOutcome {
  double accuracy = 0.0;
  PosteriorSummary summary;
  FeatureMatrix train;
  FeatureMatrix test;
};

/// Fit on all source samples plus the target training samples (target only for
/// TARGET_ONLY), extract target train/test features, train, score the test set.
RunOutcome run_single(const ExperimentSpec& spec, const SynthDataset& data, ModelVariant variant,
                      std::uint64_t chain_seed);

std::vector<ExperimentReport> run_experiment(const ExperimentSpec& spec);

/// Grid over shared-factor counts and target sizes; empty lists keep the base value.
struct SweepSpec {
  ExperimentSpec base;
  std::vector<int> shared_levels;
  std::vector<int> target_sizes;
};

std::vector<ExperimentReport> run_sweep(const SweepSpec& spec);

/// condition,variant,run,seed,accuracy
std::string report_rows_csv(const std::vector<ExperimentReport>& reports);
/// condition,variant,runs,mean,std,fingerprint
std::string report_summary_csv(const std::vector<ExperimentReport>& reports);

}  // namespace bmdl
