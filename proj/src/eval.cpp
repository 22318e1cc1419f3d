#include "bmdl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "bmdl/error.hpp"
#include "bmdl/serialize.hpp"

namespace bmdl {

namespace {

struct BinaryLabels {
  std::vector<double> y;
  int positive = 1;
  int negative = 0;
};

BinaryLabels encode_labels(const std::vector<int>& labels) {
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() != 2)
    throw DataError("linear classifier needs exactly two classes, got " +
                    std::to_string(distinct.size()));
  BinaryLabels out;
  out.negative = *distinct.begin();
  out.positive = *distinct.rbegin();
  out.y.reserve(labels.size());
  for (int l : labels) out.y.push_back(l == out.positive ? 1.0 : -1.0);
  return out;
}

}  // namespace

double svm_primal(const Eigen::MatrixXd& X, const std::vector<int>& labels, double C,
                  const Eigen::VectorXd& w, double b, int positive_label) {
  const auto n = X.rows();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = labels[static_cast<std::size_t>(i)] == positive_label ? 1.0 : -1.0;
    loss += std::max(0.0, 1.0 - y * (X.row(i).dot(w) + b));
  }
  return 0.5 * w.squaredNorm() + C / static_cast<double>(n) * loss;
}

SvmSolution solve_linear_svm(const Eigen::MatrixXd& X, const std::vector<int>& labels, double C,
                             const SvmOptions& options) {
  if (!(C > 0) || !std::isfinite(C)) throw ParameterError("C must be positive and finite");
  if (static_cast<std::size_t>(X.rows()) != labels.size())
    throw DataError("feature rows and labels differ in length");
  if (!X.allFinite()) throw DataError("features contain non-finite values");
  const auto enc = encode_labels(labels);
  const auto n = X.rows();
  const double U = C / static_cast<double>(n);
  const double tau = 1e-12;

  const Eigen::MatrixXd K = X * X.transpose();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = enc.y[static_cast<std::size_t>(i)];

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd G = Eigen::VectorXd::Constant(n, -1.0);  // Q alpha - e
  auto in_up = [&](Eigen::Index t) { return (y(t) > 0 && alpha(t) < U) || (y(t) < 0 && alpha(t) > 0); };
  auto in_low = [&](Eigen::Index t) { return (y(t) > 0 && alpha(t) > 0) || (y(t) < 0 && alpha(t) < U); };

  long iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    Eigen::Index i = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t)
      if (in_up(t) && -y(t) * G(t) > gmax) {
        gmax = -y(t) * G(t);
        i = t;
      }
    Eigen::Index j = -1;
    double gmin = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y(t) * G(t);
      gmin = std::min(gmin, v);
      if (i < 0) continue;
      const double b = gmax - v;
      if (b > 0) {
        double a = K(i, i) + K(t, t) - 2.0 * K(i, t);
        if (a <= 0) a = tau;
        const double obj = -(b * b) / a;
        if (obj < best) {
          best = obj;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < options.tolerance) break;

    const double old_i = alpha(i), old_j = alpha(j);
    const double Qij = y(i) * y(j) * K(i, j);
    if (y(i) != y(j)) {
      double quad = K(i, i) + K(j, j) + 2.0 * Qij;
      if (quad <= 0) quad = tau;
      const double delta = (-G(i) - G(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0) {
        if (alpha(j) < 0) { alpha(j) = 0; alpha(i) = diff; }
      } else {
        if (alpha(i) < 0) { alpha(i) = 0; alpha(j) = -diff; }
      }
      if (diff > 0) {
        if (alpha(i) > U) { alpha(i) = U; alpha(j) = U - diff; }
      } else {
        if (alpha(j) > U) { alpha(j) = U; alpha(i) = U + diff; }
      }
    } else {
      double quad = K(i, i) + K(j, j) - 2.0 * Qij;
      if (quad <= 0) quad = tau;
      const double delta = (G(i) - G(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > U) {
        if (alpha(i) > U) { alpha(i) = U; alpha(j) = sum - U; }
      } else {
        if (alpha(j) < 0) { alpha(j) = 0; alpha(i) = sum; }
      }
      if (sum > U) {
        if (alpha(j) > U) { alpha(j) = U; alpha(i) = sum - U; }
      } else {
        if (alpha(i) < 0) { alpha(i) = 0; alpha(j) = sum; }
      }
    }
    const double di = alpha(i) - old_i, dj = alpha(j) - old_j;
    // G_t += Q_ti di + Q_tj dj
    G.array() += (y.array() * K.col(i).array()) * (y(i) * di) + (y.array() * K.col(j).array()) * (y(j) * dj);
  }

  // Bias from free vectors, otherwise the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yG = y(t) * G(t);
    const bool at_upper = alpha(t) >= U, at_lower = alpha(t) <= 0;
    if (at_upper) {
      if (y(t) < 0) ub = std::min(ub, yG); else lb = std::max(lb, yG);
    } else if (at_lower) {
      if (y(t) > 0) ub = std::min(ub, yG); else lb = std::max(lb, yG);
    } else {
      ++free_count;
      free_sum += yG;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : (ub + lb) / 2.0;

  SvmSolution sol;
  sol.alpha = alpha;
  sol.iterations = iter;
  sol.model.C = C;
  sol.model.positive_label = enc.positive;
  sol.model.negative_label = enc.negative;
  sol.model.weights = X.transpose() * alpha.cwiseProduct(y);
  sol.model.bias = -rho;
  sol.dual = alpha.sum() - 0.5 * sol.model.weights.squaredNorm();
  sol.primal = svm_primal(X, labels, C, sol.model.weights, sol.model.bias, enc.positive);
  return sol;
}

LinearModel train_linear(const Eigen::MatrixXd& X, const std::vector<int>& labels, double C) {
  return solve_linear_svm(X, labels, C).model;
}

LinearModel train_linear(const FeatureMatrix& features, double C) {
  if (!features.labels) throw DataError("features carry no labels");
  return train_linear(features.theta_bar, *features.labels, C);
}

double evaluate(const LinearModel& model, const Eigen::MatrixXd& X, const std::vector<int>& labels) {
  if (X.cols() != model.weights.size()) throw DataError("feature dimension differs from the model");
  if (static_cast<std::size_t>(X.rows()) != labels.size())
    throw DataError("feature rows and labels differ in length");
  if (X.rows() == 0) return 0.0;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    if (model.predict(X.row(i).transpose()) == labels[static_cast<std::size_t>(i)]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(X.rows());
}

double evaluate(const LinearModel& model, const FeatureMatrix& features) {
  if (!features.labels) throw DataError("features carry no labels");
  return evaluate(model, features.theta_bar, *features.labels);
}

void ExperimentReport::summarize() {
  const auto acc = accuracies();
  const double n = static_cast<double>(acc.size());
  mean = 0.0;
  for (double a : acc) mean += a;
  mean = acc.empty() ? 0.0 : mean / n;
  double ss = 0.0;
  for (double a : acc) ss += (a - mean) * (a - mean);
  std = acc.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

std::vector<double> ExperimentReport::accuracies() const {
  std::vector<double> out;
  for (const auto& r : runs) out.push_back(r.accuracy);
  return out;
}

RunOutcome run_single(const ExperimentSpec& spec, const SynthDataset& data, ModelVariant variant,
                      std::uint64_t chain_seed) {
  const bool target_only = variant == ModelVariant::TARGET_ONLY;
  const CountTensor fit_tensor = target_only ? data.tensor.restrict_to(data.target_index) : data.tensor;
  const std::size_t target = target_only ? 0 : data.target_index;

  RunOutcome out;
  RandomStream chain_rng(derive_seed(chain_seed, 0));
  out.summary = run_chain(fit_tensor, spec.hp, variant, spec.chain, chain_rng);
  const auto frozen = FrozenFactors::from_summary(out.summary, target, spec.hp, variant, fit_tensor.gene_ids);

  const RandomStream train_rng(derive_seed(chain_seed, 1));
  const RandomStream test_rng(derive_seed(chain_seed, 2));
  out.train = extract(fit_tensor.domains[target], fit_tensor.gene_ids, frozen, spec.extraction, train_rng);
  out.test = extract(data.test, data.tensor.gene_ids, frozen, spec.extraction, test_rng);
  const auto model = train_linear(out.train, spec.C);
  out.accuracy = evaluate(model, out.test);
  return out;
}

namespace {

std::string fingerprint(const ExperimentSpec& spec, ModelVariant variant) {
  nlohmann::json seeds = nlohmann::json::array();
  for (int r = 0; r < spec.runs; ++r) seeds.push_back(spec.run_seed(r));
  const bool target_only = variant == ModelVariant::TARGET_ONLY;
  nlohmann::json j{{"condition", spec.condition},
                   {"variant", std::string(to_string(variant))},
                   {"num_features", spec.data.num_features},
                   {"factors_per_domain", spec.data.factors_per_domain},
                   {"shared_factors", spec.data.shared_factors},
                   {"source_samples", target_only ? 0 : spec.data.source_samples},
                   {"target_samples", spec.data.target_samples},
                   {"test_samples", spec.data.effective_test_samples()},
                   {"test_split", "fresh draw from the target generator"},
                   {"hyperparameters", json_codec::encode(spec.hp)},
                   {"chain", json_codec::encode(spec.chain)},
                   {"extraction_iterations", spec.extraction.iterations},
                   {"extraction_collect_last", spec.extraction.collect_last},
                   {"C", spec.C},
                   {"seed", spec.seed},
                   {"run_seeds", seeds}};
  return j.dump();
}

}  // namespace

std::vector<ExperimentReport> run_experiment(const ExperimentSpec& spec) {
  if (spec.runs <= 0) throw ParameterError("runs must be positive");
  if (spec.variants.empty()) throw ParameterError("no variants requested");
  std::vector<ExperimentReport> reports;
  for (auto v : spec.variants) {
    ExperimentReport rep;
    rep.condition = spec.condition;
    rep.variant = v;
    rep.fingerprint = fingerprint(spec, v);
    reports.push_back(std::move(rep));
  }
  for (int r = 0; r < spec.runs; ++r) {
    SynthConfig cfg = spec.data;
    cfg.seed = spec.run_seed(r);
    const auto data = generate(cfg);
    const std::uint64_t chain_seed = derive_seed(cfg.seed, 0xC4A1);
    for (std::size_t i = 0; i < spec.variants.size(); ++i) {
      const auto outcome = run_single(spec, data, spec.variants[i], chain_seed);
      reports[i].runs.push_back({r, cfg.seed, outcome.accuracy});
    }
  }
  for (auto& rep : reports) rep.summarize();
  return reports;
}

std::vector<ExperimentReport> run_sweep(const SweepSpec& spec) {
  std::vector<int> levels = spec.shared_levels;
  std::vector<int> sizes = spec.target_sizes;
  if (levels.empty()) levels.push_back(spec.base.data.shared_factors);
  if (sizes.empty()) sizes.push_back(spec.base.data.target_samples);
  std::vector<ExperimentReport> out;
  for (int size : sizes) {
    for (int level : levels) {
      ExperimentSpec e = spec.base;
      e.data.shared_factors = level;
      e.data.target_samples = size;
      e.condition = "shared=" + std::to_string(level) + ";target=" + std::to_string(size);
      auto reps = run_experiment(e);
      out.insert(out.end(), reps.begin(), reps.end());
    }
  }
  return out;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string report_rows_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "condition,variant,run,seed,accuracy\n";
  for (const auto& rep : reports)
    for (const auto& r : rep.runs)
      out << csv_field(rep.condition) << ',' << to_string(rep.variant) << ',' << r.run << ','
          << r.seed << ',' << fmt(r.accuracy) << '\n';
  return out.str();
}

std::string report_summary_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream out;
  out << "condition,variant,runs,mean,std,fingerprint\n";
  for (const auto& rep : reports)
    out << csv_field(rep.condition) << ',' << to_string(rep.variant) << ',' << rep.runs.size() << ','
        << fmt(rep.mean) << ',' << fmt(rep.std) << ',' << csv_field(rep.fingerprint) << '\n';
  return out.str();
}

}  // namespace bmdl
