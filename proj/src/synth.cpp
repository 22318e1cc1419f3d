#include "bmdl/synth.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "bmdl/distributions.hpp"
#include "bmdl/error.hpp"

namespace bmdl {

void SynthConfig::validate() const {
  if (num_features <= 0) throw ParameterError("num_features must be positive");
  if (factors_per_domain <= 0) throw ParameterError("factors_per_domain must be positive");
  if (shared_factors < 0 || shared_factors > factors_per_domain)
    throw ParameterError("shared_factors must be in [0, factors_per_domain]");
  if (source_samples < 0) throw ParameterError("source_samples must be non-negative");
  if (target_samples <= 0) throw ParameterError("target_samples must be positive");
  if (balanced && target_samples % 2 != 0)
    throw ParameterError("balanced target_samples must be even");
  if (balanced && effective_test_samples() % 2 != 0)
    throw ParameterError("balanced test_samples must be even");
  if (effective_test_samples() < 0) throw ParameterError("test_samples must be non-negative");
  for (double a : class_scale_a)
    if (!(a > 0)) throw ParameterError("class scale shapes must be positive");
  if (!(class_scale_scale > 0) || !(dirichlet_eta > 0) || !(c0 > 0) || !(c_d > 0))
    throw ParameterError("generator scalars must be positive");
  if (gamma0 == 0) throw ParameterError("gamma0 must be positive");
  if (!(p_beta[0] > 0) || !(p_beta[1] > 0)) throw ParameterError("p_beta must be positive");
}

namespace {

// Component stream indices; fixed so datasets stay paired across settings.
enum Stream : std::uint64_t {
  kSourceLoadings = 1,
  kTargetLoadings = 2,
  kSharePermutation = 3,
  kSourceWeights = 4,
  kTargetWeights = 5,
  kSourceSamples = 6,
  kTargetSamples = 7,
  kTestSamples = 8,
};

Eigen::MatrixXd draw_loadings(int V, int K, double eta, RandomStream& rng) {
  Eigen::MatrixXd phi(V, K);
  std::vector<double> conc(static_cast<std::size_t>(V), eta);
  for (int k = 0; k < K; ++k)
    dist::sample_dirichlet_into(conc, {phi.col(k).data(), static_cast<std::size_t>(V)}, rng);
  return phi;
}

void draw_weights(const SynthConfig& cfg, SynthTruth& t, RandomStream& rng) {
  const int K = cfg.factors_per_domain;
  const double shape = cfg.effective_gamma0() / K;
  t.s.resize(K);
  t.r.resize(K);
  for (int k = 0; k < K; ++k) t.s(k) = dist::sample_gamma(shape, 1.0 / cfg.c0, rng);
  for (int k = 0; k < K; ++k) t.r(k) = dist::sample_gamma(t.s(k), 1.0 / cfg.c_d, rng);
}

std::vector<int> draw_labels(int n, bool balanced, RandomStream& rng) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  if (balanced) {
    for (int j = 0; j < n; ++j) labels[static_cast<std::size_t>(j)] = j < n / 2 ? 0 : 1;
  } else {
    for (auto& l : labels) l = dist::sample_bernoulli(0.5, rng) ? 1 : 0;
  }
  return labels;
}

// Samples given phi and r; fills truth theta/p/c_j and the count columns.
DomainData draw_samples(const SynthConfig& cfg, const std::string& name, int J,
                        const std::vector<int>& labels, SynthTruth& t, RandomStream& rng) {
  const int V = cfg.num_features;
  const int K = cfg.factors_per_domain;
  DomainData dom;
  dom.name = name;
  dom.counts.num_genes = static_cast<std::size_t>(V);
  t.theta.resize(K, J);
  t.p.resize(J);
  t.c_j.resize(J);

  // Separate streams keep scales and p unchanged when the loadings change.
  auto scale_rng = rng.split(1);
  auto p_rng = rng.split(2);
  auto theta_rng = rng.split(3);
  auto count_rng = rng.split(4);
  std::vector<std::int32_t> genes;
  std::vector<std::int64_t> counts;
  for (int j = 0; j < J; ++j) {
    const double a = cfg.class_scale_a[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])];
    t.c_j(j) = dist::sample_gamma(a, cfg.class_scale_scale, scale_rng);
    t.p(j) = dist::sample_beta(cfg.p_beta[0], cfg.p_beta[1], p_rng);
    for (int k = 0; k < K; ++k) t.theta(k, j) = dist::sample_gamma(t.r(k), 1.0 / t.c_j(j), theta_rng);
    const double odds = t.p(j) / (1.0 - t.p(j));
    const Eigen::VectorXd shape = t.phi * t.theta.col(j);
    genes.clear();
    counts.clear();
    for (int v = 0; v < V; ++v) {
      // NB(shape, p) as a gamma-Poisson mixture
      const double lambda = dist::sample_gamma(shape(v), odds, count_rng);
      const auto n = dist::sample_poisson(lambda, count_rng);
      if (n > 0) {
        genes.push_back(v);
        counts.push_back(n);
      }
    }
    dom.counts.push_sample(genes, counts);
    dom.sample_ids.push_back(name + "_" + std::to_string(j));
  }
  dom.labels = labels;
  return dom;
}

}  // namespace

SynthDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  const RandomStream root(cfg.seed);
  const int V = cfg.num_features;
  const int K = cfg.factors_per_domain;
  const bool two_domains = cfg.source_samples > 0;

  SynthDataset out;
  out.tensor.gene_ids.reserve(static_cast<std::size_t>(V));
  for (int v = 0; v < V; ++v) out.tensor.gene_ids.push_back("gene" + std::to_string(v));

  // Loadings. Both matrices are always drawn in full so the target's unique
  // columns do not depend on how many columns end up shared.
  auto src_rng = root.split(kSourceLoadings);
  auto tgt_rng = root.split(kTargetLoadings);
  auto perm_rng = root.split(kSharePermutation);
  const Eigen::MatrixXd source_phi = draw_loadings(V, K, cfg.dirichlet_eta, src_rng);
  Eigen::MatrixXd target_phi = draw_loadings(V, K, cfg.dirichlet_eta, tgt_rng);
  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), perm_rng);

  out.shared_mask.assign(static_cast<std::size_t>(K), false);
  out.shared_source_column.assign(static_cast<std::size_t>(K), -1);
  if (two_domains) {
    for (int k = 0; k < cfg.shared_factors; ++k) {
      const int src = order[static_cast<std::size_t>(k)];
      target_phi.col(k) = source_phi.col(src);
      out.shared_mask[static_cast<std::size_t>(k)] = true;
      out.shared_source_column[static_cast<std::size_t>(k)] = src;
    }
  }

  SynthTruth target;
  target.phi = target_phi;
  auto tw_rng = root.split(kTargetWeights);
  draw_weights(cfg, target, tw_rng);

  if (two_domains) {
    SynthTruth source;
    source.phi = source_phi;
    auto sw_rng = root.split(kSourceWeights);
    draw_weights(cfg, source, sw_rng);
    auto ss_rng = root.split(kSourceSamples);
    const auto labels = draw_labels(cfg.source_samples, false, ss_rng);
    out.tensor.domains.push_back(draw_samples(cfg, "source", cfg.source_samples, labels, source, ss_rng));
    out.truth.push_back(std::move(source));
  }

  auto ts_rng = root.split(kTargetSamples);
  const auto train_labels = draw_labels(cfg.target_samples, cfg.balanced, ts_rng);
  out.tensor.domains.push_back(
      draw_samples(cfg, "target", cfg.target_samples, train_labels, target, ts_rng));
  out.target_index = out.tensor.domains.size() - 1;

  out.test_truth.phi = target.phi;
  out.test_truth.s = target.s;
  out.test_truth.r = target.r;
  auto test_rng = root.split(kTestSamples);
  const auto test_labels = draw_labels(cfg.effective_test_samples(), cfg.balanced, test_rng);
  out.test = draw_samples(cfg, "test", cfg.effective_test_samples(), test_labels, out.test_truth, test_rng);
  out.truth.push_back(std::move(target));
  return out;
}

}  // namespace bmdl
