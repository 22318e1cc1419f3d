#include "bmdl/features.hpp"

#include <cmath>

#include "bmdl/distributions.hpp"
#include "bmdl/error.hpp"
#include "bmdl/gibbs.hpp"

namespace bmdl {

FrozenFactors FrozenFactors::from_summary(const PosteriorSummary& summary, std::size_t target,
                                          const Hyperparameters& hp, ModelVariant variant,
                                          std::vector<std::string> gene_ids) {
  if (target >= static_cast<std::size_t>(summary.r_last.cols()))
    throw ParameterError("target domain index out of range");
  FrozenFactors f;
  f.phi = summary.phi_mean;
  // renormalize away the rounding of the running mean
  for (Eigen::Index k = 0; k < f.phi.cols(); ++k) f.phi.col(k) /= f.phi.col(k).sum();
  f.r_target = summary.r_last.col(static_cast<Eigen::Index>(target));
  f.hp = hp;
  f.variant = variant;
  f.gene_ids = std::move(gene_ids);
  return f;
}

void FrozenFactors::validate() const {
  if (phi.cols() != r_target.size()) throw ParameterError("phi and r disagree on K");
  if (phi.cols() == 0 || phi.rows() == 0) throw ParameterError("empty loading matrix");
  for (Eigen::Index k = 0; k < phi.cols(); ++k) {
    if ((phi.col(k).array() < 0.0).any() || std::abs(phi.col(k).sum() - 1.0) > 1e-6)
      throw ParameterError("phi column " + std::to_string(k) + " is not a probability vector");
  }
  if ((r_target.array() < 0.0).any() || !r_target.allFinite())
    throw ParameterError("r has a negative or non-finite entry");
  if (!gene_ids.empty() && gene_ids.size() != static_cast<std::size_t>(phi.rows()))
    throw ParameterError("gene id list does not match phi");
}

void ExtractionConfig::validate() const {
  if (iterations <= 0) throw ParameterError("extraction iterations must be positive");
  if (collect_last <= 0 || collect_last > iterations)
    throw ParameterError("collect_last must be in [1, iterations]");
}

namespace {

// Blocked Gibbs for one sample over its local variables.
void extract_one(const SparseCounts& m, std::size_t j, const FrozenFactors& f,
                 const ExtractionConfig& cfg, RandomStream& rng, Eigen::Ref<Eigen::VectorXd> out) {
  const auto& hp = f.hp;
  const int K = f.num_factors();
  const auto genes = m.genes_of(j);
  const auto counts = m.counts_of(j);
  const double total = static_cast<double>(m.sample_total(j));
  const double r_sum = f.r_target.sum();
  const bool fix_p = pins_p(f.variant);
  const bool fix_c = pins_sample_scale(f.variant);

  // Rows of phi restricted to this sample's genes, K-contiguous.
  Eigen::MatrixXd phi_rows(K, static_cast<Eigen::Index>(genes.size()));
  for (std::size_t i = 0; i < genes.size(); ++i)
    phi_rows.col(static_cast<Eigen::Index>(i)) = f.phi.row(genes[i]).transpose();

  double c = fix_c ? kPinnedSampleScale : 1.0;
  double p = fix_p ? kPinnedP : 0.5;
  Eigen::VectorXd theta(K);
  for (int k = 0; k < K; ++k) theta(k) = dist::sample_gamma(f.r_target(k), 1.0 / c, rng);

  Eigen::VectorXd w(K);
  VectorXl ell(K);
  out.setZero();
  const int first_collect = cfg.iterations - cfg.collect_last;
  for (int it = 0; it < cfg.iterations; ++it) {
    ell.setZero();
    for (std::size_t i = 0; i < genes.size(); ++i) {
      w = phi_rows.col(static_cast<Eigen::Index>(i)).cwiseProduct(theta);
      const double rate = w.sum();
      if (!(rate > 0.0)) continue;
      const auto tables = dist::sample_crt_approx(counts[i], rate, hp.crt_cutoff, rng);
      dist::split_counts(tables, {w.data(), static_cast<std::size_t>(K)}, rate,
                         {ell.data(), static_cast<std::size_t>(K)}, rng);
    }
    const double q = -std::log1p(-p);
    const double scale = 1.0 / (c + q);
    for (int k = 0; k < K; ++k)
      theta(k) = dist::sample_gamma(f.r_target(k) + static_cast<double>(ell(k)), scale, rng);
    const double theta_sum = theta.sum();
    if (!fix_p) p = dist::sample_beta(hp.a0 + total, hp.b0 + theta_sum, rng);
    if (!fix_c) c = dist::sample_gamma(hp.e0 + r_sum, 1.0 / (hp.f0 + theta_sum), rng);
    if (it >= first_collect) out += theta;
  }
  out /= static_cast<double>(cfg.collect_last);
}

}  // namespace

FeatureMatrix extract(const SparseCounts& samples, const FrozenFactors& frozen,
                      const ExtractionConfig& config, const RandomStream& rng,
                      const std::vector<std::string>& gene_ids) {
  frozen.validate();
  config.validate();
  if (samples.num_genes != static_cast<std::size_t>(frozen.phi.rows()))
    throw DataError("gene axis mismatch: samples have " + std::to_string(samples.num_genes) +
                    " genes, factors have " + std::to_string(frozen.phi.rows()));
  if (!gene_ids.empty() && !frozen.gene_ids.empty() && gene_ids != frozen.gene_ids)
    throw DataError("gene axis mismatch: gene ids differ from the fitted factors");

  FeatureMatrix fm;
  fm.theta_bar.setZero(static_cast<Eigen::Index>(samples.num_samples()), frozen.num_factors());
  Eigen::VectorXd row(frozen.num_factors());
  for (std::size_t j = 0; j < samples.num_samples(); ++j) {
    RandomStream local = rng.split(j);
    extract_one(samples, j, frozen, config, local, row);
    if (!row.allFinite()) throw NumericError("non-finite feature for sample " + std::to_string(j));
    fm.theta_bar.row(static_cast<Eigen::Index>(j)) = row.transpose();
  }
  return fm;
}

FeatureMatrix extract(const DomainData& domain, const std::vector<std::string>& gene_ids,
                      const FrozenFactors& frozen, const ExtractionConfig& config,
                      const RandomStream& rng) {
  auto fm = extract(domain.counts, frozen, config, rng, gene_ids);
  fm.sample_ids = domain.sample_ids;
  fm.labels = domain.labels;
  return fm;
}

}  // namespace bmdl
