#include "bmdl/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bmdl/distributions.hpp"

namespace bmdl {

namespace {

double beta_or_point(double a, double b, RandomStream& rng) {
  if (b == 0.0) return 1.0;
  return dist::sample_beta(a, b, rng);
}

// Gamma scale from a rate; sums of huge or tiny values can push the rate past
// what a double represents, so the scale is kept at least DBL_MIN.
double scale_of(double rate) {
  return std::max(1.0 / rate, std::numeric_limits<double>::min());
}

// log(1 + a / b) for a >= 0, b > 0, without overflowing when b is near DBL_MIN.
double log1p_ratio(double a, double b) {
  const double ratio = a / b;
  if (std::isfinite(ratio)) return std::log1p(ratio);
  return std::log(a) - std::log(b);
}

}  // namespace

void compute_depth_terms(const LatentState& state, AugmentedCounts& aug) {
  const std::size_t D = state.num_domains();
  aug.q_j.resize(D);
  aug.q_tilde_j.resize(D);
  aug.domain_rate.resize(static_cast<Eigen::Index>(D));
  aug.domain_zero_log.resize(static_cast<Eigen::Index>(D));
  for (std::size_t d = 0; d < D; ++d) {
    const auto& p = state.p[d];
    const auto& c = state.c_j[d];
    auto& q = aug.q_j[d];
    auto& qt = aug.q_tilde_j[d];
    q.resize(p.size());
    qt.resize(p.size());
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      q(j) = -std::log1p(-p(j));
      qt(j) = log1p_ratio(q(j), c(j));
    }
    const auto dd = static_cast<Eigen::Index>(d);
    aug.domain_rate(dd) = qt.sum();
    aug.domain_zero_log(dd) = log1p_ratio(aug.domain_rate(dd), state.c_d(dd));
  }
}

void sample_latent_counts(const CountTensor& tensor, const LatentState& state,
                          const Hyperparameters& hp, RandomStream& rng, AugmentedCounts& aug) {
  const int K = hp.K;
  const auto V = static_cast<Eigen::Index>(tensor.num_genes());
  const std::size_t D = tensor.num_domains();
  const std::int64_t cutoff = hp.crt_cutoff;

  compute_depth_terms(state, aug);
  aug.ell.resize(D);
  aug.ell_jk.resize(D);
  aug.ell_kv.setZero(K, V);
  aug.degenerate_entries = 0;
  if (aug.keep_splits) {
    aug.split_start.assign(D, {});
    aug.split_factor.assign(D, {});
    aug.split_count.assign(D, {});
  }

  const Eigen::MatrixXd phi_t = state.phi.transpose();  // K x V, one gene per column
  Eigen::VectorXd weights(K);
  VectorXl split(K);

  for (std::size_t d = 0; d < D; ++d) {
    const auto& m = tensor.domains[d].counts;
    const auto& th = state.theta[d];
    auto& ell = aug.ell[d];
    auto& ell_jk = aug.ell_jk[d];
    ell.assign(m.nnz(), 0);
    ell_jk.setZero(K, static_cast<Eigen::Index>(m.num_samples()));
    if (aug.keep_splits) {
      aug.split_start[d].assign(1, 0);
      aug.split_start[d].reserve(m.nnz() + 1);
    }

    for (std::size_t j = 0; j < m.num_samples(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const auto genes = m.genes_of(j);
      const auto counts = m.counts_of(j);
      const std::size_t base = m.col_start[j];
      for (std::size_t i = 0; i < genes.size(); ++i) {
        const auto v = genes[i];
        weights = phi_t.col(v).cwiseProduct(th.col(jj));
        const double rate = weights.sum();
        std::int64_t tables = 0;
        if (rate > 0.0) {
          tables = dist::sample_crt_approx(counts[i], rate, cutoff, rng);
        } else {
          ++aug.degenerate_entries;
        }
        ell[base + i] = tables;
        if (tables > 0) {
          split.setZero();
          dist::split_counts(tables, {weights.data(), static_cast<std::size_t>(K)}, rate,
                             {split.data(), static_cast<std::size_t>(K)}, rng);
          ell_jk.col(jj) += split;
          aug.ell_kv.col(v) += split;
          if (aug.keep_splits) {
            for (int k = 0; k < K; ++k) {
              if (split(k) == 0) continue;
              aug.split_factor[d].push_back(k);
              aug.split_count[d].push_back(split(k));
            }
          }
        }
        if (aug.keep_splits) aug.split_start[d].push_back(aug.split_factor[d].size());
      }
    }
  }
}

void update_eta(AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
                RandomStream& rng) {
  const int K = hp.K;
  const auto V = aug.ell_kv.cols();
  aug.q_aux.setConstant(K, std::numeric_limits<double>::quiet_NaN());
  aug.u_vk.setZero(K, V);
  double tables = 0.0;
  double log_sum = 0.0;
  for (int k = 0; k < K; ++k) {
    const std::int64_t total = aug.ell_kv.row(k).sum();
    if (total == 0) continue;
    const double q = dist::sample_beta(static_cast<double>(total),
                                       state.eta * static_cast<double>(V), rng);
    aug.q_aux(k) = q;
    log_sum += std::log1p(-q);
    for (Eigen::Index v = 0; v < V; ++v) {
      const std::int64_t n = aug.ell_kv(k, v);
      if (n == 0) continue;
      const std::int64_t u = dist::sample_crt_approx(n, state.eta, hp.crt_cutoff, rng);
      aug.u_vk(k, v) = u;
      tables += static_cast<double>(u);
    }
  }
  const double rate = hp.w0 - static_cast<double>(V) * log_sum;
  state.eta = dist::sample_gamma(hp.s0 + tables, scale_of(rate), rng);
}

void update_phi(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
                RandomStream& rng) {
  const auto V = state.phi.rows();
  std::vector<double> conc(static_cast<std::size_t>(V));
  for (int k = 0; k < hp.K; ++k) {
    for (Eigen::Index v = 0; v < V; ++v)
      conc[static_cast<std::size_t>(v)] = state.eta + static_cast<double>(aug.ell_kv(k, v));
    dist::sample_dirichlet_into(conc, {state.phi.col(k).data(), static_cast<std::size_t>(V)}, rng);
  }
}

void augment_tables(AugmentedCounts& aug, const LatentState& state, const Hyperparameters& hp,
                    RandomStream& rng) {
  const int K = hp.K;
  const std::size_t D = state.num_domains();
  const auto DD = static_cast<Eigen::Index>(D);
  aug.ell_tilde.resize(D);
  aug.ell_tilde_sum.setZero(K, DD);
  aug.ell_tilde2.setZero(K, DD);
  aug.ell_acute.setZero(K);

  for (std::size_t d = 0; d < D; ++d) {
    const auto dd = static_cast<Eigen::Index>(d);
    const auto& counts = aug.ell_jk[d];
    auto& tables = aug.ell_tilde[d];
    tables.setZero(K, counts.cols());
    for (Eigen::Index j = 0; j < counts.cols(); ++j)
      for (int k = 0; k < K; ++k)
        tables(k, j) = dist::sample_crt_approx(counts(k, j), state.r(k, dd), hp.crt_cutoff, rng);
    aug.ell_tilde_sum.col(dd) = tables.rowwise().sum();
    for (int k = 0; k < K; ++k)
      aug.ell_tilde2(k, dd) = dist::sample_crt_approx(
          aug.ell_tilde_sum(k, dd), state.z(k, dd) * state.s(k), hp.crt_cutoff, rng);
  }
  const double conc = state.gamma0 / K;
  for (int k = 0; k < K; ++k)
    aug.ell_acute(k) =
        dist::sample_crt_approx(aug.ell_tilde2.row(k).sum(), conc, hp.crt_cutoff, rng);
}

namespace {

// A_k = sum_d z_kd L_d: the rate at which s_k generates second-level tables.
double factor_zero_log(const AugmentedCounts& aug, const LatentState& state, int k) {
  double a = 0.0;
  for (Eigen::Index d = 0; d < state.z.cols(); ++d)
    if (state.z(k, d) == 1) a += aug.domain_zero_log(d);
  return a;
}

}  // namespace

void update_gamma0(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
                   RandomStream& rng) {
  const int K = hp.K;
  double log_term = 0.0;
  for (int k = 0; k < K; ++k) log_term += log1p_ratio(factor_zero_log(aug, state, k), state.c0);
  const double shape = hp.a0 + static_cast<double>(aug.ell_acute.sum());
  state.gamma0 = dist::sample_gamma(shape, scale_of(hp.b0 + log_term / K), rng);
}

void update_s(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
              RandomStream& rng) {
  const int K = hp.K;
  for (int k = 0; k < K; ++k) {
    const double shape = state.gamma0 / K + static_cast<double>(aug.ell_tilde2.row(k).sum());
    const double rate = state.c0 + factor_zero_log(aug, state, k);
    state.s(k) = dist::sample_gamma(shape, scale_of(rate), rng);
  }
}

void update_z(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
              RandomStream& rng) {
  for (Eigen::Index d = 0; d < state.z.cols(); ++d) {
    for (int k = 0; k < hp.K; ++k) {
      if (aug.ell_tilde_sum(k, d) > 0) {
        state.z(k, d) = 1;
        continue;
      }
      // P(no tables | z = 1) = (1 - P_d)^{s_k} = exp(-s_k L_d)
      const double pi = state.pi(k);
      const double on = pi * std::exp(-state.s(k) * aug.domain_zero_log(d));
      const double denom = on + (1.0 - pi);
      const double prob = denom > 0.0 ? on / denom : 0.0;
      state.z(k, d) = dist::sample_bernoulli(prob, rng) ? 1 : 0;
    }
  }
}

void update_pi(LatentState& state, const Hyperparameters& hp, RandomStream& rng) {
  const int K = hp.K;
  const double D = static_cast<double>(state.z.cols());
  for (int k = 0; k < K; ++k) {
    const double on = static_cast<double>(state.z.row(k).sum());
    state.pi(k) = beta_or_point(hp.c_ibp / K + on, hp.c_ibp * (1.0 - 1.0 / K) + D - on, rng);
  }
}

void update_r(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
              RandomStream& rng) {
  for (Eigen::Index d = 0; d < state.r.cols(); ++d) {
    const double scale = scale_of(state.c_d(d) + aug.domain_rate(d));
    for (int k = 0; k < hp.K; ++k) {
      const double shape =
          state.z(k, d) * state.s(k) + static_cast<double>(aug.ell_tilde_sum(k, d));
      state.r(k, d) = dist::sample_gamma(shape, scale, rng);
    }
  }
}

void update_theta(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
                  RandomStream& rng) {
  for (std::size_t d = 0; d < state.num_domains(); ++d) {
    const auto dd = static_cast<Eigen::Index>(d);
    auto& th = state.theta[d];
    const auto& counts = aug.ell_jk[d];
    for (Eigen::Index j = 0; j < th.cols(); ++j) {
      const double scale = scale_of(state.c_j[d](j) + aug.q_j[d](j));
      for (int k = 0; k < hp.K; ++k)
        th(k, j) = dist::sample_gamma(state.r(k, dd) + static_cast<double>(counts(k, j)), scale, rng);
    }
  }
}

void update_p(const CountTensor& tensor, LatentState& state, const Hyperparameters& hp,
              RandomStream& rng) {
  for (std::size_t d = 0; d < state.num_domains(); ++d) {
    const auto& m = tensor.domains[d].counts;
    auto& p = state.p[d];
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      const double n = static_cast<double>(m.sample_total(static_cast<std::size_t>(j)));
      p(j) = dist::sample_beta(hp.a0 + n, hp.b0 + state.theta[d].col(j).sum(), rng);
    }
  }
}

void update_scales(LatentState& state, const Hyperparameters& hp, ModelVariant variant,
                   RandomStream& rng, bool resample_sample_scales) {
  const int K = hp.K;
  if (resample_sample_scales && !pins_sample_scale(variant)) {
    for (std::size_t d = 0; d < state.num_domains(); ++d) {
      const auto dd = static_cast<Eigen::Index>(d);
      const double shape = hp.e0 + state.r.col(dd).sum();
      auto& c = state.c_j[d];
      for (Eigen::Index j = 0; j < c.size(); ++j)
        c(j) = dist::sample_gamma(shape, scale_of(hp.f0 + state.theta[d].col(j).sum()), rng);
    }
  }
  for (Eigen::Index d = 0; d < state.c_d.size(); ++d) {
    double shape = hp.h0;
    for (int k = 0; k < K; ++k) shape += state.z(k, d) * state.s(k);
    state.c_d(d) = dist::sample_gamma(shape, scale_of(hp.u0 + state.r.col(d).sum()), rng);
  }
  state.c0 = dist::sample_gamma(hp.s0 + state.gamma0, scale_of(hp.t0 + state.s.sum()), rng);
}

SweepStats sweep(const CountTensor& tensor, LatentState& state, const Hyperparameters& hp,
                 ModelVariant variant, RandomStream& rng, AugmentedCounts& aug,
                 const SweepOptions& options) {
  SweepStats stats;
  aug.keep_splits = options.keep_splits;
  const std::uint64_t before = rng.draws();
  sample_latent_counts(tensor, state, hp, rng, aug);
  stats.latent_count_draws = rng.draws() - before;
  stats.degenerate_entries = aug.degenerate_entries;

  update_eta(aug, state, hp, rng);
  update_phi(aug, state, hp, rng);

  augment_tables(aug, state, hp, rng);
  update_gamma0(aug, state, hp, rng);
  update_s(aug, state, hp, rng);
  if (!pins_z(variant)) update_z(aug, state, hp, rng);
  if (options.resample_pi && !pins_z(variant)) update_pi(state, hp, rng);
  update_r(aug, state, hp, rng);
  update_theta(aug, state, hp, rng);

  if (!pins_p(variant)) update_p(tensor, state, hp, rng);
  if (options.resample_scales) update_scales(state, hp, variant, rng);
  return stats;
}

}  // namespace bmdl
