#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bmdl/count_tensor.hpp"
#include "bmdl/model.hpp"
#include "bmdl/random.hpp"

namespace bmdl {

using MatrixXl = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXl = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Auxiliary variables of one sweep. Recomputed every sweep, never persisted.
struct AugmentedCounts {
  /// l_vj per stored count entry, aligned with `tensor.domains[d].counts`.
  std::vector<std::vector<std::int64_t>> ell;

  /// Optional sparse l_vjk: entry i of domain d owns pairs
  /// [split_start[d][i], split_start[d][i+1]) of (split_factor, split_count).
  bool keep_splits = false;
  std::vector<std::vector<std::size_t>> split_start;
  std::vector<std::vector<std::int32_t>> split_factor;
  std::vector<std::vector<std::int64_t>> split_count;

  MatrixXl ell_kv;                   // K x V: l_{v.k}, summed over domains and samples
  std::vector<MatrixXl> ell_jk;      // per domain K x J: l_{.jk}
  std::vector<MatrixXl> ell_tilde;   // per domain K x J: tables of l_{.jk} at concentration r_k
  MatrixXl ell_tilde_sum;            // K x D: sum_j of ell_tilde
  MatrixXl ell_tilde2;               // K x D: tables of ell_tilde_sum at concentration z s_k
  VectorXl ell_acute;                // K: tables of sum_d ell_tilde2 at concentration gamma0 / K
  MatrixXl u_vk;                     // K x V: tables for the loading concentration
  Eigen::VectorXd q_aux;             // K: beta auxiliary for eta (NaN where l_{..k} == 0)

  // Depth terms, fixed while p and c_j are fixed.
  std::vector<Eigen::VectorXd> q_j;        // -log(1 - p_j)
  std::vector<Eigen::VectorXd> q_tilde_j;  // log(1 + q_j / c_j) = -log(1 - q_j / (c_j + q_j))
  Eigen::VectorXd domain_rate;             // Q_d = sum_j q_tilde_j
  Eigen::VectorXd domain_zero_log;         // L_d = log(1 + Q_d / c_d)

  std::int64_t degenerate_entries = 0;
};

struct SweepOptions {
  bool resample_pi = true;
  bool resample_scales = true;
  bool keep_splits = false;
};

struct SweepStats {
  std::int64_t degenerate_entries = 0;
  std::uint64_t latent_count_draws = 0;  // random words consumed by sample_latent_counts
};

/// Fills the depth terms of `aug` from the current p, c_j and c_d.
void compute_depth_terms(const LatentState& state, AugmentedCounts& aug);

/// l_vj ~ CRT(n_vj, sum_k phi_vk theta_kj) and its multinomial split over factors.
/// Visits only stored (non-zero) entries. Also refreshes the depth terms.
void sample_latent_counts(const CountTensor& tensor, const LatentState& state,
                          const Hyperparameters& hp, RandomStream& rng, AugmentedCounts& aug);

/// Beta/CRT augmentation of the Dirichlet-multinomial likelihood, then eta.
/// Integrates phi out, so phi must be redrawn afterwards.
void update_eta(AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
                RandomStream& rng);

void update_phi(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
                RandomStream& rng);

/// Draws the table tower ell_tilde (at r), ell_tilde2 (at z s), ell_acute (at gamma0 / K).
void augment_tables(AugmentedCounts& aug, const LatentState& state, const Hyperparameters& hp,
                    RandomStream& rng);

/// gamma0 with s, r and theta integrated out.
void update_gamma0(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
                   RandomStream& rng);

/// s_k with r and theta integrated out.
void update_s(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
              RandomStream& rng);

/// z_kd with r and theta integrated out: forced to 1 when ell_tilde_sum > 0.
void update_z(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
              RandomStream& rng);

void update_pi(LatentState& state, const Hyperparameters& hp, RandomStream& rng);

/// r_kd with theta integrated out.
void update_r(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
              RandomStream& rng);

void update_theta(const AugmentedCounts& aug, LatentState& state, const Hyperparameters& hp,
                  RandomStream& rng);

/// p_j with the latent counts integrated out.
void update_p(const CountTensor& tensor, LatentState& state, const Hyperparameters& hp,
              RandomStream& rng);

/// c_j, c_d and c0 by gamma-gamma conjugacy; c_j stays pinned for variants that fix it.
void update_scales(LatentState& state, const Hyperparameters& hp, ModelVariant variant,
                   RandomStream& rng, bool resample_sample_scales = true);

/// One full sweep. Order:
///   latent counts -> eta -> phi -> table tower -> gamma0 -> s -> z -> pi -> r -> theta
///   -> p -> scales,
/// skipping updates pinned by `variant`. Every step that integrates a variable out
/// is followed by a fresh draw of that variable before anything conditions on it.
SweepStats sweep(const CountTensor& tensor, LatentState& state, const Hyperparameters& hp,
                 ModelVariant variant, RandomStream& rng, AugmentedCounts& aug,
                 const SweepOptions& options = {});

}  // namespace bmdl
