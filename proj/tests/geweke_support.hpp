#pragma once

// Joint-distribution ("getting it right") checks shared by the unit suite and
// the acceptance binary. A kernel passes if, started from exact prior draws and
// alternated with fresh data simulation, the marginal moments of the latent
// variables match those of independent prior draws.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmdl/distributions.hpp"
#include "bmdl/error.hpp"
#include "bmdl/gibbs.hpp"
#include "bmdl/model.hpp"
#include "test_support.hpp"

namespace geweke {

using Kernel = std::function<void(const bmdl::CountTensor&, bmdl::LatentState&, bmdl::RandomStream&,
                                  bmdl::AugmentedCounts&)>;

struct Setup {
  std::size_t V = 5;
  std::vector<std::size_t> J{3, 3};
  bmdl::Hyperparameters hp;
  bmdl::ModelVariant variant = bmdl::ModelVariant::BMDL;
  int forward_draws = 10000;
  int replicates = 2000;
  int steps = 5;
  std::uint64_t seed = 1;
  // When positive, the joint is restricted to data with every count at most
  // this value. The event involves the data only, so the posterior given the
  // data is unchanged and data | state is sampled exactly by rejection.
  std::int64_t max_count = 0;
  int max_attempts = 100000;
};

// Counts n_vj ~ NB(sum_k phi_vk theta_kj, p_j) drawn as a gamma-Poisson mixture.
// Returns false when some count exceeds `max_count` (if positive). A Poisson
// mean beyond the cap by 40 standard deviations counts as exceeding it.
inline bool try_simulate_counts(const bmdl::LatentState& st, std::size_t V, std::int64_t max_count,
                                bmdl::RandomStream& rng, bmdl::CountTensor& out) {
  const double cap = static_cast<double>(max_count);
  std::vector<std::vector<std::vector<std::int64_t>>> dense(st.num_domains());
  for (std::size_t d = 0; d < st.num_domains(); ++d) {
    const Eigen::MatrixXd rate = st.phi * st.theta[d];
    const auto J = static_cast<std::size_t>(st.theta[d].cols());
    dense[d].assign(V, std::vector<std::int64_t>(J, 0));
    for (std::size_t j = 0; j < J; ++j) {
      const double p = st.p[d](static_cast<Eigen::Index>(j));
      const double odds = p / (1.0 - p);
      for (std::size_t v = 0; v < V; ++v) {
        const double shape = rate(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(j));
        double lambda = 0.0;
        try {
          lambda = shape > 0.0 ? bmdl::dist::sample_gamma(shape, odds, rng) : 0.0;
        } catch (const bmdl::NumericError&) {
          if (max_count <= 0) throw;
          return false;  // the mean is beyond double range, far above any cap
        }
        if (max_count > 0 && !(lambda <= cap + 40.0 * std::sqrt(cap) + 40.0)) return false;
        dense[d][v][j] = bmdl::dist::sample_poisson(lambda, rng);
        if (max_count > 0 && dense[d][v][j] > max_count) return false;
      }
    }
  }
  out = testing_support::make_tensor(dense);
  return true;
}

inline bmdl::CountTensor simulate_counts(const bmdl::LatentState& st, std::size_t V,
                                         bmdl::RandomStream& rng) {
  bmdl::CountTensor out;
  try_simulate_counts(st, V, 0, rng, out);
  return out;
}

struct Statistic {
  std::string name;
  std::function<double(const bmdl::CountTensor&, const bmdl::LatentState&)> value;
};

inline double domain_total(const bmdl::CountTensor& t, std::size_t d) {
  double s = 0.0;
  for (auto c : t.domains[d].counts.count) s += static_cast<double>(c);
  return s;
}

// First and second moments of the listed quantities.
inline std::vector<Statistic> default_statistics() {
  using bmdl::CountTensor;
  using bmdl::LatentState;
  std::vector<Statistic> base{
      {"gamma0", [](const CountTensor&, const LatentState& s) { return s.gamma0; }},
      {"eta", [](const CountTensor&, const LatentState& s) { return s.eta; }},
      {"s1", [](const CountTensor&, const LatentState& s) { return s.s(0); }},
      {"pi1", [](const CountTensor&, const LatentState& s) { return s.pi(0); }},
      {"p1_dom1", [](const CountTensor&, const LatentState& s) { return s.p[0](0); }},
      {"counts_dom1", [](const CountTensor& t, const LatentState&) { return domain_total(t, 0); }},
      {"counts_dom2", [](const CountTensor& t, const LatentState&) { return domain_total(t, 1); }},
      {"log_counts_dom1",
       [](const CountTensor& t, const LatentState&) { return std::log1p(domain_total(t, 0)); }},
  };
  std::vector<Statistic> out;
  for (const auto& s : base) {
    out.push_back(s);
    auto f = s.value;
    out.push_back({s.name + "^2", [f](const CountTensor& t, const LatentState& st) {
                     const double x = f(t, st);
                     return x * x;
                   }});
  }
  return out;
}

// Extra quantities, examined by the unit suite.
inline std::vector<Statistic> extended_statistics() {
  using bmdl::CountTensor;
  using bmdl::LatentState;
  auto out = default_statistics();
  std::vector<Statistic> more{
      {"c0", [](const CountTensor&, const LatentState& s) { return s.c0; }},
      {"c_d1", [](const CountTensor&, const LatentState& s) { return s.c_d(0); }},
      {"c_j1", [](const CountTensor&, const LatentState& s) { return s.c_j[0](0); }},
      {"r11", [](const CountTensor&, const LatentState& s) { return s.r(0, 0); }},
      {"theta111", [](const CountTensor&, const LatentState& s) { return s.theta[0](0, 0); }},
      {"phi11", [](const CountTensor&, const LatentState& s) { return s.phi(0, 0); }},
      {"z11", [](const CountTensor&, const LatentState& s) { return double(s.z(0, 0)); }},
      {"active_z", [](const CountTensor&, const LatentState& s) { return double(s.z.sum()); }},
  };
  for (const auto& s : more) {
    out.push_back(s);
    auto f = s.value;
    out.push_back({s.name + "^2", [f](const CountTensor& t, const LatentState& st) {
                     const double x = f(t, st);
                     return x * x;
                   }});
  }
  return out;
}

struct Comparison {
  std::string name;
  double forward_mean = 0, forward_se = 0;
  double chain_mean = 0, chain_se = 0;
  double z = 0;  // standardized difference
};

struct Result {
  std::vector<Comparison> comparisons;
  double max_abs_z() const {
    double m = 0.0;
    for (const auto& c : comparisons) m = std::max(m, std::isfinite(c.z) ? std::abs(c.z) : HUGE_VAL);
    return m;
  }
  const Comparison& worst() const {
    std::size_t best = 0;
    for (std::size_t i = 0; i < comparisons.size(); ++i)
      if (!(std::abs(comparisons[i].z) <= std::abs(comparisons[best].z))) best = i;
    return comparisons[best];
  }
};

inline bmdl::CountTensor placeholder_tensor(const Setup& setup) {
  return testing_support::zero_tensor(setup.V, setup.J);
}

// Data given the state, restricted to the setup's count cap.
inline bmdl::CountTensor simulate_data(const Setup& setup, const bmdl::LatentState& st,
                                       bmdl::RandomStream& rng) {
  bmdl::CountTensor out;
  for (int a = 0; a < setup.max_attempts; ++a)
    if (try_simulate_counts(st, setup.V, setup.max_count, rng, out)) return out;
  throw std::runtime_error("data under the count cap is too unlikely for this state");
}

// Draws (state, data) from the (restricted) prior predictive.
inline std::pair<bmdl::LatentState, bmdl::CountTensor> forward_draw(const Setup& setup,
                                                                     bmdl::RandomStream& rng) {
  const auto shape = placeholder_tensor(setup);
  for (int a = 0; a < setup.max_attempts; ++a) {
    auto st = bmdl::init_state(shape, setup.hp, setup.variant, rng);
    bmdl::CountTensor data;
    if (try_simulate_counts(st, setup.V, setup.max_count, rng, data)) return {std::move(st), std::move(data)};
  }
  throw std::runtime_error("prior predictive rarely falls under the count cap");
}

inline Result run(const Setup& setup, const Kernel& kernel,
                  const std::vector<Statistic>& stats = default_statistics()) {
  const std::size_t S = stats.size();
  std::vector<std::vector<double>> forward(S), chain(S);

  bmdl::RandomStream fwd = bmdl::RandomStream(setup.seed).split(1);
  for (int i = 0; i < setup.forward_draws; ++i) {
    auto [st, data] = forward_draw(setup, fwd);
    for (std::size_t s = 0; s < S; ++s) forward[s].push_back(stats[s].value(data, st));
  }

  // Each replicate starts at an exact prior draw, so every step is marginally a
  // prior draw; replicate averages are independent and give honest errors.
  bmdl::RandomStream master = bmdl::RandomStream(setup.seed).split(2);
  for (int rep = 0; rep < setup.replicates; ++rep) {
    bmdl::RandomStream rng = master.split(static_cast<std::uint64_t>(rep));
    auto [st, data] = forward_draw(setup, rng);
    bmdl::AugmentedCounts aug;
    std::vector<double> acc(S, 0.0);
    for (int step = 0; step < setup.steps; ++step) {
      kernel(data, st, rng, aug);
      data = simulate_data(setup, st, rng);
      for (std::size_t s = 0; s < S; ++s) acc[s] += stats[s].value(data, st);
    }
    for (std::size_t s = 0; s < S; ++s) chain[s].push_back(acc[s] / setup.steps);
  }

  Result out;
  for (std::size_t s = 0; s < S; ++s) {
    Comparison c;
    c.name = stats[s].name;
    c.forward_mean = testing_support::mean(forward[s]);
    c.forward_se = testing_support::std_error(forward[s]);
    c.chain_mean = testing_support::mean(chain[s]);
    c.chain_se = testing_support::std_error(chain[s]);
    const double se = std::hypot(c.forward_se, c.chain_se);
    c.z = se > 0.0 ? (c.chain_mean - c.forward_mean) / se
                   : (c.chain_mean == c.forward_mean ? 0.0 : HUGE_VAL);
    out.comparisons.push_back(c);
  }
  return out;
}

// Kernels: each is a valid transition for the joint posterior given the data.
namespace kernels {

inline Kernel full_sweep(bmdl::Hyperparameters hp, bmdl::ModelVariant variant) {
  return [hp, variant](const bmdl::CountTensor& t, bmdl::LatentState& st, bmdl::RandomStream& rng,
                       bmdl::AugmentedCounts& aug) { bmdl::sweep(t, st, hp, variant, rng, aug); };
}

// latent counts -> eta (phi integrated) -> phi
inline Kernel eta(bmdl::Hyperparameters hp) {
  return [hp](const bmdl::CountTensor& t, bmdl::LatentState& st, bmdl::RandomStream& rng,
              bmdl::AugmentedCounts& aug) {
    bmdl::sample_latent_counts(t, st, hp, rng, aug);
    bmdl::update_eta(aug, st, hp, rng);
    bmdl::update_phi(aug, st, hp, rng);
  };
}

inline Kernel phi(bmdl::Hyperparameters hp) {
  return [hp](const bmdl::CountTensor& t, bmdl::LatentState& st, bmdl::RandomStream& rng,
              bmdl::AugmentedCounts& aug) {
    bmdl::sample_latent_counts(t, st, hp, rng, aug);
    bmdl::update_phi(aug, st, hp, rng);
  };
}

inline Kernel theta(bmdl::Hyperparameters hp) {
  return [hp](const bmdl::CountTensor& t, bmdl::LatentState& st, bmdl::RandomStream& rng,
              bmdl::AugmentedCounts& aug) {
    bmdl::sample_latent_counts(t, st, hp, rng, aug);
    bmdl::update_theta(aug, st, hp, rng);
  };
}

// latent counts -> tables -> r (theta integrated) -> theta
inline Kernel r(bmdl::Hyperparameters hp) {
  return [hp](const bmdl::CountTensor& t, bmdl::LatentState& st, bmdl::RandomStream& rng,
              bmdl::AugmentedCounts& aug) {
    bmdl::sample_latent_counts(t, st, hp, rng, aug);
    bmdl::augment_tables(aug, st, hp, rng);
    bmdl::update_r(aug, st, hp, rng);
    bmdl::update_theta(aug, st, hp, rng);
  };
}

// ... -> s (r, theta integrated) -> r -> theta
inline Kernel s(bmdl::Hyperparameters hp) {
  return [hp](const bmdl::CountTensor& t, bmdl::LatentState& st, bmdl::RandomStream& rng,
              bmdl::AugmentedCounts& aug) {
    bmdl::sample_latent_counts(t, st, hp, rng, aug);
    bmdl::augment_tables(aug, st, hp, rng);
    bmdl::update_s(aug, st, hp, rng);
    bmdl::update_r(aug, st, hp, rng);
    bmdl::update_theta(aug, st, hp, rng);
  };
}

// ... -> gamma0 (s, r, theta integrated) -> s -> r -> theta
inline Kernel gamma0(bmdl::Hyperparameters hp) {
  return [hp](const bmdl::CountTensor& t, bmdl::LatentState& st, bmdl::RandomStream& rng,
              bmdl::AugmentedCounts& aug) {
    bmdl::sample_latent_counts(t, st, hp, rng, aug);
    bmdl::augment_tables(aug, st, hp, rng);
    bmdl::update_gamma0(aug, st, hp, rng);
    bmdl::update_s(aug, st, hp, rng);
    bmdl::update_r(aug, st, hp, rng);
    bmdl::update_theta(aug, st, hp, rng);
  };
}

// ... -> z (r, theta integrated) -> r -> theta
inline Kernel z(bmdl::Hyperparameters hp) {
  return [hp](const bmdl::CountTensor& t, bmdl::LatentState& st, bmdl::RandomStream& rng,
              bmdl::AugmentedCounts& aug) {
    bmdl::sample_latent_counts(t, st, hp, rng, aug);
    bmdl::augment_tables(aug, st, hp, rng);
    bmdl::update_z(aug, st, hp, rng);
    bmdl::update_r(aug, st, hp, rng);
    bmdl::update_theta(aug, st, hp, rng);
  };
}

inline Kernel pi(bmdl::Hyperparameters hp) {
  return [hp](const bmdl::CountTensor&, bmdl::LatentState& st, bmdl::RandomStream& rng,
              bmdl::AugmentedCounts&) { bmdl::update_pi(st, hp, rng); };
}

inline Kernel p(bmdl::Hyperparameters hp) {
  return [hp](const bmdl::CountTensor& t, bmdl::LatentState& st, bmdl::RandomStream& rng,
              bmdl::AugmentedCounts&) { bmdl::update_p(t, st, hp, rng); };
}

inline Kernel scales(bmdl::Hyperparameters hp, bmdl::ModelVariant variant) {
  return [hp, variant](const bmdl::CountTensor&, bmdl::LatentState& st, bmdl::RandomStream& rng,
                       bmdl::AugmentedCounts&) { bmdl::update_scales(st, hp, variant, rng); };
}

}  // namespace kernels

}  // namespace geweke
