#include <doctest.h>

#include <boost/math/distributions/gamma.hpp>
#include <cmath>

#include "bmdl/distributions.hpp"
#include "bmdl/gibbs.hpp"
#include "bmdl/model.hpp"
#include "test_support.hpp"

using namespace bmdl;
namespace ts = testing_support;

namespace {

CountTensor small_tensor() {
  return ts::make_tensor({{{1, 0, 4}, {0, 2, 0}, {7, 1, 0}, {0, 0, 3}},
                          {{0, 3}, {5, 0}, {1, 1}, {40, 0}}});
}

Hyperparameters moderate_hp(int K) {
  auto hp = Hyperparameters{}.with_all_priors(1.0);
  hp.K = K;
  return hp;
}

LatentState fresh_state(const CountTensor& t, const Hyperparameters& hp, std::uint64_t seed,
                        ModelVariant v = ModelVariant::BMDL) {
  RandomStream rng(seed);
  return init_state(t, hp, v, rng);
}

// Sets every p_j to `p` and every c_j to `c`, then recomputes depth terms.
void set_depth(LatentState& st, AugmentedCounts& aug, double p, double c) {
  for (auto& x : st.p) x.setConstant(p);
  for (auto& x : st.c_j) x.setConstant(c);
  compute_depth_terms(st, aug);
}

AugmentedCounts empty_aug(const LatentState& st, int K, Eigen::Index V) {
  AugmentedCounts aug;
  aug.ell_kv.setZero(K, V);
  aug.ell_jk.clear();
  aug.ell_tilde.clear();
  for (const auto& th : st.theta) {
    aug.ell_jk.push_back(MatrixXl::Zero(K, th.cols()));
    aug.ell_tilde.push_back(MatrixXl::Zero(K, th.cols()));
  }
  const auto D = static_cast<Eigen::Index>(st.theta.size());
  aug.ell_tilde_sum.setZero(K, D);
  aug.ell_tilde2.setZero(K, D);
  aug.ell_acute.setZero(K);
  compute_depth_terms(st, aug);
  return aug;
}

}  // namespace

TEST_CASE("sample_latent_counts: unit counts give one table, K = 1 split is the count itself") {
  const auto t = ts::make_tensor({{{1, 0}, {1, 6}, {0, 9}}});
  for (int K : {1, 4}) {
    const auto hp = moderate_hp(K);
    auto st = fresh_state(t, hp, 3);
    RandomStream rng(4);
    AugmentedCounts aug;
    aug.keep_splits = true;
    sample_latent_counts(t, st, hp, rng, aug);
    const auto& m = t.domains[0].counts;
    for (std::size_t i = 0; i < m.nnz(); ++i) {
      if (m.count[i] == 1) CHECK(aug.ell[0][i] == 1);
      CHECK(aug.ell[0][i] >= 1);
      CHECK(aug.ell[0][i] <= m.count[i]);
      std::int64_t total = 0;
      for (auto s = aug.split_start[0][i]; s < aug.split_start[0][i + 1]; ++s) {
        total += aug.split_count[0][s];
        if (K == 1) CHECK(aug.split_factor[0][s] == 0);
      }
      CHECK(total == aug.ell[0][i]);
    }
    CHECK(aug.ell_jk[0].sum() == aug.ell_kv.sum());
  }
}

TEST_CASE("sample_latent_counts: zero shape row with a positive count is degenerate, not fatal") {
  const auto t = ts::make_tensor({{{3}, {0}}});
  const auto hp = moderate_hp(2);
  auto st = fresh_state(t, hp, 1);
  st.theta[0].setZero();
  RandomStream rng(2);
  AugmentedCounts aug;
  sample_latent_counts(t, st, hp, rng, aug);
  CHECK(aug.ell[0][0] == 0);
  CHECK(aug.degenerate_entries == 1);
}

TEST_CASE("sample_latent_counts: depth terms") {
  const auto t = small_tensor();
  const auto hp = moderate_hp(3);
  auto st = fresh_state(t, hp, 1);
  AugmentedCounts aug;
  set_depth(st, aug, 0.5, 1.0);
  // p = 0.5, c = 1: q = ln 2, probability q / (c + q) = ln2 / (1 + ln2)
  const double ln2 = std::log(2.0);
  const double ptilde = ln2 / (1.0 + ln2);
  CHECK(ptilde == doctest::Approx(0.4093).epsilon(1e-4));
  CHECK(aug.q_j[0](0) == doctest::Approx(ln2).epsilon(1e-14));
  CHECK(aug.q_tilde_j[0](0) == doctest::Approx(-std::log(1.0 - ptilde)).epsilon(1e-13));
  CHECK(aug.domain_rate(1) == doctest::Approx(2.0 * -std::log(1.0 - ptilde)).epsilon(1e-13));
  CHECK(aug.domain_zero_log(1) ==
        doctest::Approx(std::log(1.0 + aug.domain_rate(1) / st.c_d(1))).epsilon(1e-13));
}

TEST_CASE("update_phi: empty counts with eta = 1 is a uniform Dirichlet draw") {
  const Eigen::Index V = 4;
  const auto t = ts::zero_tensor(V, {1});
  auto hp = moderate_hp(1);
  auto st = fresh_state(t, hp, 1);
  st.eta = 1.0;
  auto aug = empty_aug(st, 1, V);
  RandomStream rng(5);
  std::vector<double> first;
  for (int i = 0; i < 40000; ++i) {
    update_phi(aug, st, hp, rng);
    first.push_back(st.phi(0, 0));
  }
  // Dir(1,1,1,1) marginal is Beta(1,3): mean 1/4, variance 3/80
  CHECK(ts::mean(first) == doctest::Approx(0.25).epsilon(0.02));
  CHECK(ts::variance(first) == doctest::Approx(3.0 / 80.0).epsilon(0.04));
}

TEST_CASE("update_phi: single gene gives a unit column") {
  const auto t = ts::make_tensor({{{5, 2}}});
  const auto hp = moderate_hp(3);
  auto st = fresh_state(t, hp, 1);
  RandomStream rng(1);
  AugmentedCounts aug;
  sample_latent_counts(t, st, hp, rng, aug);
  update_phi(aug, st, hp, rng);
  CHECK((st.phi.array() == 1.0).all());
}

TEST_CASE("update_phi: posterior mean with a concentrated count") {
  const Eigen::Index V = 6;
  const auto t = ts::zero_tensor(V, {1});
  const auto hp = moderate_hp(1);
  auto st = fresh_state(t, hp, 1);
  st.eta = 0.01;
  auto aug = empty_aug(st, 1, V);
  aug.ell_kv(0, 0) = 100;
  RandomStream rng(6);
  std::vector<double> first;
  for (int i = 0; i < 10000; ++i) {
    update_phi(aug, st, hp, rng);
    first.push_back(st.phi(0, 0));
  }
  const double expected = 100.01 / (100.01 + 0.01 * (V - 1));
  CHECK(std::abs(ts::mean(first) - expected) < 4.0 * ts::std_error(first) + 1e-12);
}

TEST_CASE("update_theta: point mass and posterior mean") {
  const auto t = ts::zero_tensor(3, {1});
  const auto hp = moderate_hp(2);
  auto st = fresh_state(t, hp, 1);
  auto aug = empty_aug(st, 2, 3);
  st.r(0, 0) = 0.0;
  st.r(1, 0) = 2.0;
  aug.ell_jk[0](1, 0) = 8;
  set_depth(st, aug, 1.0 - std::exp(-1.0), 1.0);
  CHECK(aug.q_j[0](0) == doctest::Approx(1.0).epsilon(1e-14));
  RandomStream rng(7);
  std::vector<double> draws;
  for (int i = 0; i < 100000; ++i) {
    update_theta(aug, st, hp, rng);
    CHECK(st.theta[0](0, 0) == 0.0);
    draws.push_back(st.theta[0](1, 0));
  }
  CHECK(std::abs(ts::mean(draws) - 5.0) < 4.0 * ts::std_error(draws));
}

TEST_CASE("update_theta: p near zero recovers the prior scale") {
  const auto t = ts::zero_tensor(3, {1});
  const auto hp = moderate_hp(1);
  auto st = fresh_state(t, hp, 1);
  auto aug = empty_aug(st, 1, 3);
  st.r(0, 0) = 3.0;
  set_depth(st, aug, 1e-12, 2.0);
  RandomStream rng(8);
  std::vector<double> draws;
  for (int i = 0; i < 50000; ++i) {
    update_theta(aug, st, hp, rng);
    draws.push_back(st.theta[0](0, 0));
  }
  CHECK(std::abs(ts::mean(draws) - 1.5) < 4.0 * ts::std_error(draws));
}

TEST_CASE("update_r: degenerate branch and shape arithmetic") {
  const auto t = ts::zero_tensor(3, {2});
  const auto hp = moderate_hp(2);
  auto st = fresh_state(t, hp, 1);
  auto aug = empty_aug(st, 2, 3);
  set_depth(st, aug, 0.5, 1.0);
  st.z(0, 0) = 0;
  st.z(1, 0) = 1;
  st.s(1) = 1.7;
  st.c_d(0) = 0.8;
  RandomStream rng(9);
  std::vector<double> draws;
  for (int i = 0; i < 60000; ++i) {
    update_r(aug, st, hp, rng);
    CHECK(st.r(0, 0) == 0.0);
    draws.push_back(st.r(1, 0));
  }
  const double expected = 1.7 / (0.8 + aug.domain_rate(0));
  CHECK(std::abs(ts::mean(draws) - expected) < 4.0 * ts::std_error(draws));
}

TEST_CASE("update_s: prior recovery and scale from active domains") {
  const auto t = ts::zero_tensor(3, {2, 2});
  auto hp = moderate_hp(1);
  auto st = fresh_state(t, hp, 1);
  auto aug = empty_aug(st, 1, 3);
  set_depth(st, aug, 0.5, 1.0);
  st.gamma0 = 2.0;
  st.c0 = 1.5;
  RandomStream rng(10);

  st.z.setZero();
  std::vector<double> prior;
  for (int i = 0; i < 60000; ++i) {
    update_s(aug, st, hp, rng);
    prior.push_back(st.s(0));
  }
  CHECK(std::abs(ts::mean(prior) - 2.0 / 1.5) < 4.0 * ts::std_error(prior));

  // Only domain 1 active: rate c0 + log(1 + Q_1 / c_1)
  st.z(0, 1) = 1;
  aug.ell_tilde2(0, 1) = 3;
  std::vector<double> post;
  for (int i = 0; i < 60000; ++i) {
    update_s(aug, st, hp, rng);
    post.push_back(st.s(0));
  }
  const double rate = 1.5 + std::log1p(aug.domain_rate(1) / st.c_d(1));
  CHECK(std::abs(ts::mean(post) - 5.0 / rate) < 4.0 * ts::std_error(post));
}

TEST_CASE("update_s: vague prior shrinks draws toward zero") {
  const auto t = ts::zero_tensor(3, {1});
  auto hp = Hyperparameters{};
  hp.K = 100;
  auto st = fresh_state(t, hp, 1);
  auto aug = empty_aug(st, 100, 3);
  st.gamma0 = 0.01;
  st.c0 = 1.0;
  st.z.setZero();
  RandomStream rng(11);
  update_s(aug, st, hp, rng);
  // Gamma(1e-4, 1): P(x < 1e-10) = P(u < (1e-10)^{1e-4} ...) ~ 0.9977
  const boost::math::gamma_distribution<double> g(1e-4, 1.0);
  const double q = boost::math::cdf(g, 1e-10);
  CHECK(q > 0.99);
  int small = 0;
  for (int k = 0; k < 100; ++k) small += st.s(k) < 1e-10 ? 1 : 0;
  CHECK(small >= 90);
}

TEST_CASE("update_gamma0: prior recovery and single-term rate") {
  const auto t = ts::zero_tensor(3, {2});
  auto hp = moderate_hp(1);
  hp.a0 = 2.0;
  hp.b0 = 0.5;
  auto st = fresh_state(t, hp, 1);
  auto aug = empty_aug(st, 1, 3);
  set_depth(st, aug, 0.5, 1.0);
  RandomStream rng(12);

  st.z.setZero();
  std::vector<double> prior;
  for (int i = 0; i < 60000; ++i) {
    update_gamma0(aug, st, hp, rng);
    prior.push_back(st.gamma0);
  }
  CHECK(std::abs(ts::mean(prior) - 4.0) < 4.0 * ts::std_error(prior));

  st.z.setOnes();
  st.c0 = 1.3;
  aug.ell_acute(0) = 2;
  const double A = aug.domain_zero_log(0);
  const double pstar = A / (st.c0 + A);
  std::vector<double> post;
  for (int i = 0; i < 60000; ++i) {
    update_gamma0(aug, st, hp, rng);
    post.push_back(st.gamma0);
  }
  CHECK(std::abs(ts::mean(post) - 4.0 / (0.5 - std::log(1.0 - pstar))) < 4.0 * ts::std_error(post));
}

TEST_CASE("update_z: forced, blocked and unscaled branches") {
  const auto t = ts::zero_tensor(3, {2});
  const auto hp = moderate_hp(3);
  auto st = fresh_state(t, hp, 1);
  auto aug = empty_aug(st, 3, 3);
  set_depth(st, aug, 0.5, 1.0);
  aug.ell_tilde_sum(0, 0) = 5;
  st.pi << 0.0, 0.0, 0.3;
  st.s << 2.0, 2.0, 0.0;
  RandomStream rng(13);
  int on = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    update_z(aug, st, hp, rng);
    CHECK(st.z(0, 0) == 1);
    CHECK(st.z(1, 0) == 0);
    on += st.z(2, 0);
  }
  const double se = std::sqrt(0.3 * 0.7 / n);
  CHECK(std::abs(on / double(n) - 0.3) < 4.0 * se);
}

TEST_CASE("update_z: tilted probability") {
  const auto t = ts::zero_tensor(3, {2});
  const auto hp = moderate_hp(1);
  auto st = fresh_state(t, hp, 1);
  auto aug = empty_aug(st, 1, 3);
  set_depth(st, aug, 0.5, 1.0);
  st.pi(0) = 0.6;
  st.s(0) = 1.2;
  const double zero_prob = std::pow(1.0 / (1.0 + aug.domain_rate(0) / st.c_d(0)), 1.2);
  const double expected = 0.6 * zero_prob / (0.6 * zero_prob + 0.4);
  RandomStream rng(14);
  int on = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    update_z(aug, st, hp, rng);
    on += st.z(0, 0);
  }
  CHECK(std::abs(on / double(n) - expected) < 4.0 * std::sqrt(expected * (1 - expected) / n));
}

TEST_CASE("update_pi: conjugate counting") {
  const auto t = ts::zero_tensor(3, {1, 1});
  auto hp = moderate_hp(2);
  hp.c_ibp = 3.0;
  auto st = fresh_state(t, hp, 1);
  st.z.row(0).setOnes();
  st.z.row(1).setZero();
  RandomStream rng(15);
  std::vector<double> a, b;
  for (int i = 0; i < 60000; ++i) {
    update_pi(st, hp, rng);
    a.push_back(st.pi(0));
    b.push_back(st.pi(1));
  }
  // Beta(c/K + 2, c(1 - 1/K)) and Beta(c/K, c(1 - 1/K) + 2)
  CHECK(std::abs(ts::mean(a) - 3.5 / 5.0) < 4.0 * ts::std_error(a));
  CHECK(std::abs(ts::mean(b) - 1.5 / 5.0) < 4.0 * ts::std_error(b));
}

TEST_CASE("update_pi: K = 1 is a point mass at one") {
  const auto t = ts::zero_tensor(3, {1, 1});
  auto hp = moderate_hp(1);
  auto st = fresh_state(t, hp, 1);
  RandomStream rng(16);
  update_pi(st, hp, rng);
  CHECK(st.pi(0) == 1.0);
}

TEST_CASE("update_eta: empty counts give the prior, a single count gives one table") {
  const Eigen::Index V = 5;
  const auto t = ts::zero_tensor(V, {1});
  auto hp = moderate_hp(2);
  hp.s0 = 2.0;
  hp.w0 = 4.0;
  auto st = fresh_state(t, hp, 1);
  auto aug = empty_aug(st, 2, V);
  RandomStream rng(17);
  std::vector<double> prior;
  for (int i = 0; i < 60000; ++i) {
    update_eta(aug, st, hp, rng);
    prior.push_back(st.eta);
    CHECK(std::isnan(aug.q_aux(0)));
  }
  CHECK(std::abs(ts::mean(prior) - 0.5) < 4.0 * ts::std_error(prior));

  aug.ell_kv(1, 3) = 1;
  for (int i = 0; i < 1000; ++i) {
    update_eta(aug, st, hp, rng);
    CHECK(aug.u_vk(1, 3) == 1);
    CHECK(aug.u_vk.sum() == 1);
    CHECK(aug.q_aux(1) > 0.0);
  }
}

TEST_CASE("update_p: prior draw, posterior mean, pinned variants") {
  const auto t = ts::make_tensor({{{0, 60}, {0, 40}}});
  auto hp = moderate_hp(1);
  hp.a0 = 2.0;
  hp.b0 = 3.0;
  auto st = fresh_state(t, hp, 1);
  st.theta[0](0, 0) = 0.0;
  st.theta[0](0, 1) = 100.0;
  RandomStream rng(18);
  std::vector<double> prior, post;
  for (int i = 0; i < 60000; ++i) {
    update_p(t, st, hp, rng);
    prior.push_back(st.p[0](0));
    post.push_back(st.p[0](1));
  }
  CHECK(std::abs(ts::mean(prior) - 0.4) < 4.0 * ts::std_error(prior));
  CHECK(std::abs(ts::mean(post) - 102.0 / 205.0) < 4.0 * ts::std_error(post));

  hp = Hyperparameters{};
  hp.K = 1;
  post.clear();
  for (int i = 0; i < 20000; ++i) {
    update_p(t, st, hp, rng);
    post.push_back(st.p[0](1));
  }
  CHECK(ts::mean(post) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("update_scales: prior recovery and posterior mean on a scalar toy") {
  const auto t = ts::zero_tensor(3, {1});
  auto hp = moderate_hp(1);
  hp.e0 = 2.0;
  hp.f0 = 3.0;
  auto st = fresh_state(t, hp, 1);
  RandomStream rng(19);

  st.theta[0].setZero();
  st.r.setZero();
  st.s.setZero();
  std::vector<double> cj, cd, c0;
  for (int i = 0; i < 60000; ++i) {
    update_scales(st, hp, ModelVariant::BMDL, rng);
    cj.push_back(st.c_j[0](0));
    cd.push_back(st.c_d(0));
    c0.push_back(st.c0);
    st.gamma0 = 0.0;  // c0 prior: Gamma(s0, 1/t0)
  }
  CHECK(std::abs(ts::mean(cj) - 2.0 / 3.0) < 4.0 * ts::std_error(cj));
  CHECK(std::abs(ts::mean(cd) - 1.0) < 4.0 * ts::std_error(cd));
  CHECK(std::abs(ts::mean(c0) - 1.0) < 4.0 * ts::std_error(c0));

  st.theta[0](0, 0) = 1.5;
  st.r(0, 0) = 0.7;
  cj.clear();
  for (int i = 0; i < 100000; ++i) {
    update_scales(st, hp, ModelVariant::BMDL, rng);
    cj.push_back(st.c_j[0](0));
  }
  CHECK(std::abs(ts::mean(cj) - 2.7 / 4.5) < 4.0 * ts::std_error(cj));

  for (auto v : {ModelVariant::HDP_NBFA, ModelVariant::NB_HDP}) {
    st.c_j[0].setConstant(1.0);
    update_scales(st, hp, v, rng);
    CHECK(st.c_j[0](0) == 1.0);
  }
}

TEST_CASE("sweep: count conservation and support preservation") {
  const auto t = small_tensor();
  for (auto v : {ModelVariant::BMDL, ModelVariant::HGNBP, ModelVariant::HDP_NBFA, ModelVariant::NB_HDP}) {
    for (auto hp : {moderate_hp(5), []() { Hyperparameters h; h.K = 5; return h; }()}) {
      auto st = fresh_state(t, hp, 21, v);
      RandomStream rng(22);
      AugmentedCounts aug;
      SweepOptions opts;
      opts.keep_splits = true;
      for (int it = 0; it < 300; ++it) {
        sweep(t, st, hp, v, rng, aug, opts);
        for (std::size_t d = 0; d < t.num_domains(); ++d) {
          const auto& m = t.domains[d].counts;
          for (std::size_t i = 0; i < m.nnz(); ++i) {
            std::int64_t total = 0;
            for (auto s = aug.split_start[d][i]; s < aug.split_start[d][i + 1]; ++s)
              total += aug.split_count[d][s];
            REQUIRE(total == aug.ell[d][i]);
            REQUIRE(aug.ell[d][i] <= m.count[i]);
            REQUIRE(aug.ell[d][i] >= 0);
          }
          const auto& tables = aug.ell_tilde[d];
          REQUIRE((tables.array() <= aug.ell_jk[d].array()).all());
        }
        REQUIRE((aug.ell_tilde2.array() <= aug.ell_tilde_sum.array()).all());
        REQUIRE_NOTHROW(check_state(t, st, hp));
      }
    }
  }
}

TEST_CASE("sweep: variant pins never move") {
  const auto t = small_tensor();
  const auto hp = moderate_hp(4);
  {
    auto st = fresh_state(t, hp, 1, ModelVariant::NB_HDP);
    RandomStream rng(2);
    AugmentedCounts aug;
    for (int it = 0; it < 200; ++it) {
      sweep(t, st, hp, ModelVariant::NB_HDP, rng, aug);
      for (std::size_t d = 0; d < 2; ++d) {
        REQUIRE((st.p[d].array() - 0.5).abs().maxCoeff() == 0.0);
        REQUIRE((st.c_j[d].array() == 1.0).all());
      }
      REQUIRE((st.z.array() == 1).all());
    }
  }
  {
    auto st = fresh_state(t, hp, 1, ModelVariant::HGNBP);
    RandomStream rng(2);
    AugmentedCounts aug;
    for (int it = 0; it < 200; ++it) {
      sweep(t, st, hp, ModelVariant::HGNBP, rng, aug);
      REQUIRE((st.z.array() == 1).all());
    }
  }
}

TEST_CASE("sweep: zero-count tensor stays in support") {
  const auto t = ts::zero_tensor(6, {3, 2});
  Hyperparameters hp;
  hp.K = 10;
  auto st = fresh_state(t, hp, 5);
  RandomStream rng(6);
  AugmentedCounts aug;
  for (int it = 0; it < 200; ++it) {
    sweep(t, st, hp, ModelVariant::BMDL, rng, aug);
    REQUIRE_NOTHROW(check_state(t, st, hp));
  }
  CHECK(aug.ell_kv.sum() == 0);
}

TEST_CASE("sweep: deterministic replay") {
  const auto t = small_tensor();
  const auto hp = moderate_hp(4);
  auto a = fresh_state(t, hp, 1);
  auto b = a;
  RandomStream ra(77), rb(77);
  AugmentedCounts aa, ab;
  for (int it = 0; it < 20; ++it) {
    sweep(t, a, hp, ModelVariant::BMDL, ra, aa);
    sweep(t, b, hp, ModelVariant::BMDL, rb, ab);
  }
  CHECK(a == b);
  CHECK(ra == rb);
}

TEST_CASE("sweep: latent-count cost grows with min(n, cutoff)") {
  auto hp = moderate_hp(1);
  hp.crt_cutoff = 200;
  auto cost = [&](std::int64_t n) {
    const auto t = ts::make_tensor({{{n}}});
    auto st = fresh_state(t, hp, 1);
    RandomStream rng(31);
    AugmentedCounts aug;
    double total = 0.0;
    const int reps = 200;
    for (int i = 0; i < reps; ++i) {
      RandomStream local = rng.split(static_cast<std::uint64_t>(i));
      const auto before = local.draws();
      sample_latent_counts(t, st, hp, local, aug);
      total += static_cast<double>(local.draws() - before);
    }
    return total / reps;
  };
  const double c25 = cost(25), c50 = cost(50), c100 = cost(100), c200 = cost(200);
  const double c2k = cost(2000), c20k = cost(20000), c200k = cost(200000);
  // Below the cutoff: linear in n.
  CHECK(c50 / c25 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(c100 / c50 == doctest::Approx(2.0).epsilon(0.1));
  // Past the cutoff: flat.
  CHECK(c2k / c200 < 1.2);
  CHECK(c200k / c2k < 1.2);
  CHECK(c20k / c2k < 1.2);
}
