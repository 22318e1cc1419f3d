#include "bmdl/model.hpp"

#include <cmath>
#include <limits>

#include "bmdl/error.hpp"

namespace bmdl {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw ParameterError(std::string("hyperparameter ") + name + " must be positive and finite");
}

// Beta(a, 0) is the point mass at 1; arises for pi when K == 1.
double beta_or_point(double a, double b, RandomStream& rng) {
  if (b == 0.0) return 1.0;
  return dist::sample_beta(a, b, rng);
}

}  // namespace

void Hyperparameters::validate() const {
  if (K < 1) throw ParameterError("truncation level K must be at least 1");
  if (crt_cutoff < 1) throw ParameterError("CRT cutoff must be at least 1");
  require_positive(a0, "a0");
  require_positive(b0, "b0");
  require_positive(e0, "e0");
  require_positive(f0, "f0");
  require_positive(h0, "h0");
  require_positive(u0, "u0");
  require_positive(s0, "s0");
  require_positive(w0, "w0");
  require_positive(t0, "t0");
  require_positive(c_ibp, "c_ibp");
}

Hyperparameters Hyperparameters::with_all_priors(double value) const {
  Hyperparameters hp = *this;
  hp.a0 = hp.b0 = hp.e0 = hp.f0 = hp.h0 = hp.u0 = hp.s0 = hp.w0 = hp.t0 = value;
  hp.c_ibp = value;
  return hp;
}

std::string_view to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::BMDL: return "bmdl";
    case ModelVariant::HGNBP: return "hgnbp";
    case ModelVariant::HDP_NBFA: return "hdp-nbfa";
    case ModelVariant::NB_HDP: return "nb-hdp";
    case ModelVariant::TARGET_ONLY: return "target-only";
  }
  return "unknown";
}

ModelVariant parse_variant(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(c)));
  if (lower == "bmdl") return ModelVariant::BMDL;
  if (lower == "hgnbp") return ModelVariant::HGNBP;
  if (lower == "hdp-nbfa") return ModelVariant::HDP_NBFA;
  if (lower == "nb-hdp") return ModelVariant::NB_HDP;
  if (lower == "target-only" || lower == "hgnbp-nbfa") return ModelVariant::TARGET_ONLY;
  throw ParameterError("unknown model variant '" + std::string(name) + "'");
}

std::string_view to_string(InitStrategy s) {
  return s == InitStrategy::Prior ? "prior" : "dispersed";
}

InitStrategy parse_init_strategy(std::string_view name) {
  if (name == "prior") return InitStrategy::Prior;
  if (name == "dispersed") return InitStrategy::Dispersed;
  throw ParameterError("unknown initialization '" + std::string(name) + "'");
}

bool operator==(const LatentState& a, const LatentState& b) {
  return a.phi == b.phi && a.theta == b.theta && a.r == b.r && a.s == b.s && a.z == b.z &&
         a.pi == b.pi && a.p == b.p && a.c_j == b.c_j && a.c_d == b.c_d && a.c0 == b.c0 &&
         a.gamma0 == b.gamma0 && a.eta == b.eta;
}

namespace {

LatentState draw_from_prior(const CountTensor& tensor, const Hyperparameters& hp, ModelVariant variant,
                            RandomStream& rng) {
  const int K = hp.K;
  const auto D = static_cast<Eigen::Index>(tensor.num_domains());
  const auto V = static_cast<Eigen::Index>(tensor.num_genes());

  LatentState st;
  st.gamma0 = dist::sample_gamma(hp.a0, 1.0 / hp.b0, rng);
  st.c0 = dist::sample_gamma(hp.s0, 1.0 / hp.t0, rng);
  st.s.resize(K);
  for (int k = 0; k < K; ++k) st.s(k) = dist::sample_gamma(st.gamma0 / K, 1.0 / st.c0, rng);

  st.pi.resize(K);
  for (int k = 0; k < K; ++k)
    st.pi(k) = beta_or_point(hp.c_ibp / K, hp.c_ibp * (1.0 - 1.0 / K), rng);
  st.z.resize(K, D);
  for (Eigen::Index d = 0; d < D; ++d)
    for (int k = 0; k < K; ++k)
      st.z(k, d) = pins_z(variant) ? 1 : (dist::sample_bernoulli(st.pi(k), rng) ? 1 : 0);

  st.c_d.resize(D);
  for (Eigen::Index d = 0; d < D; ++d) st.c_d(d) = dist::sample_gamma(hp.h0, 1.0 / hp.u0, rng);
  st.r.resize(K, D);
  for (Eigen::Index d = 0; d < D; ++d)
    for (int k = 0; k < K; ++k)
      st.r(k, d) = dist::sample_gamma(st.z(k, d) * st.s(k), 1.0 / st.c_d(d), rng);

  st.theta.resize(static_cast<std::size_t>(D));
  st.p.resize(static_cast<std::size_t>(D));
  st.c_j.resize(static_cast<std::size_t>(D));
  for (std::size_t d = 0; d < tensor.num_domains(); ++d) {
    const auto J = static_cast<Eigen::Index>(tensor.num_samples(d));
    auto& cj = st.c_j[d];
    cj.resize(J);
    for (Eigen::Index j = 0; j < J; ++j)
      cj(j) = pins_sample_scale(variant) ? kPinnedSampleScale
                                         : dist::sample_gamma(hp.e0, 1.0 / hp.f0, rng);
    auto& th = st.theta[d];
    th.resize(K, J);
    for (Eigen::Index j = 0; j < J; ++j)
      for (int k = 0; k < K; ++k)
        th(k, j) = dist::sample_gamma(st.r(k, static_cast<Eigen::Index>(d)), 1.0 / cj(j), rng);
    auto& p = st.p[d];
    p.resize(J);
    for (Eigen::Index j = 0; j < J; ++j)
      p(j) = pins_p(variant) ? kPinnedP : dist::sample_beta(hp.a0, hp.b0, rng);
  }

  st.eta = dist::sample_gamma(hp.s0, 1.0 / hp.w0, rng);
  st.phi.resize(V, K);
  std::vector<double> conc(static_cast<std::size_t>(V), st.eta);
  for (int k = 0; k < K; ++k)
    dist::sample_dirichlet_into(conc, {st.phi.col(k).data(), static_cast<std::size_t>(V)}, rng);

  apply_pins(st, variant);
  return st;
}

bool representable(const LatentState& st) {
  auto finite = [](const auto& m) { return m.allFinite(); };
  if (!finite(st.phi) || !finite(st.r) || !finite(st.s) || !finite(st.c_d)) return false;
  for (const auto& t : st.theta)
    if (!finite(t)) return false;
  for (const auto& c : st.c_j)
    if (!finite(c)) return false;
  return std::isfinite(st.c0) && std::isfinite(st.gamma0) && std::isfinite(st.eta);
}

}  // namespace

// Vague priors put real mass on values a double cannot hold; such draws are
// rejected, so the initial state is the prior restricted to representable states.
LatentState init_state(const CountTensor& tensor, const Hyperparameters& hp, ModelVariant variant,
                       RandomStream& rng) {
  hp.validate();
  const auto report = validate(tensor);
  if (!report.ok()) throw DataError("invalid count tensor:\n" + report.to_string());

  for (int attempt = 0; attempt < kInitAttempts; ++attempt) {
    try {
      auto st = draw_from_prior(tensor, hp, variant, rng);
      if (representable(st) && std::isfinite(log_joint(tensor, st, hp))) return st;
    } catch (const NumericError&) {
    }
  }
  throw NumericError("no representable initial state after " + std::to_string(kInitAttempts) +
                     " prior draws");
}

void apply_pins(LatentState& state, ModelVariant variant) {
  if (pins_z(variant)) state.z.setOnes();
  if (pins_sample_scale(variant))
    for (auto& c : state.c_j) c.setConstant(kPinnedSampleScale);
  if (pins_p(variant))
    for (auto& p : state.p) p.setConstant(kPinnedP);
}

void check_state(const CountTensor& tensor, const LatentState& st, const Hyperparameters& hp) {
  const auto K = static_cast<Eigen::Index>(hp.K);
  const auto D = tensor.num_domains();
  auto fail = [](const std::string& what) { throw ParameterError("invalid latent state: " + what); };

  if (st.phi.rows() != static_cast<Eigen::Index>(tensor.num_genes()) || st.phi.cols() != K)
    fail("phi has wrong shape");
  for (Eigen::Index k = 0; k < K; ++k) {
    if ((st.phi.col(k).array() < 0.0).any() || !st.phi.col(k).allFinite())
      fail("phi column " + std::to_string(k) + " has a negative or non-finite entry");
    if (std::abs(st.phi.col(k).sum() - 1.0) > 1e-9)
      fail("phi column " + std::to_string(k) + " does not sum to 1");
  }
  if (st.theta.size() != D || st.p.size() != D || st.c_j.size() != D)
    fail("per-domain blocks have wrong count");
  if (st.r.rows() != K || st.r.cols() != static_cast<Eigen::Index>(D)) fail("r has wrong shape");
  if (st.z.rows() != K || st.z.cols() != static_cast<Eigen::Index>(D)) fail("z has wrong shape");
  if (st.s.size() != K || st.pi.size() != K) fail("s or pi has wrong length");
  if (st.c_d.size() != static_cast<Eigen::Index>(D)) fail("c_d has wrong length");
  if ((st.r.array() < 0.0).any() || !st.r.allFinite()) fail("r must be non-negative");
  if ((st.s.array() < 0.0).any() || !st.s.allFinite()) fail("s must be non-negative");
  if (((st.z.array() != 0) && (st.z.array() != 1)).any()) fail("z must be binary");
  if ((st.pi.array() < 0.0).any() || (st.pi.array() > 1.0).any()) fail("pi must lie in [0,1]");
  if ((st.c_d.array() <= 0.0).any() || !st.c_d.allFinite()) fail("c_d must be positive");
  if (!(st.c0 > 0.0) || !(st.gamma0 > 0.0) || !(st.eta > 0.0)) fail("scalar must be positive");
  for (std::size_t d = 0; d < D; ++d) {
    const auto J = static_cast<Eigen::Index>(tensor.num_samples(d));
    if (st.theta[d].rows() != K || st.theta[d].cols() != J) fail("theta has wrong shape");
    if (st.p[d].size() != J || st.c_j[d].size() != J) fail("p or c_j has wrong length");
    if ((st.theta[d].array() < 0.0).any() || !st.theta[d].allFinite())
      fail("theta must be non-negative and finite");
    if ((st.p[d].array() <= 0.0).any() || (st.p[d].array() >= 1.0).any()) fail("p must lie in (0,1)");
    if ((st.c_j[d].array() <= 0.0).any() || !st.c_j[d].allFinite()) fail("c_j must be positive");
  }
}

namespace logpdf {

double gamma(double x, double shape, double scale) {
  if (shape == 0.0) return x == 0.0 ? 0.0 : kNegInf;
  if (x < 0.0) return kNegInf;
  if (x == 0.0) {
    if (shape < 1.0) return std::numeric_limits<double>::infinity();
    if (shape == 1.0) return -std::log(scale);
    return kNegInf;
  }
  return (shape - 1.0) * std::log(x) - x / scale - std::lgamma(shape) - shape * std::log(scale);
}

double beta(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return kNegInf;
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) + std::lgamma(a + b) -
         std::lgamma(a) - std::lgamma(b);
}

double negative_binomial(std::int64_t n, double r, double p) {
  if (n < 0) return kNegInf;
  if (r == 0.0) return n == 0 ? 0.0 : kNegInf;
  const double nd = static_cast<double>(n);
  return std::lgamma(nd + r) - std::lgamma(r) - std::lgamma(nd + 1.0) + nd * std::log(p) +
         r * std::log1p(-p);
}

}  // namespace logpdf

double log_joint(const CountTensor& tensor, const LatentState& st, const Hyperparameters& hp) {
  check_state(tensor, st, hp);
  const int K = hp.K;
  const auto V = st.phi.rows();
  double total = 0.0;

  // Likelihood. Zero entries contribute R_vj log(1 - p_j); summed over genes that is
  // log(1 - p_j) * sum_k theta_kj * colsum_k(phi).
  const Eigen::VectorXd phi_mass = st.phi.colwise().sum().transpose();
  const Eigen::MatrixXd phi_t = st.phi.transpose();
  for (std::size_t d = 0; d < tensor.num_domains(); ++d) {
    const auto& m = tensor.domains[d].counts;
    const auto& th = st.theta[d];
    for (std::size_t j = 0; j < m.num_samples(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double p = st.p[d](jj);
      const double log1mp = std::log1p(-p);
      const double logp = std::log(p);
      total += log1mp * th.col(jj).dot(phi_mass);
      const auto genes = m.genes_of(j);
      const auto counts = m.counts_of(j);
      for (std::size_t i = 0; i < genes.size(); ++i) {
        const double rate = phi_t.col(genes[i]).dot(th.col(jj));
        if (rate <= 0.0) return kNegInf;
        const double n = static_cast<double>(counts[i]);
        total += std::lgamma(n + rate) - std::lgamma(rate) - std::lgamma(n + 1.0) + n * logp;
      }
    }
  }

  // Loadings and their concentration.
  const double lg_veta = std::lgamma(static_cast<double>(V) * st.eta);
  const double lg_eta = std::lgamma(st.eta);
  for (int k = 0; k < K; ++k) {
    total += lg_veta - static_cast<double>(V) * lg_eta;
    total += (st.eta - 1.0) * st.phi.col(k).array().log().sum();
  }
  total += logpdf::gamma(st.eta, hp.s0, 1.0 / hp.w0);

  for (std::size_t d = 0; d < tensor.num_domains(); ++d) {
    const auto dd = static_cast<Eigen::Index>(d);
    const auto& th = st.theta[d];
    for (Eigen::Index j = 0; j < th.cols(); ++j) {
      const double cj = st.c_j[d](j);
      for (int k = 0; k < K; ++k) total += logpdf::gamma(th(k, j), st.r(k, dd), 1.0 / cj);
      total += logpdf::gamma(cj, hp.e0, 1.0 / hp.f0);
      total += logpdf::beta(st.p[d](j), hp.a0, hp.b0);
    }
    for (int k = 0; k < K; ++k) {
      total += logpdf::gamma(st.r(k, dd), st.z(k, dd) * st.s(k), 1.0 / st.c_d(dd));
      total += st.z(k, dd) == 1 ? std::log(st.pi(k)) : std::log1p(-st.pi(k));
    }
    total += logpdf::gamma(st.c_d(dd), hp.h0, 1.0 / hp.u0);
  }

  for (int k = 0; k < K; ++k) {
    total += logpdf::gamma(st.s(k), st.gamma0 / K, 1.0 / st.c0);
    if (K > 1) total += logpdf::beta(st.pi(k), hp.c_ibp / K, hp.c_ibp * (1.0 - 1.0 / K));
    else if (st.pi(k) != 1.0) return kNegInf;
  }
  total += logpdf::gamma(st.gamma0, hp.a0, 1.0 / hp.b0);
  total += logpdf::gamma(st.c0, hp.s0, 1.0 / hp.t0);
  return total;
}

LatentState init_dispersed(const CountTensor& tensor, const Hyperparameters& hp,
                           ModelVariant variant, RandomStream& rng) {
  hp.validate();
  const auto report = validate(tensor);
  if (!report.ok()) throw DataError("invalid count tensor:\n" + report.to_string());

  const int K = hp.K;
  const auto D = static_cast<Eigen::Index>(tensor.num_domains());
  const auto V = static_cast<Eigen::Index>(tensor.num_genes());
  LatentState st;
  st.gamma0 = 1.0;
  st.c0 = 1.0;
  st.eta = 1.0;
  st.s.setOnes(K);
  st.pi.setConstant(K, K == 1 ? 1.0 : 0.5);
  st.z.setOnes(K, D);
  st.c_d.setOnes(D);
  st.r.setOnes(K, D);
  st.theta.resize(static_cast<std::size_t>(D));
  st.p.resize(static_cast<std::size_t>(D));
  st.c_j.resize(static_cast<std::size_t>(D));
  for (std::size_t d = 0; d < tensor.num_domains(); ++d) {
    const auto J = static_cast<Eigen::Index>(tensor.num_samples(d));
    st.c_j[d].setOnes(J);
    st.p[d].setConstant(J, 0.5);
    auto& th = st.theta[d];
    th.resize(K, J);
    for (Eigen::Index j = 0; j < J; ++j)
      for (int k = 0; k < K; ++k) th(k, j) = dist::sample_gamma(1.0, 1.0, rng);
  }
  st.phi.resize(V, K);
  const std::vector<double> conc(static_cast<std::size_t>(V), 1.0);
  for (int k = 0; k < K; ++k)
    dist::sample_dirichlet_into(conc, {st.phi.col(k).data(), static_cast<std::size_t>(V)}, rng);
  apply_pins(st, variant);
  return st;
}

LatentState initialize(const CountTensor& tensor, const Hyperparameters& hp, ModelVariant variant,
                       InitStrategy strategy, RandomStream& rng) {
  return strategy == InitStrategy::Prior ? init_state(tensor, hp, variant, rng)
                                         : init_dispersed(tensor, hp, variant, rng);
}

}  // namespace bmdl
