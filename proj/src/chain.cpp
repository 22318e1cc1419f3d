#include "bmdl/chain.hpp"

#include <cmath>

#include "bmdl/atomic_file.hpp"
#include "bmdl/error.hpp"
#include "bmdl/serialize.hpp"

namespace bmdl {

using json_codec::json;

namespace {
constexpr const char* kCheckpointFormat = "bmdl-checkpoint";

// JSON has no infinities; the log joint can legitimately be -inf.
json encode_trace(const std::vector<double>& trace) {
  json out = json::array();
  for (double x : trace) {
    if (std::isfinite(x)) out.push_back(x);
    else out.push_back(x > 0 ? "inf" : "-inf");
  }
  return out;
}

std::vector<double> decode_trace(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) {
    if (x.is_string()) out.push_back(x.get<std::string>() == "inf" ? HUGE_VAL : -HUGE_VAL);
    else out.push_back(x.get<double>());
  }
  return out;
}
}  // namespace

void ChainConfig::validate() const {
  if (iterations <= 0) throw ParameterError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations)
    throw ParameterError("burn_in must satisfy 0 <= burn_in < iterations");
  if (thin <= 0) throw ParameterError("thin must be positive");
}

int active_factor_count(const Eigen::VectorXd& weights, double relative) {
  if (weights.size() == 0) return 0;
  const double cut = relative * weights.maxCoeff();
  int n = 0;
  for (Eigen::Index k = 0; k < weights.size(); ++k)
    if (weights(k) > cut) ++n;
  return n;
}

Chain::Chain(const CountTensor& tensor, Hyperparameters hp, ModelVariant variant,
             ChainConfig config, RandomStream rng)
    : tensor_(&tensor), hp_(hp), variant_(variant), config_(config), rng_(std::move(rng)) {
  config_.validate();
  state_ = initialize(tensor, hp_, variant_, config_.init, rng_);
  reset_accumulators();
}

Chain::Chain(const CountTensor& tensor, Hyperparameters hp, ModelVariant variant,
             ChainConfig config, RandomStream rng, LatentState state)
    : tensor_(&tensor),
      hp_(hp),
      variant_(variant),
      config_(config),
      rng_(std::move(rng)),
      state_(std::move(state)) {
  reset_accumulators();
}

void Chain::reset_accumulators() {
  const auto V = state_.phi.rows();
  const auto K = state_.phi.cols();
  const auto D = state_.r.cols();
  collected_ = 0;
  phi_sum_.setZero(V, K);
  r_sum_.setZero(K, D);
  z_sum_.setZero(K, D);
  s_sum_.setZero(K);
  log_joint_trace_.clear();
  degenerate_entries_ = 0;
}

void Chain::set_iterations(int iterations) {
  ChainConfig next = config_;
  next.iterations = iterations;
  next.validate();
  config_ = next;
}

void Chain::step() {
  if (done()) return;
  SweepOptions opts;
  opts.resample_pi = config_.resample_pi;
  opts.resample_scales = config_.resample_scales;
  const auto stats = sweep(*tensor_, state_, hp_, variant_, rng_, aug_, opts);
  degenerate_entries_ += stats.degenerate_entries;
  ++iteration_;

  if (config_.collect_log_joint) {
    const double lj = log_joint(*tensor_, state_, hp_);
    if (std::isnan(lj)) throw NumericError("log joint is NaN at iteration " + std::to_string(iteration_));
    log_joint_trace_.push_back(lj);
  }
  if (iteration_ > config_.burn_in && (iteration_ - config_.burn_in) % config_.thin == 0) {
    ++collected_;
    if (config_.collect_phi) phi_sum_ += state_.phi;
    if (config_.collect_r) r_sum_ += state_.r;
    if (config_.collect_s) s_sum_ += state_.s;
    if (config_.collect_z) z_sum_ += state_.z.cast<double>();
  }
}

void Chain::run_until(int iteration) {
  while (iteration_ < iteration && !done()) step();
}

PosteriorSummary Chain::summary() const {
  PosteriorSummary out;
  const double n = static_cast<double>(collected_);
  const bool any = collected_ > 0;
  out.phi_mean = any && config_.collect_phi ? Eigen::MatrixXd(phi_sum_ / n) : state_.phi;
  out.r_mean = any && config_.collect_r ? Eigen::MatrixXd(r_sum_ / n) : state_.r;
  out.s_mean = any && config_.collect_s ? Eigen::VectorXd(s_sum_ / n) : state_.s;
  out.z_activation =
      any && config_.collect_z ? Eigen::MatrixXd(z_sum_ / n) : Eigen::MatrixXd(state_.z.cast<double>());
  out.r_last = state_.r;
  out.z_last = state_.z;
  out.log_joint_trace = log_joint_trace_;
  for (Eigen::Index d = 0; d < state_.r.cols(); ++d)
    out.active_factor_count.push_back(active_factor_count(state_.r.col(d)));
  out.samples_collected = collected_;
  out.iterations = iteration_;
  out.degenerate_entries = degenerate_entries_;
  out.final_state = state_;
  return out;
}

std::string Chain::checkpoint_text() const {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["tensor_fingerprint"] = tensor_->fingerprint();
  j["variant"] = std::string(to_string(variant_));
  j["hyperparameters"] = json_codec::encode(hp_);
  j["config"] = json_codec::encode(config_);
  j["iteration"] = iteration_;
  j["stream"] = rng_.serialize();
  j["state"] = json_codec::encode(state_);
  j["accumulators"] = json{{"collected", collected_},
                           {"phi_sum", json_codec::encode_matrix(phi_sum_)},
                           {"r_sum", json_codec::encode_matrix(r_sum_)},
                           {"s_sum", json_codec::encode_matrix(s_sum_)},
                           {"z_sum", json_codec::encode_matrix(z_sum_)},
                           {"log_joint_trace", encode_trace(log_joint_trace_)},
                           {"degenerate_entries", degenerate_entries_}};
  j["metadata"] = json::parse(metadata_);
  return j.dump();
}

Chain Chain::from_checkpoint(const CountTensor& tensor, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat)
      throw CheckpointError("not a bmdl checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    if (j.at("tensor_fingerprint").get<std::uint64_t>() != tensor.fingerprint())
      throw CheckpointError("checkpoint was written for different count data");

    const auto hp = json_codec::decode_hyperparameters(j.at("hyperparameters"));
    const auto config = json_codec::decode_chain_config(j.at("config"));
    const auto variant = parse_variant(j.at("variant").get<std::string>());
    auto rng = RandomStream::restore(j.at("stream").get<std::string>());
    auto state = json_codec::decode_state(j.at("state"));
    check_state(tensor, state, hp);

    Chain chain(tensor, hp, variant, config, std::move(rng), std::move(state));
    chain.iteration_ = j.at("iteration").get<int>();
    const auto& acc = j.at("accumulators");
    chain.collected_ = acc.at("collected").get<int>();
    chain.phi_sum_ = json_codec::decode_matrix<Eigen::MatrixXd>(acc.at("phi_sum"));
    chain.r_sum_ = json_codec::decode_matrix<Eigen::MatrixXd>(acc.at("r_sum"));
    chain.s_sum_ = json_codec::decode_matrix<Eigen::VectorXd>(acc.at("s_sum"));
    chain.z_sum_ = json_codec::decode_matrix<Eigen::MatrixXd>(acc.at("z_sum"));
    chain.log_joint_trace_ = decode_trace(acc.at("log_joint_trace"));
    chain.degenerate_entries_ = acc.at("degenerate_entries").get<std::int64_t>();
    chain.metadata_ = j.at("metadata").dump();
    return chain;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

Chain Chain::load(const CountTensor& tensor, const std::filesystem::path& path) {
  return from_checkpoint(tensor, read_file(path));
}

void Chain::save(const std::filesystem::path& path) const { write_atomic(path, checkpoint_text()); }

PosteriorSummary run_chain(const CountTensor& tensor, const Hyperparameters& hp,
                           ModelVariant variant, const ChainConfig& config, RandomStream& rng) {
  Chain chain(tensor, hp, variant, config, rng);
  chain.run();
  rng = chain.stream();
  return chain.summary();
}

}  // namespace bmdl
