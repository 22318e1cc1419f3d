#include "bmdl/serialize.hpp"

namespace bmdl::json_codec {

json encode(const Hyperparameters& hp) {
  return json{{"K", hp.K},   {"a0", hp.a0}, {"b0", hp.b0}, {"e0", hp.e0},
              {"f0", hp.f0}, {"h0", hp.h0}, {"u0", hp.u0}, {"s0", hp.s0},
              {"w0", hp.w0}, {"t0", hp.t0}, {"c_ibp", hp.c_ibp}, {"crt_cutoff", hp.crt_cutoff}};
}

Hyperparameters decode_hyperparameters(const json& j) {
  Hyperparameters hp;
  hp.K = j.at("K").get<int>();
  hp.a0 = j.at("a0").get<double>();
  hp.b0 = j.at("b0").get<double>();
  hp.e0 = j.at("e0").get<double>();
  hp.f0 = j.at("f0").get<double>();
  hp.h0 = j.at("h0").get<double>();
  hp.u0 = j.at("u0").get<double>();
  hp.s0 = j.at("s0").get<double>();
  hp.w0 = j.at("w0").get<double>();
  hp.t0 = j.at("t0").get<double>();
  hp.c_ibp = j.at("c_ibp").get<double>();
  hp.crt_cutoff = j.at("crt_cutoff").get<std::int64_t>();
  return hp;
}

json encode(const ChainConfig& c) {
  return json{{"iterations", c.iterations},
              {"burn_in", c.burn_in},
              {"thin", c.thin},
              {"collect_phi", c.collect_phi},
              {"collect_r", c.collect_r},
              {"collect_s", c.collect_s},
              {"collect_z", c.collect_z},
              {"collect_log_joint", c.collect_log_joint},
              {"resample_pi", c.resample_pi},
              {"resample_scales", c.resample_scales},
              {"init", std::string(to_string(c.init))}};
}

ChainConfig decode_chain_config(const json& j) {
  ChainConfig c;
  c.iterations = j.at("iterations").get<int>();
  c.burn_in = j.at("burn_in").get<int>();
  c.thin = j.at("thin").get<int>();
  c.collect_phi = j.at("collect_phi").get<bool>();
  c.collect_r = j.at("collect_r").get<bool>();
  c.collect_s = j.at("collect_s").get<bool>();
  c.collect_z = j.at("collect_z").get<bool>();
  c.collect_log_joint = j.at("collect_log_joint").get<bool>();
  c.resample_pi = j.at("resample_pi").get<bool>();
  c.resample_scales = j.at("resample_scales").get<bool>();
  c.init = parse_init_strategy(j.at("init").get<std::string>());
  return c;
}

namespace {

template <typename Vec>
json encode_list(const std::vector<Vec>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(encode_matrix(x));
  return out;
}

template <typename Vec>
std::vector<Vec> decode_list(const json& j) {
  std::vector<Vec> out;
  for (const auto& x : j) out.push_back(decode_matrix<Vec>(x));
  return out;
}

}  // namespace

json encode(const LatentState& s) {
  return json{{"phi", encode_matrix(s.phi)},
              {"theta", encode_list(s.theta)},
              {"r", encode_matrix(s.r)},
              {"s", encode_matrix(s.s)},
              {"z", encode_matrix(s.z)},
              {"pi", encode_matrix(s.pi)},
              {"p", encode_list(s.p)},
              {"c_j", encode_list(s.c_j)},
              {"c_d", encode_matrix(s.c_d)},
              {"c0", s.c0},
              {"gamma0", s.gamma0},
              {"eta", s.eta}};
}

LatentState decode_state(const json& j) {
  LatentState s;
  s.phi = decode_matrix<Eigen::MatrixXd>(j.at("phi"));
  s.theta = decode_list<Eigen::MatrixXd>(j.at("theta"));
  s.r = decode_matrix<Eigen::MatrixXd>(j.at("r"));
  s.s = decode_matrix<Eigen::VectorXd>(j.at("s"));
  s.z = decode_matrix<Eigen::MatrixXi>(j.at("z"));
  s.pi = decode_matrix<Eigen::VectorXd>(j.at("pi"));
  s.p = decode_list<Eigen::VectorXd>(j.at("p"));
  s.c_j = decode_list<Eigen::VectorXd>(j.at("c_j"));
  s.c_d = decode_matrix<Eigen::VectorXd>(j.at("c_d"));
  s.c0 = j.at("c0").get<double>();
  s.gamma0 = j.at("gamma0").get<double>();
  s.eta = j.at("eta").get<double>();
  return s;
}

}  // namespace bmdl::json_codec
