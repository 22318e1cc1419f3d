#pragma once

// JSON encodings shared by checkpoints, provenance records and the CLI.
// Doubles go through nlohmann's shortest round-trip formatting, so every
// encode/decode pair here is lossless for finite values.

#include <Eigen/Dense>
#include <json.hpp>

#include "bmdl/chain.hpp"
#include "bmdl/model.hpp"

namespace bmdl::json_codec {

using nlohmann::json;

template <typename Derived>
json encode_matrix(const Eigen::MatrixBase<Derived>& m) {
  json data = json::array();
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

template <typename Matrix>
Matrix decode_matrix(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (data.size() != static_cast<std::size_t>(rows * cols))
    throw std::out_of_range("matrix payload has wrong length");
  Matrix m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = data[i++].get<typename Matrix::Scalar>();
  return m;
}

json encode(const Hyperparameters& hp);
Hyperparameters decode_hyperparameters(const json& j);

json encode(const ChainConfig& c);
ChainConfig decode_chain_config(const json& j);

json encode(const LatentState& s);
LatentState decode_state(const json& j);

}  // namespace bmdl::json_codec
