#include "bmdl/random.hpp"

#include <array>
#include <sstream>

#include "bmdl/error.hpp"

namespace bmdl {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed) {
  std::array<std::uint32_t, 8> words{};
  std::uint64_t state = seed;
  for (std::size_t i = 0; i < words.size(); i += 2) {
    state = mix64(state);
    words[i] = static_cast<std::uint32_t>(state);
    words[i + 1] = static_cast<std::uint32_t>(state >> 32);
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(seeded_engine(seed)) {}

std::string RandomStream::serialize() const {
  std::ostringstream out;
  out << seed_ << ' ' << draws_ << ' ' << engine_;
  return out.str();
}

RandomStream RandomStream::restore(const std::string& text) {
  std::istringstream in(text);
  std::uint64_t seed = 0;
  std::uint64_t draws = 0;
  in >> seed >> draws;
  RandomStream stream(seed);
  in >> stream.engine_;
  if (!in) throw CheckpointError("corrupt random stream state");
  stream.draws_ = draws;
  return stream;
}

}  // namespace bmdl
