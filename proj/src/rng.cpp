#include "sgf/rng.hpp"

#include <sstream>
#include <stdexcept>

namespace sgf {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

double uniform01(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

bool bernoulli(Rng& rng, double p) {
  // One draw per call regardless of p keeps streams aligned across policies.
  const double u = uniform01(rng);
  return u < p;
}

std::string serialize_rng(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng deserialize_rng(const std::string& text) {
  std::istringstream is(text);
  Rng rng;
  is >> rng;
  if (is.fail()) throw std::runtime_error("malformed RNG state");
  return rng;
}

}  // namespace sgf
