#include "tadam/random.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace tadam {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Engine make_stream(std::uint64_t seed, Stream stream) {
  return Engine(mix64(mix64(seed) ^ mix64(static_cast<std::uint64_t>(stream) << 32)));
}

double uniform01(Engine& engine) {
  boost::random::uniform_01<double> dist;
  return dist(engine);
}

double standard_normal(Engine& engine) {
  boost::random::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine);
}

std::uint64_t uniform_index(Engine& engine, std::uint64_t bound) {
  boost::random::uniform_int_distribution<std::uint64_t> dist(0, bound - 1);
  return dist(engine);
}

}  // namespace tadam
