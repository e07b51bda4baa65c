#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ergograph {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent child seeds from a master
// seed plus a list of labels (size, graph index, stream tag, ...).  Child
// seeds depend only on the labels, never on draw order, so adding sizes or
// streams to a run does not perturb existing draws.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> labels) {
  std::uint64_t s = mix64(master);
  for (std::uint64_t v : labels) s = mix64(s ^ mix64(v));
  return s;
}

// Stream tags for the experiment harness.
enum class SeedStream : std::uint64_t {
  graph = 0x67726170,       // graph construction
  trials = 0x7472696c,      // Monte-Carlo signal draws
  training = 0x74726169,    // covariance training samples
};

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                 std::uint64_t size, std::uint64_t index,
                                 std::uint64_t attempt = 0) {
  return derive_seed(master,
                     {static_cast<std::uint64_t>(stream), size, index, attempt});
}

}  // namespace ergograph
