#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace foveate {

// FNV-1a over bytes. Used for record ids, config fingerprints and scripted
// backend keys; stable across platforms and runs.
constexpr std::uint64_t fnv1a(std::string_view bytes,
                              std::uint64_t seed = 0xcbf29ce484222325ULL) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value, int digits = 16);

// splitmix64 stream. std:: distributions are implementation-defined, so every
// random draw in the pipeline goes through this class instead.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). n must be > 0.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // First k positions of a Fisher-Yates shuffle of [0, n); k <= n.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::uint64_t state_;
};

// Seeds derived from (global_seed, doc_id, stage) so scheduling order and
// resume never change which random stream a stage sees.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view doc_id,
                          std::string_view stage);

}  // namespace foveate
