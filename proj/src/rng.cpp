#include "foveate/rng.hpp"

#include <numeric>

namespace foveate {

std::string to_hex(std::uint64_t value, int digits) {
  static const char* kDigits = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(digits), '0');
  for (int i = digits - 1; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::vector<std::size_t> RngStream::sample_without_replacement(std::size_t n,
                                                               std::size_t k) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + next_index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view doc_id,
                          std::string_view stage) {
  char global_bytes[8];
  for (int i = 0; i < 8; ++i) {
    global_bytes[i] = static_cast<char>((global_seed >> (8 * i)) & 0xff);
  }
  std::uint64_t h = fnv1a(std::string_view(global_bytes, 8));
  h = fnv1a("\x1f", h);
  h = fnv1a(doc_id, h);
  h = fnv1a("\x1f", h);
  h = fnv1a(stage, h);
  // One splitmix finalization so nearby inputs diverge.
  RngStream mix(h);
  return mix.next_u64();
}

}  // namespace foveate
