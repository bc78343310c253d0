#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace claa {

using Rng = std::mt19937_64;

// Counter-based sub-seed derivation: independent streams for (seed, counter)
// so parallel workers reproduce the serial stream assignment exactly.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) ^ (counter * 0xD1B54A32D192ED03ULL));
}

// Uniform integer in [0, n). Implemented here rather than through
// std::uniform_int_distribution so sequences are identical across standard
// libraries.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return static_cast<std::size_t>(r % n);
}

// Uniform real in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller; deterministic for a given engine state.
double standard_normal(Rng& rng);

template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint32_t fnv1a32(std::string_view data, std::uint32_t basis = 0x811c9dc5U);

// 16 hex digits.
std::string hex64(std::uint64_t value);

// Content fingerprint of a file ("fnv1a64:<hex>").
std::string file_fingerprint(const std::filesystem::path& path);
std::string text_fingerprint(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);

}  // namespace claa
