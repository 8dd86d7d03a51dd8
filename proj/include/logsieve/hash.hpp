#pragma once

#include <cstdint>
#include <string_view>

namespace logsieve {

// 64-bit finalizer from MurmurHash3.
constexpr std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

// FNV-1a over bytes followed by fmix64 for avalanche. Stable across
// platforms and runs, unlike std::hash.
constexpr std::uint64_t hash_bytes(std::string_view bytes,
                                   std::uint64_t seed = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ fmix64(seed);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmix64(h ^ bytes.size());
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return fmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// splitmix64 step; used to derive per-permutation and per-file seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t state = seed ^ fmix64(salt + 0x632be59bd9b4e019ULL);
  return splitmix64(state);
}

}  // namespace logsieve
