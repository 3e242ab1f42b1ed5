#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evote/errors.hpp"

namespace evote {

// All sampling goes through an explicit engine handle. mt19937_64's output
// sequence is fixed by the standard, and uniform_below() below does its own
// rejection sampling, so results are identical across standard libraries.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

// Seeds an engine from arbitrary bytes (packed big-endian into 32-bit words).
inline Rng make_rng(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint32_t> words;
  words.reserve(bytes.size() / 4 + 2);
  words.push_back(static_cast<std::uint32_t>(bytes.size()));
  std::uint32_t acc = 0;
  std::size_t k = 0;
  for (auto b : bytes) {
    acc = (acc << 8) | b;
    if (++k == 4) {
      words.push_back(acc);
      acc = 0;
      k = 0;
    }
  }
  if (k != 0) words.push_back(acc << (8 * (4 - k)));
  std::seed_seq seq(words.begin(), words.end());
  return Rng{seq};
}

// Uniform integer in [0, bound). bound must be positive.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound == 0) throw UsageError("uniform_below: empty range");
  if (bound == 1) return 0;
  std::uint64_t mask = bound - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  for (;;) {
    std::uint64_t v = rng() & mask;
    if (v < bound) return v;
  }
}

// Uniform integer in [lo, hi].
inline std::int64_t uniform_in(Rng& rng, std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw UsageError("uniform_in: empty range");
  return lo + static_cast<std::int64_t>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo) + 1));
}

inline std::vector<std::uint8_t> random_bytes(Rng& rng, std::size_t n) {
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng() >> 56);
  return out;
}

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xf]);
  }
  return s;
}

// Lowercase hex only; anything else is a DecodeError.
inline std::vector<std::uint8_t> from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw DecodeError("hex string has odd length");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw DecodeError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

}  // namespace evote
