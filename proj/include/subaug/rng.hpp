#pragma once

#include <cstdint>
#include <utility>
#include <vector>

// Deterministic counter-based random streams.
//
// Every random decision in the toolkit is drawn from a Stream addressed by a
// 64-bit key. Keys are derived from a master seed by folding in integer words,
// so any sub-computation (one view's masks, one epoch's shuffle, ...) owns an
// independent stream that can be reconstructed from its coordinates alone.
//
// The exact mapping, normative for reproducing any file this toolkit writes:
//
//   GOLDEN  = 0x9e3779b97f4a7c15
//   mix64(z): z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//             z ^= z >> 27; z *= 0x94d049bb133111eb;
//             z ^= z >> 31; return z          (the splitmix64 finalizer)
//   fold(s, w)       = mix64(s + GOLDEN * (w + 1))
//   Stream(key), draw i (i = 0, 1, ...):
//     u64_i          = mix64(key + GOLDEN * (i + 1))
//     unit_i         = (u64_i >> 11) * 2^-53            in [0, 1)
//     bernoulli(p)_i = unit_i < p
//     below(n)_i     = u64_i mod n
//
// Stream keys, by consumer (fold applied left to right):
//   view masks       fold(master, MASK),    epoch, batch, subgraph, view
//                    (view 0 is the unperturbed original and never draws;
//                     multi-view clones use view = 1..k; in-place perturbation
//                     uses view = 0, with subgraph = 0 for whole-graph masks)
//   parameter init   fold(master, INIT)
//   epoch shuffle    fold(master, SHUFFLE), epoch
//   block-model edges  fold(seed, SBM)
//   subgraph sampling  fold(seed, SAMPLER)
//   synthetic features fold(seed, FEATURES)
//   dataset split      fold(seed, SPLIT)
//
// draw_view_masks consumes its stream as: one bernoulli per subgraph node in
// local index order, then one bernoulli per induced edge in canonical order
// (pairs (i, j) with i < j in subgraph-local indices, lexicographically).
// Shuffles are Fisher-Yates: for i = n-1 .. 1, j = below(i + 1), swap(i, j).

namespace subaug::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t fold(std::uint64_t seed, std::uint64_t word) {
  return mix64(seed + kGolden * (word + 1));
}

// Stream domain words, folded immediately after the master seed.
enum StreamDomain : std::uint64_t {
  kDomainMask = 1,
  kDomainInit = 2,
  kDomainShuffle = 3,
  kDomainSbm = 4,
  kDomainSampler = 5,
  kDomainFeatures = 6,
  kDomainSplit = 7,
};

/// Counter-based stream: stateless apart from the draw counter, so streams
/// with the same key always replay the same sequence.
class Stream {
public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix64(key_ + kGolden * (++counter_)); }

  /// Uniform double in [0, 1), 53 mantissa bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_unit() < p; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

  std::uint64_t key() const { return key_; }

private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

inline Stream mask_stream(std::uint64_t master_seed, std::uint64_t epoch, std::uint64_t batch,
                          std::uint64_t subgraph, std::uint64_t view) {
  std::uint64_t key = fold(master_seed, kDomainMask);
  key = fold(key, epoch);
  key = fold(key, batch);
  key = fold(key, subgraph);
  key = fold(key, view);
  return Stream(key);
}

template <typename T>
void shuffle(std::vector<T>& items, Stream& stream) {
  if (items.size() < 2) return;
  for (std::size_t i = items.size() - 1; i >= 1; --i) {
    std::size_t j = static_cast<std::size_t>(stream.next_below(i + 1));
    std::swap(items[i], items[j]);
  }
}

}  // namespace subaug::rng
