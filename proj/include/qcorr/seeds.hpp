#pragma once

// Per-task environment seeds derived from a master seed.
//
//   seed(beta, r) = derive_key(derive_key(master, bits(|beta|)), r) with bit 63
//                   cleared, then set again when beta < 0.
//
// Labels (beta, r) and (-beta, r) therefore share their stream and differ only
// in the mirror flag, so their environments are exact path mirrors.

#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qcorr/env.hpp"
#include "qcorr/errors.hpp"
#include "qcorr/format.hpp"
#include "qcorr/random.hpp"

namespace qcorr {

struct SeedLabel {
  double beta = 0.0;
  std::uint64_t replica = 0;
};

inline std::uint64_t label_seed(std::uint64_t master, double beta, std::uint64_t replica) {
  require(std::isfinite(beta), "seed label beta must be finite");
  const double magnitude = std::abs(beta) + 0.0;  // folds -0.0 onto 0.0
  const std::uint64_t base =
      random::derive_key(random::derive_key(master, std::bit_cast<std::uint64_t>(magnitude)), replica) & ~kMirrorBit;
  return beta < 0.0 ? base | kMirrorBit : base;
}

inline std::vector<std::uint64_t> seed_schedule(std::uint64_t master, const std::vector<SeedLabel>& labels) {
  std::set<std::pair<double, std::uint64_t>> seen_labels;
  std::unordered_set<std::uint64_t> seen_seeds;
  seen_seeds.reserve(labels.size());
  std::vector<std::uint64_t> seeds;
  seeds.reserve(labels.size());
  for (const auto& l : labels) {
    const std::uint64_t s = label_seed(master, l.beta, l.replica);
    require(seen_labels.emplace(l.beta + 0.0, l.replica).second,
            "duplicate seed label (beta=" + exact(l.beta) + ", replica=" + std::to_string(l.replica) + ")");
    if (!seen_seeds.insert(s).second)
      throw NumericalError("seed schedule collision at beta=" + exact(l.beta), static_cast<double>(l.replica), 0.0);
    seeds.push_back(s);
  }
  return seeds;
}

}  // namespace qcorr
