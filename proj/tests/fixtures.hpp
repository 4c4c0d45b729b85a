#pragma once
// Models on the reference geometry: PT at the origin, SUs in a 0.1 square
// centred one unit away.
#include <cstdint>

#include "coopsense/rng.hpp"
#include "coopsense/scenario.hpp"

namespace fixture {

inline coopsense::Placement placement(std::uint64_t seed, int n = 10) {
  coopsense::Rng rng = coopsense::make_stream(seed, {0xf1u});
  return coopsense::sample_placement(rng, n, 0.1, 1.0);
}

inline coopsense::HypothesisModel model(std::uint64_t seed, double alpha, int n = 10,
                                        int m = 10) {
  return coopsense::build_hypothesis_model(placement(seed, n), coopsense::PropagationParams{},
                                           {1.0, alpha, 0.14}, m);
}

}  // namespace fixture
