#pragma once

#include "carl/model.hpp"
#include "carl/search.hpp"

#include <cstdint>
#include <string>

namespace carl {

enum class DomainKind { GettingToWork, CoordInteresting, CoordPathological, StrongEpsExample, Tireworld, Random };

std::string to_string(DomainKind kind);
DomainKind parse_domain_kind(const std::string& name);

struct GeneratorSpec {
  DomainKind kind = DomainKind::GettingToWork;
  // Tireworld
  int size = 3;
  int distance = 2;
  int currencies = 1;
  // Random
  int states = 20;
  int actions_per_state = 3;
  int n = 2;
  std::uint64_t seed = 0;
};

/**
 * Builds a benchmark instance.
 *
 * Fixed instances: the getting-to-work problem (run, taxi, or walk to a
 * train that is cancelled half the time), a two-constraint problem whose
 * coordinate search climbs a staircase, a pathological problem on which
 * coordinate search stalls at the origin, and a five-state unconstrained SSP
 * with two optimal policies.
 *
 * Tireworld(size, distance, currencies): cities (r, k) with 0 <= k <= r <=
 * size form a triangle whose apex (0, 0) is the goal. From (r, k) the short
 * road leads to (r-1, k-1) and the safe roads to (r, k-1) and (r-1, k). Every
 * move ends with a flat tyre with probability 0.5; a loaded spare can then be
 * fitted, otherwise the car is stuck. The car holds one spare. Spares are sold
 * in cities on the left edge (k = 0) and on the bottom row (r = size), the
 * j-th such city charging one unit of currency j mod `currencies`. Every
 * action has primary cost 1 and each currency is bounded by 1. The trip
 * starts at (distance, distance) with a spare loaded.
 *
 * Random(states, actions_per_state, n, seed): states s0 .. s{states-2} plus
 * goal g. Action 0 of s_i only leads to higher-numbered states or g, so the
 * policy taking it everywhere is proper; other actions have one to three
 * outcomes anywhere. Primary costs are uniform integers in 1..10, secondary
 * in 0..10, and the bounds are 1.2 times the secondary costs of that proper
 * policy.
 *
 * Throws BadSpec on invalid parameters.
 */
CsspModel generate(const GeneratorSpec& spec);

/// The value function printed alongside the five-state SSP with two optimal
/// policies: s0 = 4, s1 = 3, s2 = 1, s3 = 2, goal = 0.
VectorValueFunction strong_eps_printed_values(const CsspModel& model);

}  // namespace carl
