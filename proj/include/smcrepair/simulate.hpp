#pragma once

#include <cstdint>
#include <optional>

#include "smcrepair/smc.hpp"

namespace smcrepair {

struct SimConfig {
    std::size_t num_paths = 100'000;
    std::uint64_t seed = 1;
    std::size_t max_jumps = 1'000'000;  // per-path cap
};

struct SimResult {
    double estimate = 0.0;   // sample mean of the path indicator
    double std_error = 0.0;  // binomial standard error sqrt(p(1-p)/n)
    std::size_t flagged_paths = 0;  // hit the jump cap while still undecided
};

/// Statistical estimate of Pr(start, phi U<=t psi) by simulating embedded
/// jump trajectories with exponential sojourns. A path satisfies when it
/// enters a psi state at accumulated time <= t having visited only phi states
/// before. Without a time bound the untimed probability is estimated; paths
/// are then cut short as soon as they enter a state from which reaching psi
/// through phi states is either impossible or almost sure (decided by the
/// simulator's own graph search, so the estimate stays independent of the
/// numerical analysis it is used to cross-check).
///
/// Per-path randomness is derived from (seed, path index) with a splittable
/// counter-based generator, so results do not depend on evaluation order.
SimResult simulate_until(const Smc& smc, StateIndex start, const StateSet& phi_states,
                         const StateSet& psi_states, std::optional<double> time_bound,
                         const SimConfig& cfg = {});

}  // namespace smcrepair
