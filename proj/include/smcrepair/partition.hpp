#pragma once

#include <string>
#include <vector>

#include "smcrepair/analysis.hpp"
#include "smcrepair/smc.hpp"

namespace smcrepair {

/// The five-way split of the state space induced by phi and psi. Transit
/// states (phi and not psi) are refined by their untimed Until probability:
/// exactly 1 -> GoToTarget, exactly 0 -> GoToInvalid, otherwise GoBothWays.
enum class StateClass { Invalid, Target, GoToTarget, GoToInvalid, GoBothWays };

const char* to_string(StateClass cls);

struct Partition {
    std::vector<StateClass> class_of;
};

/// Classifies every state. Transit refinement uses the exact qualitative sets
/// carried by `untimed`, never a floating-point comparison against 0 or 1.
/// Precondition: `untimed` was produced by untimed_until_prob on the same
/// (smc, phi_states, psi_states).
Partition make_partition(const Smc& smc, const StateSet& phi_states, const StateSet& psi_states,
                         const UntimedResult& untimed);

std::vector<StateIndex> states_in(const Partition& partition, StateClass cls);

}  // namespace smcrepair
