#include "smcrepair/partition.hpp"

namespace smcrepair {

const char* to_string(StateClass cls) {
    switch (cls) {
        case StateClass::Invalid: return "invalid";
        case StateClass::Target: return "target";
        case StateClass::GoToTarget: return "gototarget";
        case StateClass::GoToInvalid: return "gotoinvalid";
        case StateClass::GoBothWays: return "gobothways";
    }
    return "?";
}

Partition make_partition(const Smc& smc, const StateSet& phi_states, const StateSet& psi_states,
                         const UntimedResult& untimed) {
    const std::size_t n = smc.num_states;
    if (phi_states.size() != n || psi_states.size() != n || untimed.prob.size() != n ||
        untimed.exactly_one.size() != n || untimed.exactly_zero.size() != n)
        throw std::invalid_argument("partition inputs do not match the model's state count");

    Partition partition;
    partition.class_of.assign(n, StateClass::Invalid);
    for (StateIndex s = 0; s < n; ++s) {
        if (psi_states[s])
            partition.class_of[s] = StateClass::Target;
        else if (!phi_states[s])
            partition.class_of[s] = StateClass::Invalid;
        else if (untimed.exactly_one[s])
            partition.class_of[s] = StateClass::GoToTarget;
        else if (untimed.exactly_zero[s])
            partition.class_of[s] = StateClass::GoToInvalid;
        else
            partition.class_of[s] = StateClass::GoBothWays;
    }
    return partition;
}

std::vector<StateIndex> states_in(const Partition& partition, StateClass cls) {
    std::vector<StateIndex> out;
    for (StateIndex s = 0; s < partition.class_of.size(); ++s)
        if (partition.class_of[s] == cls) out.push_back(s);
    return out;
}

}  // namespace smcrepair
