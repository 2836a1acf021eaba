#include "smcrepair/reduced.hpp"

#include <algorithm>
#include <cmath>

namespace smcrepair {

namespace {

void check_factor(double value, const char* name) {
    if (!(value > 0.0) || value > 1.0 || !std::isfinite(value))
        throw std::invalid_argument(std::string("reduction factor ") + name +
                                    " must lie in (0, 1]");
}

bool contains(const std::vector<EdgeId>& sorted, EdgeId id) {
    return std::binary_search(sorted.begin(), sorted.end(), id);
}

}  // namespace

void require_valid(const Factors& factors) {
    check_factor(factors.i, "i");
    check_factor(factors.j, "j");
    check_factor(factors.k, "k");
}

ReducedSmc build_reduced(const Smc& smc, const Partition& partition) {
    if (partition.class_of.size() != smc.num_states)
        throw std::invalid_argument("partition does not match the model's state count");

    ReducedSmc reduced;
    reduced.base = smc;
    reduced.partition = partition;
    for (const Transition& tr : smc.transitions) {
        StateClass src = partition.class_of[tr.src];
        StateClass dst = partition.class_of[tr.dst];
        EdgeId id{tr.src, tr.dst};
        if (src == StateClass::Target || src == StateClass::Invalid)
            reduced.zeroed.push_back(id);
        else if (src == StateClass::GoToTarget && dst == StateClass::Target)
            reduced.t_i.push_back(id);
        else if (src == StateClass::GoBothWays &&
                 (dst == StateClass::GoToInvalid || dst == StateClass::Invalid))
            reduced.t_j.push_back(id);
        else if (src == StateClass::GoBothWays &&
                 (dst == StateClass::GoToTarget || dst == StateClass::Target))
            reduced.t_k.push_back(id);
    }
    std::sort(reduced.t_i.begin(), reduced.t_i.end());
    std::sort(reduced.t_j.begin(), reduced.t_j.end());
    std::sort(reduced.t_k.begin(), reduced.t_k.end());
    std::sort(reduced.zeroed.begin(), reduced.zeroed.end());
    return reduced;
}

Smc instantiate(const ReducedSmc& reduced, const Factors& factors) {
    require_valid(factors);
    Smc out;
    out.num_states = reduced.base.num_states;
    out.labels = reduced.base.labels;
    out.transitions.reserve(reduced.base.transitions.size());
    for (const Transition& tr : reduced.base.transitions) {
        EdgeId id{tr.src, tr.dst};
        if (contains(reduced.zeroed, id)) continue;
        double rate = tr.rate;
        if (contains(reduced.t_i, id))
            rate *= factors.i;
        else if (contains(reduced.t_j, id))
            rate *= factors.j;
        else if (contains(reduced.t_k, id))
            rate *= factors.k;
        out.transitions.push_back({tr.src, tr.dst, rate});
    }
    return out;
}

}  // namespace smcrepair
