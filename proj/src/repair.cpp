#include "smcrepair/repair.hpp"

#include <algorithm>
#include <cmath>

namespace smcrepair {

namespace {

struct Workspace {
    const Smc* smc = nullptr;
    const UntilRequirement* req = nullptr;
    StateSet phi;
    StateSet psi;
    ReducedSmc reduced;
    double delta = kDefaultTruncError;
};

bool meets_bound(const UntilRequirement& req, double p) {
    return (req.comparison == Comparison::Leq) ? p <= req.bound_b : p >= req.bound_b;
}

std::vector<double> probs_at(const Workspace& ws, const Factors& factors, double delta) {
    Smc instance = instantiate(ws.reduced, factors);
    return timed_until_prob(instance, ws.phi, ws.psi, ws.req->time_bound_t, delta);
}

struct PhaseOutcome {
    enum class Result { Satisfied, BsmFailed, PassCapExceeded };
    Result result = Result::Satisfied;
    int passes = 0;
    double factor = 1.0;
    StateIndex last_selected = 0;
};

// One repair phase: while any state of the class violates the requirement,
// select the extreme state (highest probability for Leq, lowest for Geq, ties
// to the lowest index), binary-search its factor over (0, current], and
// recheck the class. Curves of different states may intersect, which is why
// the selection is repeated each pass. Capped at one pass per model state.
template <typename WithFactor>
PhaseOutcome run_phase(const Workspace& ws, const std::vector<StateIndex>& class_states,
                       bool pick_max, double initial_factor, WithFactor with_factor,
                       const BsmConfig& cfg, bool retry_with_tight_delta) {
    PhaseOutcome out;
    out.factor = initial_factor;
    if (class_states.empty()) return out;
    const int pass_cap = static_cast<int>(ws.smc->num_states);

    while (true) {
        std::vector<double> cur = probs_at(ws, with_factor(out.factor), ws.delta);
        bool any_violation = false;
        StateIndex selected = class_states.front();
        double extreme = cur[selected];
        for (StateIndex s : class_states) {
            if (!meets_bound(*ws.req, cur[s])) any_violation = true;
            if (pick_max ? cur[s] > extreme : cur[s] < extreme) {
                extreme = cur[s];
                selected = s;
            }
        }
        if (!any_violation) {
            out.result = PhaseOutcome::Result::Satisfied;
            return out;
        }
        if (++out.passes > pass_cap) {
            out.result = PhaseOutcome::Result::PassCapExceeded;
            return out;
        }
        out.last_selected = selected;

        auto predicate = [&](double candidate) {
            return meets_bound(*ws.req, probs_at(ws, with_factor(candidate), ws.delta)[selected]);
        };
        BsmResult res = binary_search_factor(predicate, 0.0, out.factor, cfg);
        if (!res.success && retry_with_tight_delta) {
            auto tight = [&](double candidate) {
                return meets_bound(*ws.req,
                                   probs_at(ws, with_factor(candidate), ws.delta / 100.0)[selected]);
            };
            res = binary_search_factor(tight, 0.0, out.factor, cfg);
        }
        if (!res.success) {
            out.result = PhaseOutcome::Result::BsmFailed;
            return out;
        }
        out.factor = res.value;
    }
}

Workspace make_workspace(const Smc& smc, const UntilRequirement& req, const BsmConfig& cfg) {
    Workspace ws;
    ws.smc = &smc;
    ws.req = &req;
    ws.phi = eval_prop(smc, req.phi);
    ws.psi = eval_prop(smc, req.psi);
    ws.delta = cfg.trunc_error;
    return ws;
}

bool all_satisfy(const UntilRequirement& req, const std::vector<double>& probs,
                 const std::vector<StateIndex>& states) {
    for (StateIndex s : states)
        if (!meets_bound(req, probs[s])) return false;
    return true;
}

// Probabilities in the j -> 0 limit: the t_j transitions vanish entirely.
// instantiate() rightly refuses factor 0, so the limit chain is built here.
std::vector<double> zero_j_limit_probs(const Workspace& ws) {
    const ReducedSmc& reduced = ws.reduced;
    Smc limit;
    limit.num_states = reduced.base.num_states;
    limit.labels = reduced.base.labels;
    for (const Transition& tr : reduced.base.transitions) {
        EdgeId id{tr.src, tr.dst};
        if (std::binary_search(reduced.zeroed.begin(), reduced.zeroed.end(), id)) continue;
        if (std::binary_search(reduced.t_j.begin(), reduced.t_j.end(), id)) continue;
        limit.transitions.push_back(tr);
    }
    return timed_until_prob(limit, ws.phi, ws.psi, ws.req->time_bound_t, ws.delta);
}

}  // namespace

void require_valid(const BsmConfig& cfg) {
    if (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 0.5))
        throw std::invalid_argument("epsilon must lie in (0, 0.5)");
    if (std::ceil(std::log2(1.0 / cfg.epsilon)) > cfg.max_iters)
        throw std::invalid_argument("max_iters too small for the requested epsilon");
    if (!(cfg.trunc_error > 0.0) || cfg.trunc_error > 1e-3)
        throw std::invalid_argument("trunc_error must lie in (0, 1e-3]");
}

BsmResult binary_search_factor(const std::function<bool(double)>& satisfies, double lo, double hi,
                               const BsmConfig& cfg) {
    require_valid(cfg);
    if (!(lo >= 0.0) || !(lo < hi) || !(hi <= 1.0))
        throw std::invalid_argument("search interval must satisfy 0 <= lo < hi <= 1");
    BsmResult res;
    double lower = lo, upper = hi;
    while (upper - lower > cfg.epsilon) {
        if (res.probes >= cfg.max_iters) break;
        ++res.probes;
        double middle = 0.5 * (lower + upper);
        if (satisfies(middle)) {
            lower = middle;
            res.success = true;
        } else {
            upper = middle;
        }
    }
    res.value = lower;
    return res;
}

const char* to_string(RepairStatus status) {
    switch (status) {
        case RepairStatus::NoReductionNeeded: return "NoReductionNeeded";
        case RepairStatus::Repaired: return "Repaired";
        case RepairStatus::Failed: return "Failed";
        case RepairStatus::NothingToRepair: return "NothingToRepair";
    }
    return "?";
}

RepairOutcome repair_upper_bound(const Smc& smc, const UntilRequirement& req,
                                 const BsmConfig& cfg) {
    if (req.comparison != Comparison::Leq)
        throw std::invalid_argument("repair_upper_bound expects a P<=b requirement");
    require_valid(cfg);

    Workspace ws = make_workspace(smc, req, cfg);
    UntimedResult untimed = untimed_until_prob(smc, ws.phi, ws.psi);

    RepairOutcome out;
    out.partition = make_partition(smc, ws.phi, ws.psi, untimed);
    out.before = timed_until_prob(smc, ws.phi, ws.psi, req.time_bound_t, cfg.trunc_error);
    out.after = out.before;

    std::vector<StateIndex> gototarget = states_in(out.partition, StateClass::GoToTarget);
    std::vector<StateIndex> gobothways = states_in(out.partition, StateClass::GoBothWays);
    if (gototarget.empty() && gobothways.empty()) {
        out.status = RepairStatus::NothingToRepair;
        return out;
    }
    if (all_satisfy(req, out.before, gototarget) && all_satisfy(req, out.before, gobothways)) {
        out.status = RepairStatus::NoReductionNeeded;
        return out;
    }

    ws.reduced = build_reduced(smc, out.partition);
    Factors factors;

    auto with_i = [&factors](double x) {
        Factors f = factors;
        f.i = x;
        return f;
    };
    PhaseOutcome phase_i =
        run_phase(ws, gototarget, /*pick_max=*/true, factors.i, with_i, cfg, /*retry=*/true);
    out.iterations.phase_i = phase_i.passes;
    if (phase_i.result == PhaseOutcome::Result::PassCapExceeded)
        throw RepairError("phase i exceeded the while-loop pass cap");
    if (phase_i.result == PhaseOutcome::Result::BsmFailed)
        throw RepairError("phase i found no satisfying factor for state " +
                          std::to_string(phase_i.last_selected) +
                          " even after tightening the truncation error");
    factors.i = phase_i.factor;

    auto with_k = [&factors](double x) {
        Factors f = factors;
        f.k = x;
        return f;
    };
    PhaseOutcome phase_k =
        run_phase(ws, gobothways, /*pick_max=*/true, factors.k, with_k, cfg, /*retry=*/true);
    out.iterations.phase_k = phase_k.passes;
    if (phase_k.result == PhaseOutcome::Result::PassCapExceeded)
        throw RepairError("phase k exceeded the while-loop pass cap");
    if (phase_k.result == PhaseOutcome::Result::BsmFailed)
        throw RepairError("phase k found no satisfying factor for state " +
                          std::to_string(phase_k.last_selected) +
                          " even after tightening the truncation error");
    factors.k = phase_k.factor;

    out.factors = factors;
    if (factors.i < 1.0) out.t_i = ws.reduced.t_i;
    if (factors.k < 1.0) out.t_k = ws.reduced.t_k;
    out.after = probs_at(ws, factors, cfg.trunc_error);
    out.status = RepairStatus::Repaired;
    return out;
}

RepairOutcome repair_lower_bound(const Smc& smc, const UntilRequirement& req,
                                 const BsmConfig& cfg) {
    if (req.comparison != Comparison::Geq)
        throw std::invalid_argument("repair_lower_bound expects a P>=b requirement");
    require_valid(cfg);

    Workspace ws = make_workspace(smc, req, cfg);
    UntimedResult untimed = untimed_until_prob(smc, ws.phi, ws.psi);

    RepairOutcome out;
    out.partition = make_partition(smc, ws.phi, ws.psi, untimed);
    out.before = timed_until_prob(smc, ws.phi, ws.psi, req.time_bound_t, cfg.trunc_error);
    out.after = out.before;

    std::vector<StateIndex> gobothways = states_in(out.partition, StateClass::GoBothWays);
    if (gobothways.empty()) {
        out.status = RepairStatus::NothingToRepair;
        return out;
    }
    if (all_satisfy(req, out.before, gobothways)) {
        out.status = RepairStatus::NoReductionNeeded;
        return out;
    }

    ws.reduced = build_reduced(smc, out.partition);
    Factors factors;

    auto with_j = [&factors](double x) {
        Factors f = factors;
        f.j = x;
        return f;
    };
    PhaseOutcome phase_j =
        run_phase(ws, gobothways, /*pick_max=*/false, factors.j, with_j, cfg, /*retry=*/false);
    out.iterations.phase_j = phase_j.passes;
    if (phase_j.result == PhaseOutcome::Result::PassCapExceeded)
        throw RepairError("phase j exceeded the while-loop pass cap");
    if (phase_j.result == PhaseOutcome::Result::BsmFailed) {
        out.status = RepairStatus::Failed;
        out.blocking_state = phase_j.last_selected;
        out.limit_probs = zero_j_limit_probs(ws);
        return out;
    }
    factors.j = phase_j.factor;

    out.factors = factors;
    if (factors.j < 1.0) out.t_j = ws.reduced.t_j;
    out.after = probs_at(ws, factors, cfg.trunc_error);
    out.status = RepairStatus::Repaired;
    return out;
}

}  // namespace smcrepair
