#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "smcrepair/csl.hpp"
#include "smcrepair/reduced.hpp"

namespace smcrepair {

struct BsmConfig {
    double epsilon = 1e-4;      // search-interval precision, must lie in (0, 0.5)
    int max_iters = 64;         // probe cap; ceil(log2(1/epsilon)) must fit
    double trunc_error = 1e-9;  // uniformisation budget for predicate evaluations
};

void require_valid(const BsmConfig& cfg);

struct BsmResult {
    double value = 0.0;   // final lower bound of the search interval
    bool success = false; // at least one probe satisfied the predicate
    int probes = 0;
};

/// Interval-halving search for the maximum satisfying factor value in
/// (lo, hi]: while the interval is wider than epsilon, probe its middle; a
/// satisfying probe raises the lower bound, a violating one lowers the upper
/// bound. Returns the final lower bound; a run in which no probe ever
/// satisfied leaves it at lo and reports failure. The predicate must be
/// deterministic (each probe typically costs one full model check).
BsmResult binary_search_factor(const std::function<bool(double)>& satisfies, double lo, double hi,
                               const BsmConfig& cfg);

enum class RepairStatus { NoReductionNeeded, Repaired, Failed, NothingToRepair };

const char* to_string(RepairStatus status);

struct PhaseIterations {
    int phase_i = 0;
    int phase_k = 0;
    int phase_j = 0;
};

struct RepairOutcome {
    RepairStatus status = RepairStatus::NothingToRepair;
    Factors factors;                  // untouched factors remain 1
    std::vector<EdgeId> t_i;          // empty when the factor is untouched
    std::vector<EdgeId> t_j;
    std::vector<EdgeId> t_k;
    std::vector<double> before;       // timed Until probabilities pre-repair
    std::vector<double> after;        // and at the returned factors
    PhaseIterations iterations;       // while-loop passes per phase
    Partition partition;

    // Failure diagnostics (repair_lower_bound only): the state no common j
    // could satisfy and the probabilities in the j -> 0 limit.
    std::optional<StateIndex> blocking_state;
    std::optional<std::vector<double>> limit_probs;
};

/// Internal numerical failure (pass-cap exceeded, or a search that should be
/// guaranteed to succeed found nothing even after tightening the truncation
/// error 100x).
struct RepairError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Repair for an upper probability bound P<=b(phi U<=t psi): first reduce i
/// until every gototarget state satisfies, then reduce k (i held fixed) until
/// every gobothways state satisfies. Because probability curves of different
/// states may intersect, each phase re-selects the state with the highest
/// current probability and rechecks the whole class after every search, in a
/// while-loop capped at one pass per model state. This case is always
/// solvable, so the status is never Failed.
RepairOutcome repair_upper_bound(const Smc& smc, const UntilRequirement& req,
                                 const BsmConfig& cfg = {});

/// Repair for a lower probability bound P>=b(phi U<=t psi): reduce j on the
/// gobothways -> gotoinvalid|invalid transitions, re-selecting the state with
/// the lowest current probability each pass. When even the j -> 0 limit
/// cannot lift the selected state over the bound the search fails; Failed
/// means no common factor j on those transitions suffices (a more general
/// per-transition reduction might still exist, which this routine does not
/// attempt).
RepairOutcome repair_lower_bound(const Smc& smc, const UntilRequirement& req,
                                 const BsmConfig& cfg = {});

}  // namespace smcrepair
