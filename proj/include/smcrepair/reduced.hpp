#pragma once

#include <vector>

#include "smcrepair/partition.hpp"
#include "smcrepair/smc.hpp"

namespace smcrepair {

/// Rate reduction factors; each must lie in (0, 1] so that no transition is
/// ever completely disabled.
struct Factors {
    double i = 1.0;
    double j = 1.0;
    double k = 1.0;
};

/// Throws std::invalid_argument when a factor falls outside (0, 1].
void require_valid(const Factors& factors);

/// The reduced parametric chain: the base model plus the symbolic placement
/// of the three reduction factors.
///
///   t_i    = gototarget -> target transitions (scaled by i)
///   t_j    = gobothways -> gotoinvalid|invalid transitions (scaled by j)
///   t_k    = gobothways -> gototarget|target transitions (scaled by k)
///   zeroed = every transition leaving a target or invalid state (removed)
///
/// The four sets are pairwise disjoint; the base model is never mutated.
struct ReducedSmc {
    Smc base;
    Partition partition;
    std::vector<EdgeId> t_i;
    std::vector<EdgeId> t_j;
    std::vector<EdgeId> t_k;
    std::vector<EdgeId> zeroed;
};

ReducedSmc build_reduced(const Smc& smc, const Partition& partition);

/// Fixes the factors, yielding a concrete chain: rates on t_i/t_j/t_k are
/// multiplied by the corresponding factor, zeroed transitions are dropped,
/// everything else (including labels) is unchanged.
Smc instantiate(const ReducedSmc& reduced, const Factors& factors);

}  // namespace smcrepair
