#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "smcrepair/smc.hpp"

namespace smcrepair {

/// Default truncation error budget for the uniformisation series.
inline constexpr double kDefaultTruncError = 1e-9;

/// Untimed Until probabilities plus the exact qualitative sets. Membership in
/// exactly_one / exactly_zero comes from graph fixpoints on the embedded jump
/// chain, never from comparing floating-point values against 0 or 1.
struct UntimedResult {
    std::vector<double> prob;  // Pr(s, phi U psi)
    StateSet exactly_one;      // Prob1 membership (includes all psi states)
    StateSet exactly_zero;     // Prob0 membership (includes all invalid states)
};

struct SolverError : std::runtime_error {
    SolverError(const std::string& message, double residual_)
        : std::runtime_error(message), residual(residual_) {}
    double residual;
};

struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Prob0 by backward reachability to psi through phi-states, Prob1 by the
/// standard two-pass fixpoint, remaining states by solving the embedded-chain
/// linear system (Gauss-Seidel to residual 1e-12, dense elimination fallback
/// for up to 500 states).
UntimedResult untimed_until_prob(const Smc& smc, const StateSet& phi_states,
                                 const StateSet& psi_states);

/// Truncated Poisson probability window: weights[i] approximates
/// poisson(left + i; lambda), retained mass >= 1 - delta.
struct PoissonWindow {
    std::size_t left = 0;
    std::size_t right = 0;
    std::vector<double> weights;
    double mass = 0.0;
};

/// Weights computed by a scaled recurrence outward from the mode (seeded in
/// log space), expanded greedily until the retained mass reaches 1 - delta.
/// Throws ResourceError when the window would exceed max_terms.
PoissonWindow poisson_weights(double lambda, double delta, std::size_t max_terms = 10'000'000);

struct TransientSetup {
    double q = 1.0;  // uniformisation rate, max exit rate of the transformed chain
    double t = 0.0;
    double delta = kDefaultTruncError;
    PoissonWindow window;
};

TransientSetup prepare_transient(const Smc& smc, const StateSet& phi_states,
                                 const StateSet& psi_states, double t, double delta);

/// Pr(s, phi U<=t psi) for every state, by uniformisation after making psi
/// and not-phi-not-psi states absorbing. Total truncation error <= delta per
/// component; psi states are exactly 1. delta must lie in (0, 1e-3].
std::vector<double> timed_until_prob(const Smc& smc, const StateSet& phi_states,
                                     const StateSet& psi_states, double t,
                                     double delta = kDefaultTruncError);

}  // namespace smcrepair
