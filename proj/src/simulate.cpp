#include "smcrepair/simulate.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace smcrepair {

namespace {

// Splittable counter-based generator: one independent stream per path,
// derived from (seed, path index) alone.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in (0, 1], safe as the argument of log()
    double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }
};

SplitMix64 path_stream(std::uint64_t seed, std::uint64_t path_index) {
    SplitMix64 mixer{seed ^ (0x9E3779B97F4A7C15ull * (path_index + 1))};
    return SplitMix64{mixer.next()};
}

// Per-state forward search through phi states: which states can still reach
// psi, and from which states reaching psi is almost sure. Deliberately a
// plain DFS per state, independent of the analysis module's fixpoints.
struct ReachSets {
    StateSet cannot_reach;  // no path through phi states enters psi
    StateSet almost_sure;   // every trajectory through phi states ends in psi
};

ReachSets classify_reach(const Smc& smc, const SparseRows& rows, const StateSet& phi,
                         const StateSet& psi) {
    const std::size_t n = smc.num_states;
    auto transit = [&](StateIndex s) { return phi[s] && !psi[s]; };

    std::vector<char> can(n, 0), sure(n, 0);
    std::vector<StateIndex> closure;
    StateSet visited(n, false);
    for (StateIndex s0 = 0; s0 < n; ++s0) {
        if (psi[s0]) {
            can[s0] = 1;
            sure[s0] = 1;
            continue;
        }
        if (!transit(s0)) continue;

        closure.clear();
        std::fill(visited.begin(), visited.end(), false);
        std::vector<StateIndex> stack{s0};
        visited[s0] = true;
        bool found_psi = false;
        bool found_escape = false;  // invalid state or dead-end transit state
        while (!stack.empty()) {
            StateIndex u = stack.back();
            stack.pop_back();
            closure.push_back(u);
            if (psi[u]) {
                found_psi = true;
                continue;  // psi is absorbing for this purpose
            }
            if (!transit(u)) {
                found_escape = true;
                continue;
            }
            bool has_exit = false;
            for (const Transition* e = rows.row_begin(u); e != rows.row_end(u); ++e) {
                if (e->dst != u) has_exit = true;
                if (!visited[e->dst]) {
                    visited[e->dst] = true;
                    stack.push_back(e->dst);
                }
            }
            if (!has_exit) found_escape = true;  // absorbing (or self-loop-only) transit state
        }
        can[s0] = found_psi ? 1 : 0;
        sure[s0] = (found_psi && !found_escape) ? 1 : 0;
    }

    // A trajectory is almost surely absorbed in psi only if every transit
    // state it can touch also reaches psi; the escape flag above already saw
    // the whole closure, but a closure member might itself reach psi while a
    // deeper member cannot, so intersect with per-state reachability.
    ReachSets sets;
    sets.cannot_reach.assign(n, false);
    sets.almost_sure.assign(n, false);
    for (StateIndex s = 0; s < n; ++s) {
        if (psi[s]) {
            sets.almost_sure[s] = true;
        } else if (transit(s)) {
            sets.cannot_reach[s] = !can[s];
        } else {
            sets.cannot_reach[s] = true;  // invalid: violates phi and psi at once
        }
    }
    for (StateIndex s0 = 0; s0 < n; ++s0) {
        if (!transit(s0) || !can[s0] || !sure[s0]) continue;
        // sure[s0] checked structural escapes; also require every transit
        // state in the closure to reach psi.
        std::fill(visited.begin(), visited.end(), false);
        std::vector<StateIndex> stack{s0};
        visited[s0] = true;
        bool ok = true;
        while (!stack.empty() && ok) {
            StateIndex u = stack.back();
            stack.pop_back();
            if (psi[u] || !transit(u)) continue;
            if (!can[u]) ok = false;
            for (const Transition* e = rows.row_begin(u); e != rows.row_end(u); ++e)
                if (!visited[e->dst]) {
                    visited[e->dst] = true;
                    stack.push_back(e->dst);
                }
        }
        sets.almost_sure[s0] = ok;
    }
    return sets;
}

}  // namespace

SimResult simulate_until(const Smc& smc, StateIndex start, const StateSet& phi_states,
                         const StateSet& psi_states, std::optional<double> time_bound,
                         const SimConfig& cfg) {
    if (start >= smc.num_states) throw std::invalid_argument("start state out of range");
    if (phi_states.size() != smc.num_states || psi_states.size() != smc.num_states)
        throw std::invalid_argument("state set size does not match the model");
    if (cfg.num_paths == 0) throw std::invalid_argument("num_paths must be >= 1");
    if (time_bound && !(*time_bound > 0.0))
        throw std::invalid_argument("time bound must be > 0");

    SparseRows rows = compile_rows(smc);
    ReachSets reach = classify_reach(smc, rows, phi_states, psi_states);
    const bool untimed = !time_bound.has_value();
    const double t_limit = time_bound.value_or(0.0);

    std::size_t successes = 0;
    SimResult result;
    for (std::size_t p = 0; p < cfg.num_paths; ++p) {
        SplitMix64 rng = path_stream(cfg.seed, p);
        StateIndex s = start;
        double elapsed = 0.0;
        std::size_t jumps = 0;
        while (true) {
            if (psi_states[s]) {
                ++successes;
                break;
            }
            if (!phi_states[s]) break;                    // violates phi before reaching psi
            if (reach.cannot_reach[s]) break;             // psi unreachable from here
            if (untimed && reach.almost_sure[s]) {        // absorption into psi is certain
                ++successes;
                break;
            }
            double exit = rows.exit_rate[s];
            if (exit == 0.0) break;  // absorbing non-psi state
            double sojourn = -std::log(rng.uniform_pos()) / exit;
            elapsed += sojourn;
            if (!untimed && elapsed > t_limit) break;  // time ran out inside a phi state
            if (++jumps > cfg.max_jumps) {
                ++result.flagged_paths;  // undecided: scored non-satisfying
                break;
            }
            double pick = rng.uniform_pos() * exit;
            const Transition* e = rows.row_begin(s);
            for (; e + 1 != rows.row_end(s); ++e) {
                pick -= e->rate;
                if (pick <= 0.0) break;
            }
            s = e->dst;
        }
    }

    const double n = static_cast<double>(cfg.num_paths);
    result.estimate = static_cast<double>(successes) / n;
    result.std_error = std::sqrt(result.estimate * (1.0 - result.estimate) / n);
    return result;
}

}  // namespace smcrepair
