#pragma once

// Shared helpers for the test suites: random model/formula generators, an
// independent state-classification oracle built from per-state forward
// closures (the production code uses backward fixpoints), closed-form
// probabilities for small chains, a bisection root finder, and a subprocess
// runner for the command-line tool.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "smcrepair/csl.hpp"
#include "smcrepair/partition.hpp"
#include "smcrepair/smc.hpp"

namespace testsupport {

using namespace smcrepair;

inline Smc random_smc(std::mt19937_64& rng, std::size_t max_states = 30, double min_exit = 0.1,
                      double max_exit = 10.0) {
    std::uniform_int_distribution<std::size_t> nstates(2, max_states);
    const std::size_t n = nstates(rng);
    Smc smc;
    smc.num_states = n;
    smc.labels.assign(n, {});

    std::uniform_int_distribution<int> degree(0, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> exit_dist(min_exit, max_exit);
    std::uniform_int_distribution<StateIndex> dest(0, static_cast<StateIndex>(n) - 1);

    for (StateIndex s = 0; s < n; ++s) {
        int d = degree(rng);
        if (d == 0 && unit(rng) < 0.7) d = 1;  // keep absorbing states a minority
        std::set<StateIndex> dests;
        for (int e = 0; e < d; ++e) dests.insert(dest(rng));
        if (dests.empty()) continue;
        double exit = exit_dist(rng);
        std::vector<double> parts;
        double total = 0.0;
        for (std::size_t e = 0; e < dests.size(); ++e) {
            double u = unit(rng) + 0.05;
            parts.push_back(u);
            total += u;
        }
        std::size_t idx = 0;
        for (StateIndex dst : dests) smc.transitions.push_back({s, dst, exit * parts[idx++] / total});
    }
    for (StateIndex s = 0; s < n; ++s) {
        double u = unit(rng);
        if (u < 0.20)
            smc.labels[s].insert("b");
        else if (u < 0.80)
            smc.labels[s].insert("a");
    }
    return smc;
}

inline PropFormula random_prop(std::mt19937_64& rng, int depth) {
    static const char* kNames[] = {"a", "b", "up", "err"};
    std::uniform_int_distribution<int> pick(0, 3);
    if (depth <= 0) return PropFormula::atom(kNames[pick(rng)]);
    switch (pick(rng)) {
        case 0: return PropFormula::atom(kNames[pick(rng)]);
        case 1: return PropFormula::negation(random_prop(rng, depth - 1));
        case 2:
            return PropFormula::conjunction(random_prop(rng, depth - 1),
                                            random_prop(rng, depth - 1));
        default:
            return PropFormula::disjunction(random_prop(rng, depth - 1),
                                            random_prop(rng, depth - 1));
    }
}

// Independent classification oracle. For each transit state, take the forward
// closure through transit states; the state
//   - cannot reach psi at all            -> gotoinvalid
//   - closure is free of invalid states, dead ends and psi-blind transit
//     states                             -> gototarget
//   - otherwise                          -> gobothways
inline std::vector<StateClass> oracle_partition(const Smc& smc, const StateSet& phi,
                                                const StateSet& psi) {
    const std::size_t n = smc.num_states;
    std::vector<std::vector<StateIndex>> adj(n);
    for (const Transition& tr : smc.transitions) adj[tr.src].push_back(tr.dst);
    auto transit = [&](StateIndex s) { return phi[s] && !psi[s]; };

    std::vector<std::set<StateIndex>> closure(n);
    std::vector<bool> can_reach(n, false);
    for (StateIndex s0 = 0; s0 < n; ++s0) {
        if (!transit(s0)) continue;
        std::vector<StateIndex> stack{s0};
        closure[s0].insert(s0);
        while (!stack.empty()) {
            StateIndex u = stack.back();
            stack.pop_back();
            if (psi[u]) {
                can_reach[s0] = true;
                continue;
            }
            if (!transit(u)) continue;
            for (StateIndex v : adj[u])
                if (closure[s0].insert(v).second) stack.push_back(v);
        }
    }

    std::vector<StateClass> classes(n, StateClass::Invalid);
    for (StateIndex s = 0; s < n; ++s) {
        if (psi[s]) {
            classes[s] = StateClass::Target;
        } else if (!phi[s]) {
            classes[s] = StateClass::Invalid;
        } else if (!can_reach[s]) {
            classes[s] = StateClass::GoToInvalid;
        } else {
            bool certain = true;
            for (StateIndex u : closure[s]) {
                if (psi[u]) continue;
                if (!transit(u) || !can_reach[u]) certain = false;
                bool has_exit = false;
                if (transit(u))
                    for (StateIndex v : adj[u])
                        if (v != u) has_exit = true;
                if (transit(u) && !has_exit) certain = false;
            }
            classes[s] = certain ? StateClass::GoToTarget : StateClass::GoBothWays;
        }
    }
    return classes;
}

// ---- closed forms for hand-built chains --------------------------------

inline double single_exp(double rate, double t) { return 1.0 - std::exp(-rate * t); }

// winner `a` of an exponential race against `b`, within time t
inline double competing(double a, double b, double t) {
    return a / (a + b) * (1.0 - std::exp(-(a + b) * t));
}

// P(Exp(a) + Exp(r) <= t)
inline double two_stage(double a, double r, double t) {
    if (a == r) return 1.0 - std::exp(-a * t) * (1.0 + a * t);
    return 1.0 - (r * std::exp(-a * t) - a * std::exp(-r * t)) / (r - a);
}

// root of a monotone sign-changing f on [lo, hi]
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-12) {
    double flo = f(lo);
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm <= 0.0) == (flo <= 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---- small chains used across suites -----------------------------------

inline Smc two_state_chain() {
    Smc smc;
    smc.num_states = 2;
    smc.transitions = {{0, 1, 1.0}};
    smc.labels = {{"up"}, {"repair"}};
    return smc;
}

inline Smc race_chain(double a = 1.0, double b = 1.0) {
    Smc smc;
    smc.num_states = 3;
    smc.transitions = {{0, 1, a}, {0, 2, b}};
    smc.labels = {{"up"}, {"repair"}, {}};
    return smc;
}

inline Smc machine_chain() {
    Smc smc;
    smc.num_states = 6;
    smc.transitions = {{0, 1, 0.5}, {1, 0, 0.3}, {2, 3, 2.0}, {2, 0, 0.7},
                       {3, 4, 1.5}, {3, 1, 0.4}, {4, 5, 2.5}, {5, 2, 1.0}};
    smc.labels = {{}, {}, {"up"}, {"up"}, {"up"}, {"repair"}};
    return smc;
}

// curves of states 0 and 1 intersect while reducing k under
// P<=0.5 [ "up" U<=1 "repair" ]
inline Smc intersect_chain() {
    Smc smc;
    smc.num_states = 4;
    smc.transitions = {{0, 2, 2.0}, {0, 3, 0.08}, {1, 2, 40.0}, {1, 3, 10.0}};
    smc.labels = {{"up"}, {"up"}, {"repair"}, {}};
    return smc;
}

inline UntilRequirement make_req(Comparison cmp, double b, const std::string& phi,
                                 const std::string& psi, double t) {
    return UntilRequirement{cmp, b, PropFormula::atom(phi), PropFormula::atom(psi), t};
}

// ---- filesystem / subprocess helpers ------------------------------------

inline std::filesystem::path make_temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("smcrepair_" + tag + "_" + std::to_string(static_cast<unsigned>(::getpid())));
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void spit(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

#ifdef SMCREPAIR_CLI_PATH
struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline RunResult run_cli(const std::string& args, const std::filesystem::path& dir) {
    const auto out_path = dir / "run_stdout.txt";
    const auto err_path = dir / "run_stderr.txt";
    std::string cmd = std::string(SMCREPAIR_CLI_PATH) + " " + args + " > " + out_path.string() +
                      " 2> " + err_path.string();
    int raw = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = (raw == -1) ? -1 : WEXITSTATUS(raw);
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}
#endif

}  // namespace testsupport
