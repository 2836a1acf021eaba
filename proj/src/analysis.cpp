#include "smcrepair/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace smcrepair {

namespace {

void require_sizes(const Smc& smc, const StateSet& phi, const StateSet& psi) {
    if (phi.size() != smc.num_states || psi.size() != smc.num_states)
        throw std::invalid_argument("state set size does not match the model");
}

bool is_transit(const StateSet& phi, const StateSet& psi, StateIndex s) {
    return phi[s] && !psi[s];
}

// Backward closure of `seed` through transit states: the least set containing
// seed and closed under "transit state with an edge into the set".
StateSet backward_closure(const Smc& smc, const SparseRows& rows, const StateSet& phi,
                          const StateSet& psi, const StateSet& seed) {
    const std::size_t n = smc.num_states;
    std::vector<std::vector<StateIndex>> pred(n);
    for (const Transition& tr : rows.edges) pred[tr.dst].push_back(tr.src);

    StateSet in(n, false);
    std::deque<StateIndex> queue;
    for (StateIndex s = 0; s < n; ++s) {
        if (seed[s]) {
            in[s] = true;
            queue.push_back(s);
        }
    }
    while (!queue.empty()) {
        StateIndex v = queue.front();
        queue.pop_front();
        for (StateIndex u : pred[v]) {
            if (!in[u] && is_transit(phi, psi, u)) {
                in[u] = true;
                queue.push_back(u);
            }
        }
    }
    return in;
}

struct EmbeddedRow {
    StateIndex state;
    double const_term;   // mass flowing directly into exactly_one states
    double self_mass;    // embedded self-loop probability
    std::vector<std::pair<StateIndex, double>> unknown_terms;
};

// Gauss-Seidel on p(s) = sum_s' P_emb(s,s') p(s') with boundary rows pinned.
// Returns the achieved infinity-norm residual.
double gauss_seidel(const std::vector<EmbeddedRow>& sys, std::vector<double>& p,
                    double tol, std::size_t max_sweeps) {
    double residual = std::numeric_limits<double>::infinity();
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        for (const EmbeddedRow& row : sys) {
            double rhs = row.const_term;
            for (const auto& [v, w] : row.unknown_terms) rhs += w * p[v];
            p[row.state] = rhs / (1.0 - row.self_mass);
        }
        residual = 0.0;
        for (const EmbeddedRow& row : sys) {
            double rhs = row.const_term + row.self_mass * p[row.state];
            for (const auto& [v, w] : row.unknown_terms) rhs += w * p[v];
            residual = std::max(residual, std::fabs(p[row.state] - rhs));
        }
        if (residual <= tol) return residual;
    }
    return residual;
}

// Dense Gaussian elimination with partial pivoting on (I - P_UU) x = c.
void dense_solve(const std::vector<EmbeddedRow>& sys, std::vector<double>& p) {
    const std::size_t m = sys.size();
    std::vector<std::size_t> pos(p.size(), m);
    for (std::size_t r = 0; r < m; ++r) pos[sys[r].state] = r;

    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t r = 0; r < m; ++r) {
        a[r][r] = 1.0 - sys[r].self_mass;
        for (const auto& [v, w] : sys[r].unknown_terms) a[r][pos[v]] -= w;
        a[r][m] = sys[r].const_term;
    }
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        if (a[col][col] == 0.0) throw SolverError("singular embedded system", 0.0);
        for (std::size_t r = col + 1; r < m; ++r) {
            double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> x(m, 0.0);
    for (std::size_t r = m; r-- > 0;) {
        double acc = a[r][m];
        for (std::size_t c = r + 1; c < m; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    for (std::size_t r = 0; r < m; ++r) p[sys[r].state] = x[r];
}

}  // namespace

UntimedResult untimed_until_prob(const Smc& smc, const StateSet& phi_states,
                                 const StateSet& psi_states) {
    require_sizes(smc, phi_states, psi_states);
    const std::size_t n = smc.num_states;
    SparseRows rows = compile_rows(smc);

    // Prob0: complement of backward reachability to psi through phi-states.
    StateSet can_reach = backward_closure(smc, rows, phi_states, psi_states, psi_states);
    UntimedResult result;
    result.exactly_zero.assign(n, false);
    for (StateIndex s = 0; s < n; ++s) result.exactly_zero[s] = !can_reach[s];

    // Prob1: complement of the backward closure of Prob0 through phi-states.
    StateSet bad_reach = backward_closure(smc, rows, phi_states, psi_states, result.exactly_zero);
    result.exactly_one.assign(n, false);
    for (StateIndex s = 0; s < n; ++s) result.exactly_one[s] = !bad_reach[s];

    result.prob.assign(n, 0.0);
    std::vector<EmbeddedRow> sys;
    for (StateIndex s = 0; s < n; ++s) {
        if (result.exactly_one[s]) {
            result.prob[s] = 1.0;
            continue;
        }
        if (result.exactly_zero[s]) continue;
        EmbeddedRow row{s, 0.0, 0.0, {}};
        double exit = rows.exit_rate[s];
        for (const Transition* e = rows.row_begin(s); e != rows.row_end(s); ++e) {
            double w = e->rate / exit;
            if (e->dst == s)
                row.self_mass += w;
            else if (result.exactly_one[e->dst])
                row.const_term += w;
            else if (!result.exactly_zero[e->dst])
                row.unknown_terms.emplace_back(e->dst, w);
        }
        sys.push_back(std::move(row));
    }
    if (sys.empty()) return result;

    constexpr double kTol = 1e-12;
    constexpr std::size_t kMaxSweeps = 1'000'000;
    double residual = gauss_seidel(sys, result.prob, kTol, kMaxSweeps);
    if (residual > kTol) {
        if (n <= 500)
            dense_solve(sys, result.prob);
        else
            throw SolverError("embedded linear system did not converge", residual);
    }
    return result;
}

PoissonWindow poisson_weights(double lambda, double delta, std::size_t max_terms) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be non-negative and finite");
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("delta must lie in (0, 1)");

    PoissonWindow win;
    if (lambda == 0.0) {
        win.left = win.right = 0;
        win.weights = {1.0};
        win.mass = 1.0;
        return win;
    }

    // log weight at the mode m = floor(lambda). The direct form
    // m*log(lambda) - lambda - lgamma(m+1) cancels catastrophically for huge
    // lambda (terms ~1e17 with a result ~-20), so switch to a Stirling-based
    // expression whose terms stay O(1) once the direct one loses accuracy.
    const std::size_t mode = static_cast<std::size_t>(std::floor(lambda));
    const double m = static_cast<double>(mode);
    double log_w_mode;
    if (lambda < 1e6) {
        log_w_mode = m * std::log(lambda) - lambda - std::lgamma(m + 1.0);
    } else {
        const double frac = lambda - m;  // in [0, 1)
        log_w_mode = m * std::log1p(frac / m) - frac -
                     0.5 * std::log(2.0 * 3.14159265358979323846 * m) - 1.0 / (12.0 * m);
    }
    const double w_mode = std::exp(log_w_mode);

    std::deque<double> weights{w_mode};
    std::size_t left = mode, right = mode;
    double w_left = w_mode, w_right = w_mode;
    double mass = w_mode;
    const double target = 1.0 - delta;

    while (mass < target) {
        double cand_left = (left > 0) ? w_left * (static_cast<double>(left) / lambda) : 0.0;
        double cand_right = w_right * (lambda / static_cast<double>(right + 1));
        if (cand_left == 0.0 && cand_right == 0.0)
            throw ResourceError("poisson window cannot reach the requested mass");
        if (cand_left >= cand_right) {
            weights.push_front(cand_left);
            w_left = cand_left;
            --left;
        } else {
            weights.push_back(cand_right);
            w_right = cand_right;
            ++right;
        }
        mass += std::max(cand_left, cand_right);
        if (weights.size() > max_terms)
            throw ResourceError("poisson window exceeds the term cap (" +
                                std::to_string(max_terms) + " terms)");
    }

    win.left = left;
    win.right = right;
    win.weights.assign(weights.begin(), weights.end());
    win.mass = mass;
    return win;
}

TransientSetup prepare_transient(const Smc& smc, const StateSet& phi_states,
                                 const StateSet& psi_states, double t, double delta) {
    require_sizes(smc, phi_states, psi_states);
    if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("time bound must be > 0");
    if (!(delta > 0.0) || delta > 1e-3)
        throw std::invalid_argument("truncation error must lie in (0, 1e-3]");

    SparseRows rows = compile_rows(smc);
    double q = 0.0;
    for (StateIndex s = 0; s < smc.num_states; ++s)
        if (is_transit(phi_states, psi_states, s)) q = std::max(q, rows.exit_rate[s]);
    if (q == 0.0) q = 1.0;  // fully absorbing after the transformation

    TransientSetup setup;
    setup.q = q;
    setup.t = t;
    setup.delta = delta;
    setup.window = poisson_weights(q * t, delta);
    return setup;
}

std::vector<double> timed_until_prob(const Smc& smc, const StateSet& phi_states,
                                     const StateSet& psi_states, double t, double delta) {
    TransientSetup setup = prepare_transient(smc, phi_states, psi_states, t, delta);
    const std::size_t n = smc.num_states;
    SparseRows rows = compile_rows(smc);
    const double q = setup.q;

    // v_k = P_unif^k * 1_psi on the transformed chain (psi and invalid states
    // absorbing); accumulate the Poisson-weighted sum over the window.
    std::vector<double> v(n, 0.0), next(n, 0.0), result(n, 0.0);
    for (StateIndex s = 0; s < n; ++s) v[s] = psi_states[s] ? 1.0 : 0.0;

    const PoissonWindow& win = setup.window;
    for (std::size_t k = 0;; ++k) {
        if (k >= win.left) {
            double w = win.weights[k - win.left];
            for (StateIndex s = 0; s < n; ++s) result[s] += w * v[s];
        }
        if (k == win.right) break;
        for (StateIndex s = 0; s < n; ++s) {
            if (!is_transit(phi_states, psi_states, s)) {
                next[s] = v[s];
                continue;
            }
            double acc = (1.0 - rows.exit_rate[s] / q) * v[s];
            for (const Transition* e = rows.row_begin(s); e != rows.row_end(s); ++e)
                acc += (e->rate / q) * v[e->dst];
            next[s] = acc;
        }
        v.swap(next);
    }

    // The full series for an absorbing psi state sums to exactly one; restore
    // that before clamping sub-delta rounding overshoot.
    for (StateIndex s = 0; s < n; ++s) {
        if (psi_states[s]) result[s] = 1.0;
        result[s] = std::min(1.0, std::max(0.0, result[s]));
    }
    return result;
}

}  // namespace smcrepair
