#include <doctest.h>

#include <cmath>

#include "smcrepair/analysis.hpp"
#include "smcrepair/simulate.hpp"
#include "support.hpp"

using namespace smcrepair;
using namespace testsupport;

namespace {

StateSet atom_set(const Smc& smc, const std::string& ap) {
    StateSet out(smc.num_states, false);
    for (StateIndex s = 0; s < smc.num_states; ++s) out[s] = smc.has_label(s, ap);
    return out;
}

// Test-local dense route: boundary values from the closure-based oracle
// classes, full Gaussian elimination over the remaining states.
std::vector<double> dense_untimed_oracle(const Smc& smc, const StateSet& phi,
                                         const StateSet& psi) {
    const std::size_t n = smc.num_states;
    std::vector<StateClass> classes = oracle_partition(smc, phi, psi);
    std::vector<double> p(n, 0.0);
    std::vector<StateIndex> unknown;
    for (StateIndex s = 0; s < n; ++s) {
        if (classes[s] == StateClass::Target || classes[s] == StateClass::GoToTarget)
            p[s] = 1.0;
        else if (classes[s] == StateClass::GoBothWays)
            unknown.push_back(s);
    }
    if (unknown.empty()) return p;

    SparseRows rows = compile_rows(smc);
    const std::size_t m = unknown.size();
    std::vector<std::size_t> pos(n, m);
    for (std::size_t r = 0; r < m; ++r) pos[unknown[r]] = r;
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t r = 0; r < m; ++r) {
        StateIndex s = unknown[r];
        a[r][r] = 1.0;
        double exit = rows.exit_rate[s];
        for (const Transition* e = rows.row_begin(s); e != rows.row_end(s); ++e) {
            double w = e->rate / exit;
            if (pos[e->dst] < m)
                a[r][pos[e->dst]] -= w;
            else
                a[r][m] += w * p[e->dst];
        }
    }
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        for (std::size_t r = col + 1; r < m; ++r) {
            double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> x(m, 0.0);
    for (std::size_t r = m; r-- > 0;) {
        double acc = a[r][m];
        for (std::size_t c = r + 1; c < m; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    for (std::size_t r = 0; r < m; ++r) p[unknown[r]] = x[r];
    return p;
}

}  // namespace

TEST_CASE("poisson window: degenerate lambda") {
    PoissonWindow win = poisson_weights(0.0, 1e-9);
    CHECK(win.left == 0);
    CHECK(win.right == 0);
    REQUIRE(win.weights.size() == 1);
    CHECK(win.weights[0] == 1.0);
}

TEST_CASE("poisson window: retained mass lies in [1-delta, 1]") {
    for (double lambda : {1e-3, 0.5, 5.0, 50.0, 1e4}) {
        PoissonWindow win = poisson_weights(lambda, 1e-9);
        double sum = 0.0;
        for (double w : win.weights) sum += w;
        CHECK(sum >= 1.0 - 1e-9);
        CHECK(sum <= 1.0 + 1e-12);
        CHECK(win.right - win.left + 1 == win.weights.size());
    }
}

TEST_CASE("poisson window: recurrence ratio identity at the mode") {
    PoissonWindow win = poisson_weights(5.0, 1e-9);
    REQUIRE(win.left <= 4);
    REQUIRE(win.right >= 5);
    double w4 = win.weights[4 - win.left];
    double w5 = win.weights[5 - win.left];
    CHECK(w4 / w5 == 1.0);  // w_5 = w_4 * lambda/5 with lambda = 5, exactly
}

TEST_CASE("poisson window: term cap turns huge lambda into a resource error") {
    CHECK_THROWS_AS(poisson_weights(1e16, 1e-9), ResourceError);
    CHECK_THROWS_AS(poisson_weights(1e3, 1e-9, /*max_terms=*/4), ResourceError);
    CHECK_THROWS_AS(poisson_weights(-1.0, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(poisson_weights(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("untimed: certain reachability") {
    Smc smc;
    smc.num_states = 2;
    smc.transitions = {{0, 1, 2.0}};
    smc.labels = {{"up"}, {"repair"}};
    UntimedResult res = untimed_until_prob(smc, atom_set(smc, "up"), atom_set(smc, "repair"));
    CHECK(res.prob[0] == 1.0);
    CHECK(res.exactly_one[0]);
    CHECK(res.exactly_one[1]);
    CHECK_FALSE(res.exactly_zero[0]);
}

TEST_CASE("untimed: branching race probabilities") {
    {
        Smc smc = race_chain(1.0, 1.0);
        UntimedResult res = untimed_until_prob(smc, atom_set(smc, "up"), atom_set(smc, "repair"));
        CHECK(res.prob[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK_FALSE(res.exactly_one[0]);
        CHECK_FALSE(res.exactly_zero[0]);
    }
    {
        Smc smc = race_chain(2.0, 3.0);
        UntimedResult res = untimed_until_prob(smc, atom_set(smc, "up"), atom_set(smc, "repair"));
        CHECK(res.prob[0] == doctest::Approx(0.4).epsilon(1e-12));
    }
}

TEST_CASE("untimed: qualitative sets cover psi and invalid states") {
    std::mt19937_64 rng(5150);
    for (int trial = 0; trial < 40; ++trial) {
        Smc smc = random_smc(rng, 25);
        StateSet phi = atom_set(smc, "a"), psi = atom_set(smc, "b");
        UntimedResult res = untimed_until_prob(smc, phi, psi);
        for (StateIndex s = 0; s < smc.num_states; ++s) {
            if (psi[s]) CHECK(res.exactly_one[s]);
            if (!phi[s] && !psi[s]) CHECK(res.exactly_zero[s]);
            if (res.exactly_one[s]) CHECK(res.prob[s] == 1.0);
            if (res.exactly_zero[s]) CHECK(res.prob[s] == 0.0);
        }
    }
}

TEST_CASE("untimed agrees with an independent dense solve on random models") {
    std::mt19937_64 rng(414243);
    for (int trial = 0; trial < 60; ++trial) {
        Smc smc = random_smc(rng, 30);
        StateSet phi = atom_set(smc, "a"), psi = atom_set(smc, "b");
        UntimedResult res = untimed_until_prob(smc, phi, psi);
        std::vector<double> expect = dense_untimed_oracle(smc, phi, psi);
        for (StateIndex s = 0; s < smc.num_states; ++s)
            CHECK(res.prob[s] == doctest::Approx(expect[s]).epsilon(1e-9));
    }
}

TEST_CASE("untimed agrees with the Monte Carlo oracle") {
    std::mt19937_64 rng(777);
    int compared = 0;
    while (compared < 3) {
        Smc smc = random_smc(rng, 20);
        StateSet phi = atom_set(smc, "a"), psi = atom_set(smc, "b");
        UntimedResult res = untimed_until_prob(smc, phi, psi);
        StateIndex pick = smc.num_states;
        for (StateIndex s = 0; s < smc.num_states; ++s)
            if (res.prob[s] > 0.05 && res.prob[s] < 0.95) pick = s;
        if (pick == smc.num_states) continue;
        SimConfig cfg;
        cfg.num_paths = 100'000;
        cfg.seed = 42 + compared;
        SimResult sim = simulate_until(smc, pick, phi, psi, std::nullopt, cfg);
        CHECK(std::fabs(sim.estimate - res.prob[pick]) <= 3.0 * sim.std_error + 1e-12);
        ++compared;
    }
}

TEST_CASE("timed: closed-form single exponential and competing race") {
    {
        Smc smc = two_state_chain();
        std::vector<double> p =
            timed_until_prob(smc, atom_set(smc, "up"), atom_set(smc, "repair"), 5.0, 1e-9);
        CHECK(std::fabs(p[0] - (1.0 - std::exp(-5.0))) <= 1e-8);
        CHECK(p[1] == 1.0);
    }
    {
        Smc smc = race_chain(1.0, 1.0);
        std::vector<double> p =
            timed_until_prob(smc, atom_set(smc, "up"), atom_set(smc, "repair"), 1.0, 1e-9);
        CHECK(std::fabs(p[0] - competing(1.0, 1.0, 1.0)) <= 1e-8);
        CHECK(std::fabs(p[0] - 0.43233236) <= 1e-7);
    }
}

TEST_CASE("timed: psi states are exactly one, invalid states exactly zero") {
    Smc smc = machine_chain();
    std::vector<double> p =
        timed_until_prob(smc, atom_set(smc, "up"), atom_set(smc, "repair"), 5.0, 1e-9);
    CHECK(p[5] == 1.0);
    CHECK(p[0] == 0.0);
    CHECK(p[1] == 0.0);
}

TEST_CASE("timed: uniformisation rate is the transformed chain's max exit rate") {
    Smc smc = machine_chain();
    TransientSetup setup =
        prepare_transient(smc, atom_set(smc, "up"), atom_set(smc, "repair"), 5.0, 1e-9);
    CHECK(setup.q == doctest::Approx(2.7));  // state 2: rates 2.0 + 0.7

    Smc absorbing;  // no transit states at all
    absorbing.num_states = 2;
    absorbing.transitions = {};
    absorbing.labels = {{"repair"}, {}};
    TransientSetup trivial =
        prepare_transient(absorbing, StateSet(2, false), atom_set(absorbing, "repair"), 1.0, 1e-9);
    CHECK(trivial.q == 1.0);
}

TEST_CASE("timed: monotone in the time bound") {
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> time_dist(0.05, 4.0);
    for (int trial = 0; trial < 25; ++trial) {
        Smc smc = random_smc(rng, 20);
        StateSet phi = atom_set(smc, "a"), psi = atom_set(smc, "b");
        double t1 = time_dist(rng), t2 = time_dist(rng);
        if (t1 > t2) std::swap(t1, t2);
        std::vector<double> p1 = timed_until_prob(smc, phi, psi, t1, 1e-9);
        std::vector<double> p2 = timed_until_prob(smc, phi, psi, t2, 1e-9);
        for (StateIndex s = 0; s < smc.num_states; ++s) CHECK(p1[s] <= p2[s] + 2e-9);
    }
}

TEST_CASE("timed never exceeds untimed (plus truncation slack)") {
    std::mt19937_64 rng(60601);
    std::uniform_real_distribution<double> time_dist(0.05, 8.0);
    for (int trial = 0; trial < 40; ++trial) {
        Smc smc = random_smc(rng, 25);
        StateSet phi = atom_set(smc, "a"), psi = atom_set(smc, "b");
        std::vector<double> timed = timed_until_prob(smc, phi, psi, time_dist(rng), 1e-9);
        UntimedResult untimed = untimed_until_prob(smc, phi, psi);
        for (StateIndex s = 0; s < smc.num_states; ++s)
            CHECK(timed[s] <= untimed.prob[s] + 2e-9);
    }
}

TEST_CASE("timed: invariant to outgoing rates of absorbing-transformed states") {
    Smc smc = machine_chain();
    StateSet phi = atom_set(smc, "up"), psi = atom_set(smc, "repair");
    std::vector<double> base = timed_until_prob(smc, phi, psi, 3.0, 1e-9);

    Smc mutated = smc;
    mutated.transitions.push_back({5, 0, 123.0});  // psi state gains a wild edge
    mutated.transitions.push_back({0, 5, 7.0});    // invalid state jumps straight to psi
    for (Transition& tr : mutated.transitions)
        if (tr.src == 1) tr.rate *= 50.0;
    std::vector<double> changed = timed_until_prob(mutated, phi, psi, 3.0, 1e-9);
    for (StateIndex s = 0; s < smc.num_states; ++s)
        CHECK(std::fabs(base[s] - changed[s]) <= 1e-14);
}

TEST_CASE("timed: halving delta moves no component by more than delta") {
    std::mt19937_64 rng(8086);
    for (int trial = 0; trial < 10; ++trial) {
        Smc smc = random_smc(rng, 20);
        StateSet phi = atom_set(smc, "a"), psi = atom_set(smc, "b");
        for (double delta : {1e-6, 1e-9}) {
            std::vector<double> coarse = timed_until_prob(smc, phi, psi, 2.0, delta);
            std::vector<double> fine = timed_until_prob(smc, phi, psi, 2.0, delta / 2.0);
            for (StateIndex s = 0; s < smc.num_states; ++s)
                CHECK(std::fabs(coarse[s] - fine[s]) <= delta);
        }
    }
}

TEST_CASE("timed: argument validation") {
    Smc smc = two_state_chain();
    StateSet phi = atom_set(smc, "up"), psi = atom_set(smc, "repair");
    CHECK_THROWS_AS(timed_until_prob(smc, phi, psi, 0.0, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(timed_until_prob(smc, phi, psi, -1.0, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(timed_until_prob(smc, phi, psi, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(timed_until_prob(smc, phi, psi, 1.0, 1e-2), std::invalid_argument);
    CHECK_THROWS_AS(timed_until_prob(smc, phi, StateSet(3, false), 1.0, 1e-9),
                    std::invalid_argument);
    CHECK_THROWS_AS(untimed_until_prob(smc, StateSet(5, false), psi), std::invalid_argument);
}
