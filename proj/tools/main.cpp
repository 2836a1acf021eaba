// smcrepair: model checking and rate-reduction repair for upper time-bounded
// CSL Until requirements on state-labelled continuous-time Markov chains.
//
// Subcommands: check, partition, repair, sweep, simulate. Exit codes:
//   0  success (check: all states satisfy; repair: repaired or no repair needed)
//   1  check found at least one violating state
//   2  usage, parse, validation or internal numerical error
//   3  repair failed (no common reduction factor exists)

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "smcrepair/analysis.hpp"
#include "smcrepair/csl.hpp"
#include "smcrepair/partition.hpp"
#include "smcrepair/reduced.hpp"
#include "smcrepair/repair.hpp"
#include "smcrepair/simulate.hpp"
#include "smcrepair/smc.hpp"

namespace {

using nlohmann::json;
using namespace smcrepair;

constexpr int kExitOk = 0;
constexpr int kExitViolated = 1;
constexpr int kExitError = 2;
constexpr int kExitRepairFailed = 3;

struct CommonOptions {
    std::string model_path;
    std::string formula;
    std::string formula_file;
    double epsilon = 1e-4;
    double trunc_error = kDefaultTruncError;
    bool strict_atoms = false;
    bool merge_duplicates = false;
    bool json_output = false;
};

std::string fmt9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_formula = true) {
    cmd->add_option("model", opts.model_path, "explicit-state model file")->required();
    if (with_formula) {
        cmd->add_option("formula", opts.formula, "CSL requirement, e.g. 'P<=0.2 [ \"up\" U<=5 \"repair\" ]'");
        cmd->add_option("--formula-file", opts.formula_file, "read the requirement from a single-line file");
    }
    cmd->add_option("--trunc-error", opts.trunc_error, "uniformisation truncation error budget")
        ->capture_default_str();
    cmd->add_flag("--strict-atoms", opts.strict_atoms, "treat unknown atoms as an error");
    cmd->add_flag("--merge-duplicates", opts.merge_duplicates,
                  "sum rates of duplicate (src,dst) lines instead of rejecting them");
    cmd->add_flag("--json", opts.json_output, "machine-readable JSON output");
}

UntilRequirement load_formula(const CommonOptions& opts) {
    std::string text = opts.formula;
    if (!opts.formula_file.empty()) {
        if (!text.empty()) throw std::runtime_error("give a formula argument or --formula-file, not both");
        std::ifstream in(opts.formula_file);
        if (!in) throw std::runtime_error("cannot open formula file: " + opts.formula_file);
        std::getline(in, text);
    }
    if (text.empty()) throw std::runtime_error("missing formula (argument or --formula-file)");
    return parse_formula(text);
}

Smc load_model(const CommonOptions& opts) {
    Smc smc = read_model_file(opts.model_path, opts.merge_duplicates);
    ValidationReport report = validate(smc);
    if (!report.ok()) {
        std::string msg = "invalid model:";
        for (const std::string& issue : report.issues) msg += "\n  " + issue;
        throw std::runtime_error(msg);
    }
    return smc;
}

void handle_unknown_atoms(const Smc& smc, const UntilRequirement& req, bool strict) {
    std::vector<std::string> missing = unknown_atoms(smc, req.phi);
    for (const std::string& name : unknown_atoms(smc, req.psi)) missing.push_back(name);
    for (const std::string& name : missing) {
        if (strict) throw std::runtime_error("unknown atom \"" + name + "\" (--strict-atoms)");
        std::cerr << "warning: atom \"" << name << "\" does not occur in the model; it is false everywhere\n";
    }
}

Partition compute_partition(const Smc& smc, const UntilRequirement& req) {
    StateSet phi = eval_prop(smc, req.phi);
    StateSet psi = eval_prop(smc, req.psi);
    UntimedResult untimed = untimed_until_prob(smc, phi, psi);
    return make_partition(smc, phi, psi, untimed);
}

json edges_to_json(const std::vector<EdgeId>& edges) {
    json arr = json::array();
    for (const EdgeId& e : edges) arr.push_back({e.first, e.second});
    return arr;
}

json probs_to_json(const std::vector<double>& probs) {
    json map = json::object();
    for (std::size_t s = 0; s < probs.size(); ++s) map[std::to_string(s)] = probs[s];
    return map;
}

int cmd_check(const CommonOptions& opts) {
    Smc smc = load_model(opts);
    UntilRequirement req = load_formula(opts);
    handle_unknown_atoms(smc, req, opts.strict_atoms);
    Partition partition = compute_partition(smc, req);
    CheckOutcome outcome = check(smc, req, opts.trunc_error);

    bool all_sat = true;
    for (StateIndex s = 0; s < smc.num_states; ++s) all_sat = all_sat && outcome.sat[s];

    if (opts.json_output) {
        json doc;
        doc["requirement"] = to_string(req);
        doc["all_satisfy"] = all_sat;
        doc["probability"] = probs_to_json(outcome.prob);
        json sat = json::object(), cls = json::object();
        for (StateIndex s = 0; s < smc.num_states; ++s) {
            sat[std::to_string(s)] = static_cast<bool>(outcome.sat[s]);
            cls[std::to_string(s)] = to_string(partition.class_of[s]);
        }
        doc["sat"] = sat;
        doc["class"] = cls;
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "requirement: " << to_string(req) << "\n";
        std::printf("%-7s %-12s %-14s %s\n", "state", "class", "probability", "result");
        for (StateIndex s = 0; s < smc.num_states; ++s)
            std::printf("%-7u %-12s %-14s %s\n", s, to_string(partition.class_of[s]),
                        fmt9(outcome.prob[s]).c_str(), outcome.sat[s] ? "sat" : "VIOLATES");
        std::cout << (all_sat ? "all states satisfy the requirement\n"
                              : "some states violate the requirement\n");
    }
    return all_sat ? kExitOk : kExitViolated;
}

int cmd_partition(const CommonOptions& opts) {
    Smc smc = load_model(opts);
    UntilRequirement req = load_formula(opts);
    handle_unknown_atoms(smc, req, opts.strict_atoms);
    Partition partition = compute_partition(smc, req);

    const StateClass order[] = {StateClass::Invalid, StateClass::Target, StateClass::GoToTarget,
                                StateClass::GoToInvalid, StateClass::GoBothWays};
    if (opts.json_output) {
        json doc;
        json cls = json::object();
        for (StateIndex s = 0; s < smc.num_states; ++s)
            cls[std::to_string(s)] = to_string(partition.class_of[s]);
        doc["class"] = cls;
        json counts = json::object();
        for (StateClass c : order) counts[to_string(c)] = states_in(partition, c).size();
        doc["counts"] = counts;
        std::cout << doc.dump(2) << "\n";
    } else {
        for (StateIndex s = 0; s < smc.num_states; ++s)
            std::printf("%-7u %s\n", s, to_string(partition.class_of[s]));
        std::cout << "summary:\n";
        for (StateClass c : order)
            std::printf("  %-12s %zu\n", to_string(c), states_in(partition, c).size());
    }
    return kExitOk;
}

void print_factor(const char* name, double value, const std::vector<EdgeId>& edges) {
    if (edges.empty()) {
        std::printf("factor %s = 1 (untouched)\n", name);
        return;
    }
    std::printf("factor %s = %s on %zu transition(s):", name, fmt9(value).c_str(), edges.size());
    for (const EdgeId& e : edges) std::printf(" (%u->%u)", e.first, e.second);
    std::printf("\n");
}

int cmd_repair(const CommonOptions& opts, const std::string& emit_model_path) {
    Smc smc = load_model(opts);
    UntilRequirement req = load_formula(opts);
    handle_unknown_atoms(smc, req, opts.strict_atoms);

    BsmConfig cfg;
    cfg.epsilon = opts.epsilon;
    cfg.trunc_error = opts.trunc_error;
    RepairOutcome outcome = (req.comparison == Comparison::Leq) ? repair_upper_bound(smc, req, cfg)
                                                                : repair_lower_bound(smc, req, cfg);

    if (opts.json_output) {
        json doc;
        doc["requirement"] = to_string(req);
        doc["status"] = to_string(outcome.status);
        doc["factors"] = {{"i", outcome.factors.i}, {"j", outcome.factors.j}, {"k", outcome.factors.k}};
        doc["t_i"] = edges_to_json(outcome.t_i);
        doc["t_j"] = edges_to_json(outcome.t_j);
        doc["t_k"] = edges_to_json(outcome.t_k);
        doc["before"] = probs_to_json(outcome.before);
        doc["after"] = probs_to_json(outcome.after);
        doc["iterations"] = {{"phase_i", outcome.iterations.phase_i},
                             {"phase_k", outcome.iterations.phase_k},
                             {"phase_j", outcome.iterations.phase_j}};
        if (outcome.blocking_state) doc["blocking_state"] = *outcome.blocking_state;
        if (outcome.limit_probs) doc["limit"] = probs_to_json(*outcome.limit_probs);
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << "requirement: " << to_string(req) << "\n";
        std::cout << "status: " << to_string(outcome.status) << "\n";
        if (outcome.status == RepairStatus::Repaired) {
            print_factor("i", outcome.factors.i, outcome.t_i);
            print_factor("j", outcome.factors.j, outcome.t_j);
            print_factor("k", outcome.factors.k, outcome.t_k);
        }
        std::printf("iterations: phase i %d, phase k %d, phase j %d\n", outcome.iterations.phase_i,
                    outcome.iterations.phase_k, outcome.iterations.phase_j);
        std::printf("%-7s %-12s %-14s %-14s %s\n", "state", "class", "before", "after", "result");
        for (StateIndex s = 0; s < smc.num_states; ++s) {
            double after = outcome.after[s];
            bool sat = (req.comparison == Comparison::Leq) ? after <= req.bound_b
                                                           : after >= req.bound_b;
            std::printf("%-7u %-12s %-14s %-14s %s\n", s, to_string(outcome.partition.class_of[s]),
                        fmt9(outcome.before[s]).c_str(), fmt9(after).c_str(),
                        sat ? "sat" : "VIOLATES");
        }
        if (outcome.status == RepairStatus::Failed && outcome.blocking_state &&
            outcome.limit_probs) {
            std::printf("limit as j->0 for state %u: %s, below the bound %s\n",
                        *outcome.blocking_state, fmt9((*outcome.limit_probs)[*outcome.blocking_state]).c_str(),
                        fmt9(req.bound_b).c_str());
        }
    }

    if (!emit_model_path.empty()) {
        if (outcome.status == RepairStatus::Failed) {
            std::cerr << "note: repair failed, no model emitted\n";
        } else {
            ReducedSmc reduced = build_reduced(smc, outcome.partition);
            write_model_file(emit_model_path, instantiate(reduced, outcome.factors));
        }
    }
    return outcome.status == RepairStatus::Failed ? kExitRepairFailed : kExitOk;
}

struct SweepOptions {
    std::string factor = "k";
    double from = 0.01;
    double to = 1.0;
    std::size_t steps = 0;
    std::vector<double> points;
    double fix_i = 1.0, fix_j = 1.0, fix_k = 1.0;
    std::string csv_path;
};

int cmd_sweep(const CommonOptions& opts, const SweepOptions& sweep) {
    Smc smc = load_model(opts);
    UntilRequirement req = load_formula(opts);
    handle_unknown_atoms(smc, req, opts.strict_atoms);

    if (sweep.factor != "i" && sweep.factor != "j" && sweep.factor != "k")
        throw std::runtime_error("--factor must be one of i, j, k");

    std::vector<double> grid = sweep.points;
    if (grid.empty()) {
        if (sweep.steps < 2) throw std::runtime_error("--steps must be >= 2");
        for (std::size_t n = 0; n < sweep.steps; ++n)
            grid.push_back(sweep.from + (sweep.to - sweep.from) * static_cast<double>(n) /
                                            static_cast<double>(sweep.steps - 1));
    }
    for (double g : grid)
        if (!(g > 0.0) || g > 1.0) throw std::runtime_error("grid points must lie in (0, 1]");

    StateSet phi = eval_prop(smc, req.phi);
    StateSet psi = eval_prop(smc, req.psi);
    UntimedResult untimed = untimed_until_prob(smc, phi, psi);
    Partition partition = make_partition(smc, phi, psi, untimed);
    ReducedSmc reduced = build_reduced(smc, partition);

    // Tracked states are the repair scope of the chosen factor.
    std::vector<StateIndex> tracked = states_in(
        partition, sweep.factor == "i" ? StateClass::GoToTarget : StateClass::GoBothWays);

    std::ofstream csv(sweep.csv_path);
    if (!csv) throw std::runtime_error("cannot open CSV output file: " + sweep.csv_path);
    csv << "factor,state,probability\n";
    for (double g : grid) {
        Factors factors{sweep.fix_i, sweep.fix_j, sweep.fix_k};
        if (sweep.factor == "i") factors.i = g;
        if (sweep.factor == "j") factors.j = g;
        if (sweep.factor == "k") factors.k = g;
        Smc instance = instantiate(reduced, factors);
        std::vector<double> probs =
            timed_until_prob(instance, phi, psi, req.time_bound_t, opts.trunc_error);
        for (StateIndex s : tracked) csv << fmt9(g) << "," << s << "," << fmt9(probs[s]) << "\n";
    }
    std::cout << "wrote " << grid.size() * tracked.size() << " rows (" << tracked.size()
              << " tracked state(s), " << grid.size() << " grid point(s)) to " << sweep.csv_path
              << "\n";
    return kExitOk;
}

struct SimulateOptions {
    StateIndex start = 0;
    std::size_t paths = 100'000;
    std::uint64_t seed = 1;
    std::size_t max_jumps = 1'000'000;
    bool untimed = false;
};

int cmd_simulate(const CommonOptions& opts, const SimulateOptions& sim) {
    Smc smc = load_model(opts);
    UntilRequirement req = load_formula(opts);
    handle_unknown_atoms(smc, req, opts.strict_atoms);

    SimConfig cfg;
    cfg.num_paths = sim.paths;
    cfg.seed = sim.seed;
    cfg.max_jumps = sim.max_jumps;
    std::optional<double> bound;
    if (!sim.untimed) bound = req.time_bound_t;
    SimResult result =
        simulate_until(smc, sim.start, eval_prop(smc, req.phi), eval_prop(smc, req.psi), bound, cfg);

    if (opts.json_output) {
        json doc{{"estimate", result.estimate},
                 {"std_error", result.std_error},
                 {"flagged_paths", result.flagged_paths},
                 {"paths", sim.paths},
                 {"state", sim.start}};
        std::cout << doc.dump(2) << "\n";
    } else {
        std::printf("state %u: estimate %s (std error %s, %zu paths", sim.start,
                    fmt9(result.estimate).c_str(), fmt9(result.std_error).c_str(), sim.paths);
        if (result.flagged_paths > 0)
            std::printf(", %zu flagged undecided", result.flagged_paths);
        std::printf(")\n");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"model checking and rate-reduction repair for time-bounded CSL Until "
                 "requirements on labelled CTMCs"};
    app.require_subcommand(1);

    CommonOptions check_opts, part_opts, repair_opts, sweep_opts_common, sim_opts_common;
    SweepOptions sweep_opts;
    SimulateOptions sim_opts;
    std::string emit_model_path;

    CLI::App* check_cmd = app.add_subcommand("check", "model-check a requirement on every state");
    add_common(check_cmd, check_opts);

    CLI::App* part_cmd = app.add_subcommand("partition", "print the state-space partition");
    add_common(part_cmd, part_opts);

    CLI::App* repair_cmd =
        app.add_subcommand("repair", "synthesize rate-reduction factors for a violated requirement");
    add_common(repair_cmd, repair_opts);
    repair_cmd->add_option("--epsilon", repair_opts.epsilon, "binary search precision")
        ->capture_default_str();
    repair_cmd->add_option("--emit-model", emit_model_path,
                           "write the repaired model in the input format");

    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "probabilities of the tracked states over a factor grid (CSV)");
    add_common(sweep_cmd, sweep_opts_common);
    sweep_cmd->add_option("--factor", sweep_opts.factor, "factor to sweep: i, j or k")->required();
    sweep_cmd->add_option("--from", sweep_opts.from, "grid start (in (0,1])");
    sweep_cmd->add_option("--to", sweep_opts.to, "grid end (in (0,1])");
    sweep_cmd->add_option("--steps", sweep_opts.steps, "number of equidistant grid points (>= 2)");
    sweep_cmd->add_option("--points", sweep_opts.points, "explicit grid points instead of --from/--to/--steps");
    sweep_cmd->add_option("--fix-i", sweep_opts.fix_i, "value of i while sweeping another factor");
    sweep_cmd->add_option("--fix-j", sweep_opts.fix_j, "value of j while sweeping another factor");
    sweep_cmd->add_option("--fix-k", sweep_opts.fix_k, "value of k while sweeping another factor");
    sweep_cmd->add_option("--csv", sweep_opts.csv_path, "CSV output path")->required();

    CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimate for one start state");
    add_common(sim_cmd, sim_opts_common);
    sim_cmd->add_option("--state", sim_opts.start, "start state")->capture_default_str();
    sim_cmd->add_option("--paths", sim_opts.paths, "number of simulated paths")->capture_default_str();
    sim_cmd->add_option("--seed", sim_opts.seed, "random seed")->capture_default_str();
    sim_cmd->add_option("--max-jumps", sim_opts.max_jumps, "per-path jump cap")->capture_default_str();
    sim_cmd->add_flag("--untimed", sim_opts.untimed, "estimate the untimed Until probability");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (check_cmd->parsed()) return cmd_check(check_opts);
        if (part_cmd->parsed()) return cmd_partition(part_opts);
        if (repair_cmd->parsed()) return cmd_repair(repair_opts, emit_model_path);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_opts_common, sweep_opts);
        if (sim_cmd->parsed()) return cmd_simulate(sim_opts_common, sim_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
