#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace smcrepair {

using StateIndex = std::uint32_t;

/// Canonical transition identifier; at most one transition per (src, dst).
using EdgeId = std::pair<StateIndex, StateIndex>;

/// Dense indicator set over the state space 0..N-1.
using StateSet = std::vector<bool>;

struct Transition {
    StateIndex src = 0;
    StateIndex dst = 0;
    double rate = 0.0;  // 1/time, strictly positive in a valid model
};

/// State-labelled continuous-time Markov chain: a finite state space, a sparse
/// non-negative rate matrix (absent entry = rate 0), and per-state sets of
/// atomic propositions. Self-loops and absorbing states are allowed.
/// Immutable by convention once built; all analyses take it by const ref.
struct Smc {
    std::size_t num_states = 0;
    std::vector<Transition> transitions;
    std::vector<std::set<std::string>> labels;  // size num_states

    bool has_label(StateIndex s, const std::string& ap) const {
        return s < labels.size() && labels[s].count(ap) > 0;
    }
};

struct ValidationReport {
    std::vector<std::string> issues;
    bool ok() const noexcept { return issues.empty(); }
};

/// Checks the structural invariants: strictly positive finite rates, state
/// indices in range, no duplicate (src, dst) entries, labels sized to the
/// state space. Returns the list of violations instead of throwing.
ValidationReport validate(const Smc& smc);

/// Row-compiled view of the rate matrix: edges sorted by (src, dst) with CSR
/// offsets and per-state exit rates (self-loops included in the exit rate).
struct SparseRows {
    std::vector<std::size_t> offset;  // num_states + 1
    std::vector<Transition> edges;
    std::vector<double> exit_rate;

    const Transition* row_begin(StateIndex s) const { return edges.data() + offset[s]; }
    const Transition* row_end(StateIndex s) const { return edges.data() + offset[s + 1]; }
};

/// Precondition: smc passes validate().
SparseRows compile_rows(const Smc& smc);

struct ModelParseError : std::runtime_error {
    ModelParseError(std::size_t line_, const std::string& message);
    std::size_t line;
};

/// Reads the explicit-state text format:
///
///   states <N>
///   <src> <dst> <rate>     (zero or more)
///   labels
///   <state>: <prop> [<prop> ...]
///
/// '#'-prefixed lines and blank lines are ignored anywhere; CRLF accepted.
/// Duplicate (src, dst) lines are an error unless merge_duplicates is set,
/// in which case their rates are summed.
Smc read_model(std::istream& in, bool merge_duplicates = false);
Smc read_model_file(const std::string& path, bool merge_duplicates = false);

/// Writes the same format with transitions sorted by (src, dst); rates are
/// printed with enough digits to round-trip exactly.
void write_model(std::ostream& out, const Smc& smc);
void write_model_file(const std::string& path, const Smc& smc);

}  // namespace smcrepair
