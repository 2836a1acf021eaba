#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "smcrepair/analysis.hpp"
#include "smcrepair/smc.hpp"

namespace smcrepair {

/// Propositional state formula: atoms, negation and disjunction. Conjunction
/// is desugared at construction time, so consumers only see three node kinds.
/// Nodes are immutable and shared; copying a formula is cheap.
class PropFormula {
public:
    enum class Kind { Atom, Not, Or };

    static PropFormula atom(std::string name);
    static PropFormula negation(PropFormula f);
    static PropFormula disjunction(PropFormula lhs, PropFormula rhs);
    static PropFormula conjunction(PropFormula lhs, PropFormula rhs);  // !(!l | !r)

    Kind kind() const;
    const std::string& atom_name() const;  // Kind::Atom only
    PropFormula child() const;             // Kind::Not only
    PropFormula left() const;              // Kind::Or only
    PropFormula right() const;             // Kind::Or only

    bool structurally_equal(const PropFormula& other) const;
    std::string to_string() const;

    /// All atom names occurring in the formula, deduplicated, sorted.
    std::vector<std::string> atoms() const;

private:
    struct Node;
    explicit PropFormula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

enum class Comparison { Leq, Geq };

/// A single upper time-bounded Until requirement P~b(phi U<=t psi). Strict
/// and non-strict comparison are not distinguished (the probabilities of a
/// continuous-time chain make them coincide).
struct UntilRequirement {
    Comparison comparison = Comparison::Leq;
    double bound_b = 0.5;  // strictly inside (0, 1)
    PropFormula phi;
    PropFormula psi;
    double time_bound_t = 1.0;  // > 0
};

struct FormulaError : std::runtime_error {
    FormulaError(std::size_t offset_, const std::string& message, bool semantic_ = false);
    std::size_t offset;  // byte offset into the input text
    bool semantic;
};

/// Parses the surface syntax
///
///   P <= <b> [ <prop> U <= <t> <prop> ]
///   P >= <b> [ <prop> U <= <t> <prop> ]
///
/// where <prop> is built from bare or quoted atom names, '!', '&', '|' and
/// parentheses ('&' binds tighter than '|'); '<'/'<=' and '>'/'>=' are
/// interchangeable. Whitespace is insignificant. Exactly one Until and one
/// probability operator are accepted; b must lie in (0,1) and t must be > 0.
/// A bare `U` always reads as the Until keyword; quote it to use it as atom.
UntilRequirement parse_formula(std::string_view text);

std::string to_string(const UntilRequirement& req);
bool structurally_equal(const UntilRequirement& a, const UntilRequirement& b);

/// Sat(f) by structural recursion over the labelling; atoms unknown to the
/// model evaluate to false at every state.
StateSet eval_prop(const Smc& smc, const PropFormula& f);

/// Atom names used by f that no state of the model carries.
std::vector<std::string> unknown_atoms(const Smc& smc, const PropFormula& f);

struct CheckOutcome {
    std::vector<double> prob;  // Pr(s, phi U<=t psi)
    StateSet sat;              // prob(s) ~ b
};

/// Full model check of the requirement against every state.
CheckOutcome check(const Smc& smc, const UntilRequirement& req,
                   double delta = kDefaultTruncError);

}  // namespace smcrepair
