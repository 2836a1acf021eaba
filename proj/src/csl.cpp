#include "smcrepair/csl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

namespace smcrepair {

struct PropFormula::Node {
    Kind kind;
    std::string name;                  // Atom
    std::shared_ptr<const Node> a, b;  // Not uses a; Or uses a and b
};

PropFormula PropFormula::atom(std::string name) {
    return PropFormula(std::make_shared<Node>(Node{Kind::Atom, std::move(name), nullptr, nullptr}));
}

PropFormula PropFormula::negation(PropFormula f) {
    return PropFormula(std::make_shared<Node>(Node{Kind::Not, {}, std::move(f.node_), nullptr}));
}

PropFormula PropFormula::disjunction(PropFormula lhs, PropFormula rhs) {
    return PropFormula(
        std::make_shared<Node>(Node{Kind::Or, {}, std::move(lhs.node_), std::move(rhs.node_)}));
}

PropFormula PropFormula::conjunction(PropFormula lhs, PropFormula rhs) {
    return negation(disjunction(negation(std::move(lhs)), negation(std::move(rhs))));
}

PropFormula::Kind PropFormula::kind() const { return node_->kind; }
const std::string& PropFormula::atom_name() const { return node_->name; }
PropFormula PropFormula::child() const { return PropFormula(node_->a); }
PropFormula PropFormula::left() const { return PropFormula(node_->a); }
PropFormula PropFormula::right() const { return PropFormula(node_->b); }

bool PropFormula::structurally_equal(const PropFormula& other) const {
    if (node_ == other.node_) return true;
    if (node_->kind != other.node_->kind) return false;
    switch (node_->kind) {
        case Kind::Atom: return node_->name == other.node_->name;
        case Kind::Not: return child().structurally_equal(other.child());
        case Kind::Or:
            return left().structurally_equal(other.left()) &&
                   right().structurally_equal(other.right());
    }
    return false;
}

std::string PropFormula::to_string() const {
    switch (node_->kind) {
        case Kind::Atom: return "\"" + node_->name + "\"";
        case Kind::Not: return "!" + child().to_string();
        case Kind::Or: return "(" + left().to_string() + " | " + right().to_string() + ")";
    }
    return "?";
}

std::vector<std::string> PropFormula::atoms() const {
    std::set<std::string> names;
    std::vector<const Node*> stack{node_.get()};
    while (!stack.empty()) {
        const Node* n = stack.back();
        stack.pop_back();
        if (n->kind == Kind::Atom) names.insert(n->name);
        if (n->a) stack.push_back(n->a.get());
        if (n->b) stack.push_back(n->b.get());
    }
    return {names.begin(), names.end()};
}

FormulaError::FormulaError(std::size_t offset_, const std::string& message, bool semantic_)
    : std::runtime_error("offset " + std::to_string(offset_) + ": " + message),
      offset(offset_),
      semantic(semantic_) {}

namespace {

struct Token {
    enum class Type {
        ProbOp,     // P
        Leq,        // <= or <
        Geq,        // >= or >
        LBracket,   // [
        RBracket,   // ]
        LParen,     // (
        RParen,     // )
        Not,        // !
        Or,         // |
        And,        // &
        Until,      // bare U
        Number,     // decimal literal
        Atom,       // bare identifier or quoted string
        End,
    };
    Type type;
    std::size_t offset;
    std::string text;   // Atom name / number literal
    double value = 0.0; // Number
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> tokens;
        while (true) {
            Token tok = next();
            tokens.push_back(tok);
            if (tok.type == Token::Type::End) break;
        }
        return tokens;
    }

private:
    Token next() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        std::size_t at = pos_;
        if (pos_ >= text_.size()) return {Token::Type::End, at, {}, 0.0};
        char c = text_[pos_];
        switch (c) {
            case '[': ++pos_; return {Token::Type::LBracket, at, {}, 0.0};
            case ']': ++pos_; return {Token::Type::RBracket, at, {}, 0.0};
            case '(': ++pos_; return {Token::Type::LParen, at, {}, 0.0};
            case ')': ++pos_; return {Token::Type::RParen, at, {}, 0.0};
            case '!': ++pos_; return {Token::Type::Not, at, {}, 0.0};
            case '|': ++pos_; return {Token::Type::Or, at, {}, 0.0};
            case '&': ++pos_; return {Token::Type::And, at, {}, 0.0};
            case '<':
                ++pos_;
                if (pos_ < text_.size() && text_[pos_] == '=') ++pos_;
                return {Token::Type::Leq, at, {}, 0.0};
            case '>':
                ++pos_;
                if (pos_ < text_.size() && text_[pos_] == '=') ++pos_;
                return {Token::Type::Geq, at, {}, 0.0};
            case '"': return quoted(at);
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(at);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier(at);
        throw FormulaError(at, std::string("unexpected character '") + c + "'");
    }

    Token quoted(std::size_t at) {
        ++pos_;  // opening quote
        std::string name;
        while (pos_ < text_.size() && text_[pos_] != '"') name.push_back(text_[pos_++]);
        if (pos_ >= text_.size()) throw FormulaError(at, "unterminated quoted atom");
        ++pos_;  // closing quote
        if (name.empty()) throw FormulaError(at, "empty quoted atom");
        return {Token::Type::Atom, at, std::move(name), 0.0};
    }

    Token number(std::size_t at) {
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
                text_[end] == 'e' || text_[end] == 'E' ||
                ((text_[end] == '+' || text_[end] == '-') && end > pos_ &&
                 (text_[end - 1] == 'e' || text_[end - 1] == 'E'))))
            ++end;
        std::string lit(text_.substr(pos_, end - pos_));
        char* stop = nullptr;
        double v = std::strtod(lit.c_str(), &stop);
        if (stop != lit.c_str() + lit.size())
            throw FormulaError(at, "malformed number '" + lit + "'");
        pos_ = end;
        return {Token::Type::Number, at, std::move(lit), v};
    }

    Token identifier(std::size_t at) {
        std::size_t end = pos_;
        while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                                      text_[end] == '_'))
            ++end;
        std::string name(text_.substr(pos_, end - pos_));
        pos_ = end;
        if (name == "P") return {Token::Type::ProbOp, at, {}, 0.0};
        if (name == "U") return {Token::Type::Until, at, {}, 0.0};
        return {Token::Type::Atom, at, std::move(name), 0.0};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    UntilRequirement parse() {
        expect(Token::Type::ProbOp, "expected 'P'");
        Comparison cmp;
        if (accept(Token::Type::Leq))
            cmp = Comparison::Leq;
        else if (accept(Token::Type::Geq))
            cmp = Comparison::Geq;
        else
            throw FormulaError(peek().offset, "expected a comparison operator after 'P'");
        Token bound = expect(Token::Type::Number, "expected a probability bound");
        if (!(bound.value > 0.0) || !(bound.value < 1.0))
            throw FormulaError(bound.offset, "bound must be in (0,1)", true);
        expect(Token::Type::LBracket, "expected '['");
        PropFormula phi = prop_or();
        expect(Token::Type::Until, "expected 'U'");
        if (!accept(Token::Type::Leq))
            throw FormulaError(peek().offset, "expected '<=' after 'U' (only upper time bounds)");
        Token tb = expect(Token::Type::Number, "expected a time bound");
        if (!(tb.value > 0.0))
            throw FormulaError(tb.offset, "time bound must be > 0", true);
        PropFormula psi = prop_or();
        if (peek().type == Token::Type::Until)
            throw FormulaError(peek().offset, "multiple Until operators are not supported", true);
        expect(Token::Type::RBracket, "expected ']'");
        if (peek().type != Token::Type::End)
            throw FormulaError(peek().offset, "trailing input after the requirement");
        return UntilRequirement{cmp, bound.value, std::move(phi), std::move(psi), tb.value};
    }

private:
    PropFormula prop_or() {
        PropFormula f = prop_and();
        while (accept(Token::Type::Or)) f = PropFormula::disjunction(std::move(f), prop_and());
        return f;
    }

    PropFormula prop_and() {
        PropFormula f = prop_unary();
        while (accept(Token::Type::And)) f = PropFormula::conjunction(std::move(f), prop_unary());
        return f;
    }

    PropFormula prop_unary() {
        if (accept(Token::Type::Not)) return PropFormula::negation(prop_unary());
        return prop_primary();
    }

    PropFormula prop_primary() {
        const Token& tok = peek();
        switch (tok.type) {
            case Token::Type::Atom: {
                std::string name = tok.text;
                ++pos_;
                return PropFormula::atom(std::move(name));
            }
            case Token::Type::LParen: {
                ++pos_;
                PropFormula f = prop_or();
                expect(Token::Type::RParen, "expected ')'");
                return f;
            }
            case Token::Type::ProbOp:
                throw FormulaError(tok.offset, "nested probability operators are not supported",
                                   true);
            case Token::Type::Until:
                throw FormulaError(tok.offset, "nested Until operators are not supported", true);
            default:
                throw FormulaError(tok.offset, "expected an atom, '!' or '('");
        }
    }

    const Token& peek() const { return tokens_[pos_]; }

    bool accept(Token::Type type) {
        if (tokens_[pos_].type == type) {
            ++pos_;
            return true;
        }
        return false;
    }

    Token expect(Token::Type type, const char* message) {
        if (tokens_[pos_].type != type) throw FormulaError(tokens_[pos_].offset, message);
        return tokens_[pos_++];
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// shortest decimal form that parses back to exactly the same double
std::string format_number(double v) {
    char buf[48];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

UntilRequirement parse_formula(std::string_view text) {
    return Parser(Lexer(text).run()).parse();
}

std::string to_string(const UntilRequirement& req) {
    std::string out = "P";
    out += (req.comparison == Comparison::Leq) ? "<=" : ">=";
    out += format_number(req.bound_b);
    out += " [ " + req.phi.to_string() + " U<=" + format_number(req.time_bound_t) + " " +
           req.psi.to_string() + " ]";
    return out;
}

bool structurally_equal(const UntilRequirement& a, const UntilRequirement& b) {
    return a.comparison == b.comparison && a.bound_b == b.bound_b &&
           a.time_bound_t == b.time_bound_t && a.phi.structurally_equal(b.phi) &&
           a.psi.structurally_equal(b.psi);
}

StateSet eval_prop(const Smc& smc, const PropFormula& f) {
    const std::size_t n = smc.num_states;
    switch (f.kind()) {
        case PropFormula::Kind::Atom: {
            StateSet out(n, false);
            for (StateIndex s = 0; s < n; ++s) out[s] = smc.has_label(s, f.atom_name());
            return out;
        }
        case PropFormula::Kind::Not: {
            StateSet out = eval_prop(smc, f.child());
            out.flip();
            return out;
        }
        case PropFormula::Kind::Or: {
            StateSet out = eval_prop(smc, f.left());
            StateSet rhs = eval_prop(smc, f.right());
            for (std::size_t s = 0; s < n; ++s) out[s] = out[s] || rhs[s];
            return out;
        }
    }
    return StateSet(n, false);
}

std::vector<std::string> unknown_atoms(const Smc& smc, const PropFormula& f) {
    std::set<std::string> known;
    for (const auto& label_set : smc.labels) known.insert(label_set.begin(), label_set.end());
    std::vector<std::string> missing;
    for (const std::string& name : f.atoms())
        if (!known.count(name)) missing.push_back(name);
    return missing;
}

CheckOutcome check(const Smc& smc, const UntilRequirement& req, double delta) {
    StateSet phi = eval_prop(smc, req.phi);
    StateSet psi = eval_prop(smc, req.psi);
    CheckOutcome outcome;
    outcome.prob = timed_until_prob(smc, phi, psi, req.time_bound_t, delta);
    outcome.sat.assign(smc.num_states, false);
    for (StateIndex s = 0; s < smc.num_states; ++s)
        outcome.sat[s] = (req.comparison == Comparison::Leq) ? outcome.prob[s] <= req.bound_b
                                                             : outcome.prob[s] >= req.bound_b;
    return outcome;
}

}  // namespace smcrepair
