#include "smcrepair/smc.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

namespace smcrepair {

namespace {

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

StateIndex parse_state(const std::string& tok, std::size_t line, const char* what) {
    for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ModelParseError(line, std::string(what) + " is not a non-negative integer: '" + tok + "'");
    }
    errno = 0;
    unsigned long v = std::strtoul(tok.c_str(), nullptr, 10);
    if (errno != 0 || v > 0xFFFFFFFFul)
        throw ModelParseError(line, std::string(what) + " out of representable range: '" + tok + "'");
    return static_cast<StateIndex>(v);
}

double parse_rate(const std::string& tok, std::size_t line) {
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
        throw ModelParseError(line, "malformed rate value: '" + tok + "'");
    if (!std::isfinite(v)) throw ModelParseError(line, "non-finite rate: '" + tok + "'");
    if (!(v > 0.0)) throw ModelParseError(line, "non-positive rate: '" + tok + "'");
    return v;
}

}  // namespace

ModelParseError::ModelParseError(std::size_t line_, const std::string& message)
    : std::runtime_error("line " + std::to_string(line_) + ": " + message), line(line_) {}

ValidationReport validate(const Smc& smc) {
    ValidationReport report;
    if (smc.num_states == 0) report.issues.push_back("state count must be positive");
    if (smc.labels.size() != smc.num_states)
        report.issues.push_back("labels vector size does not match state count");
    std::set<EdgeId> seen;
    for (const Transition& tr : smc.transitions) {
        if (tr.src >= smc.num_states || tr.dst >= smc.num_states) {
            report.issues.push_back("index out of range: (" + std::to_string(tr.src) + "," +
                                    std::to_string(tr.dst) + ")");
            continue;
        }
        if (!std::isfinite(tr.rate) || !(tr.rate > 0.0))
            report.issues.push_back("non-positive rate on (" + std::to_string(tr.src) + "," +
                                    std::to_string(tr.dst) + ")");
        if (!seen.insert({tr.src, tr.dst}).second)
            report.issues.push_back("duplicate transition (" + std::to_string(tr.src) + "," +
                                    std::to_string(tr.dst) + ")");
    }
    for (std::size_t s = 0; s < smc.labels.size(); ++s) {
        for (const std::string& ap : smc.labels[s]) {
            if (!is_identifier(ap))
                report.issues.push_back("invalid proposition name '" + ap + "' on state " +
                                        std::to_string(s));
        }
    }
    return report;
}

SparseRows compile_rows(const Smc& smc) {
    SparseRows rows;
    rows.edges = smc.transitions;
    std::sort(rows.edges.begin(), rows.edges.end(), [](const Transition& a, const Transition& b) {
        return std::make_pair(a.src, a.dst) < std::make_pair(b.src, b.dst);
    });
    rows.offset.assign(smc.num_states + 1, 0);
    rows.exit_rate.assign(smc.num_states, 0.0);
    for (const Transition& tr : rows.edges) {
        rows.offset[tr.src + 1]++;
        rows.exit_rate[tr.src] += tr.rate;
    }
    for (std::size_t s = 0; s < smc.num_states; ++s) rows.offset[s + 1] += rows.offset[s];
    return rows;
}

Smc read_model(std::istream& in, bool merge_duplicates) {
    enum class Section { Header, Transitions, Labels };
    Section section = Section::Header;
    Smc smc;
    std::map<EdgeId, std::size_t> edge_index;
    std::string raw;
    std::size_t lineno = 0;
    bool saw_labels = false;

    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        if (section == Section::Header) {
            auto toks = split_ws(line);
            if (toks.size() != 2 || toks[0] != "states")
                throw ModelParseError(lineno, "expected 'states <N>', got '" + line + "'");
            StateIndex n = parse_state(toks[1], lineno, "state count");
            if (n == 0) throw ModelParseError(lineno, "state count must be positive");
            smc.num_states = n;
            smc.labels.assign(n, {});
            section = Section::Transitions;
            continue;
        }

        if (section == Section::Transitions) {
            if (line == "labels") {
                section = Section::Labels;
                saw_labels = true;
                continue;
            }
            auto toks = split_ws(line);
            if (toks.size() != 3)
                throw ModelParseError(lineno, "malformed transition line (want '<src> <dst> <rate>'): '" +
                                                  line + "'");
            StateIndex src = parse_state(toks[0], lineno, "source state");
            StateIndex dst = parse_state(toks[1], lineno, "destination state");
            if (src >= smc.num_states || dst >= smc.num_states)
                throw ModelParseError(lineno, "state index out of range (states " +
                                                  std::to_string(smc.num_states) + "): '" + line + "'");
            double rate = parse_rate(toks[2], lineno);
            auto it = edge_index.find({src, dst});
            if (it != edge_index.end()) {
                if (!merge_duplicates)
                    throw ModelParseError(lineno, "duplicate transition (" + toks[0] + "," + toks[1] +
                                                      "); pass --merge-duplicates to sum rates");
                smc.transitions[it->second].rate += rate;
            } else {
                edge_index[{src, dst}] = smc.transitions.size();
                smc.transitions.push_back({src, dst, rate});
            }
            continue;
        }

        // Labels section: "<state>: <prop> [<prop> ...]"
        std::size_t colon = line.find(':');
        if (colon == std::string::npos)
            throw ModelParseError(lineno, "malformed label line (want '<state>: <prop> ...'): '" + line + "'");
        StateIndex s = parse_state(trim(line.substr(0, colon)), lineno, "label state");
        if (s >= smc.num_states)
            throw ModelParseError(lineno, "label state index out of range: " + std::to_string(s));
        auto props = split_ws(line.substr(colon + 1));
        if (props.empty())
            throw ModelParseError(lineno, "expected at least one proposition after '" +
                                              std::to_string(s) + ":'");
        for (const std::string& p : props) {
            if (!is_identifier(p))
                throw ModelParseError(lineno, "invalid proposition name '" + p +
                                                  "' (want [A-Za-z_][A-Za-z0-9_]*)");
            smc.labels[s].insert(p);
        }
    }

    if (section == Section::Header) throw ModelParseError(lineno, "empty model: missing 'states <N>'");
    if (!saw_labels) throw ModelParseError(lineno, "missing 'labels' section");
    return smc;
}

Smc read_model_file(const std::string& path, bool merge_duplicates) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    return read_model(in, merge_duplicates);
}

void write_model(std::ostream& out, const Smc& smc) {
    out << "states " << smc.num_states << "\n";
    std::vector<Transition> sorted = smc.transitions;
    std::sort(sorted.begin(), sorted.end(), [](const Transition& a, const Transition& b) {
        return std::make_pair(a.src, a.dst) < std::make_pair(b.src, b.dst);
    });
    char buf[64];
    for (const Transition& tr : sorted) {
        auto res = std::to_chars(buf, buf + sizeof(buf), tr.rate);  // shortest exact form
        out << tr.src << " " << tr.dst << " " << std::string_view(buf, res.ptr - buf) << "\n";
    }
    out << "labels\n";
    for (std::size_t s = 0; s < smc.num_states; ++s) {
        if (smc.labels[s].empty()) continue;
        out << s << ":";
        for (const std::string& ap : smc.labels[s]) out << " " << ap;
        out << "\n";
    }
}

void write_model_file(const std::string& path, const Smc& smc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    write_model(out, smc);
}

}  // namespace smcrepair
