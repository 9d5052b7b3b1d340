#include "condreach/parser.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace condreach {

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line(line) {}

namespace {

std::vector<std::string> tokenize(std::string_view line) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : line) {
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) tokens.push_back(std::move(current)), current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::size_t parse_index(const std::string& token, std::size_t line, const char* what) {
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(token, &pos);
        if (pos != token.size()) throw std::invalid_argument(token);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ParseError(line, std::string("malformed ") + what + ": " + token);
    }
}

}  // namespace

Mdp parse_model(std::string_view text) {
    Mdp m;
    bool sawType = false;
    bool sawStates = false;
    std::map<std::string, std::vector<std::size_t>> labelStates;
    std::set<std::pair<std::size_t, std::string>> seenActions;

    std::size_t lineNo = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++lineNo;

        auto tokens = tokenize(line);
        if (tokens.empty()) continue;

        if (tokens[0] == "@type") {
            if (tokens.size() != 2 || tokens[1] != "mdp") throw ParseError(lineNo, "expected '@type mdp'");
            sawType = true;
        } else if (tokens[0] == "@states") {
            if (tokens.size() != 2) throw ParseError(lineNo, "expected '@states <N>'");
            m.numStates = parse_index(tokens[1], lineNo, "state count");
            m.stateActions.assign(m.numStates, {});
            sawStates = true;
        } else if (tokens[0] == "@initial") {
            if (tokens.size() != 2) throw ParseError(lineNo, "expected '@initial <i>'");
            m.initialState = parse_index(tokens[1], lineNo, "initial state");
        } else if (tokens[0] == "@label") {
            if (tokens.size() < 2 || tokens[1].back() != ':')
                throw ParseError(lineNo, "expected '@label <name>: <i> ...'");
            std::string name = tokens[1].substr(0, tokens[1].size() - 1);
            if (name.empty()) throw ParseError(lineNo, "empty label name");
            auto& states = labelStates[name];
            for (std::size_t i = 2; i < tokens.size(); ++i) {
                states.push_back(parse_index(tokens[i], lineNo, "label state"));
            }
        } else if (tokens[0] == "@color") {
            if (tokens.size() != 3) throw ParseError(lineNo, "expected '@color <i> <colorId>'");
            std::size_t s = parse_index(tokens[1], lineNo, "state index");
            std::size_t c = parse_index(tokens[2], lineNo, "color id");
            m.colorAnnotations[s] = c;
        } else {
            // transition line: <state> <actionName> : <succ>=<prob> ...
            if (!sawStates) throw ParseError(lineNo, "transition before '@states'");
            if (tokens.size() < 4 || tokens[2] != ":")
                throw ParseError(lineNo, "expected '<state> <action> : <succ>=<prob> ...'");
            std::size_t s = parse_index(tokens[0], lineNo, "state index");
            if (s >= m.numStates) throw ParseError(lineNo, "state index out of range: " + tokens[0]);
            const std::string& actionName = tokens[1];
            if (!seenActions.insert({s, actionName}).second) {
                throw ParseError(lineNo, "duplicate action '" + actionName + "' at state " + tokens[0]);
            }

            Action action;
            action.name = actionName;
            Rational sum = 0;
            for (std::size_t i = 3; i < tokens.size(); ++i) {
                auto eq = tokens[i].find('=');
                if (eq == std::string::npos) throw ParseError(lineNo, "expected '<succ>=<prob>': " + tokens[i]);
                std::size_t succ = parse_index(tokens[i].substr(0, eq), lineNo, "successor index");
                if (succ >= m.numStates) throw ParseError(lineNo, "dangling successor index: " + tokens[i]);
                Rational prob;
                try {
                    prob = parse_rational(tokens[i].substr(eq + 1));
                } catch (const std::invalid_argument& e) {
                    throw ParseError(lineNo, e.what());
                }
                if (sgn(prob) <= 0 || prob > 1) throw ParseError(lineNo, "probability out of (0,1]: " + tokens[i]);
                auto it = std::find_if(action.successors.begin(), action.successors.end(),
                                       [&](const auto& p) { return p.first == succ; });
                if (it != action.successors.end()) throw ParseError(lineNo, "duplicate successor: " + tokens[i]);
                action.successors.emplace_back(succ, prob);
                sum += prob;
            }
            if (sum != 1) {
                throw ParseError(lineNo, "distribution sums to " + to_string(sum) + ", not 1");
            }
            std::sort(action.successors.begin(), action.successors.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            m.stateActions[s].push_back(std::move(action));
        }
    }

    if (!sawType) throw ParseError(1, "missing '@type mdp' header");
    if (!sawStates) throw ParseError(1, "missing '@states' declaration");
    for (const auto& [name, states] : labelStates) {
        StateSet set(m.numStates);
        for (std::size_t s : states) {
            if (s >= m.numStates) throw ParseError(1, "label '" + name + "' marks out-of-range state");
            set.insert(s);
        }
        m.labels.emplace(name, std::move(set));
    }
    validate(m);
    return m;
}

Mdp load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open model file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_model(buffer.str());
}

std::string serialize_model(const Mdp& m) {
    std::ostringstream out;
    out << "@type mdp\n";
    out << "@states " << m.numStates << "\n";
    out << "@initial " << m.initialState << "\n";
    for (const auto& [name, set] : m.labels) {
        out << "@label " << name << ":";
        for (std::size_t s : set.members()) out << " " << s;
        out << "\n";
    }
    for (const auto& [s, c] : m.colorAnnotations) {
        out << "@color " << s << " " << c << "\n";
    }
    for (std::size_t s = 0; s < m.numStates; ++s) {
        for (const auto& action : m.actions(s)) {
            out << s << " " << action.name << " :";
            for (const auto& [succ, prob] : action.successors) {
                out << " " << succ << "=" << to_string(prob);
            }
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace condreach
