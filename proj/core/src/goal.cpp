#include "mpps/goal.hpp"

#include <cctype>
#include <charconv>

namespace mpps {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Splits "name(arg)rest" into name, arg and rest.
bool split_call(std::string_view s, std::string_view& name, std::string_view& arg,
                std::string_view& rest) {
    const auto open = s.find('(');
    const auto close = s.find(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        return false;
    }
    name = trim(s.substr(0, open));
    arg = trim(s.substr(open + 1, close - open - 1));
    rest = trim(s.substr(close + 1));
    return true;
}

GoalAtom parse_atom(std::string_view s, Domain& domain, bool first) {
    std::string_view name, arg, rest;
    if (!split_call(s, name, arg, rest)) {
        throw Error("parse-error", "malformed goal atom '" + std::string(s) + "'");
    }
    GoalAtom atom;
    Domain d;
    if (name == "inv") {
        d = Domain::Craft;
        const auto o = parse_object(arg);
        if (!o) throw Error("unknown-symbol", "unknown object '" + std::string(arg) + "'");
        if (rest.substr(0, 2) != ">=") {
            throw Error("parse-error", "expected '>=' after inv(" + std::string(arg) + ")");
        }
        const auto num = trim(rest.substr(2));
        int n = 0;
        const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), n);
        if (ec != std::errc{} || p != num.data() + num.size() || n < 1 || n > kCountCap) {
            throw Error("parse-error", "bad count in '" + std::string(s) + "'");
        }
        atom = {GoalAtom::Kind::Inventory, index_of(*o), n};
    } else if (name == "key") {
        d = Domain::Box;
        const auto c = parse_color(arg);
        if (!c) throw Error("unknown-symbol", "unknown colour '" + std::string(arg) + "'");
        if (!rest.empty()) throw Error("parse-error", "trailing text after key(...)");
        atom = {GoalAtom::Kind::Key, *c, 1};
    } else {
        throw Error("unknown-symbol", "unknown goal predicate '" + std::string(name) + "'");
    }
    if (!first && d != domain) throw Error("parse-error", "goal mixes craft and box atoms");
    domain = d;
    return atom;
}

}  // namespace

GoalSpec GoalSpec::parse(std::string_view text) {
    GoalSpec g;
    std::string_view rest = trim(text);
    if (rest.empty()) throw Error("parse-error", "empty goal");
    bool first = true;
    while (!rest.empty()) {
        const auto amp = rest.find('&');
        const auto part = trim(rest.substr(0, amp));
        g.atoms.push_back(parse_atom(part, g.domain, first));
        first = false;
        rest = amp == std::string_view::npos ? std::string_view{} : trim(rest.substr(amp + 1));
    }
    return g;
}

GoalSpec GoalSpec::get(Object o, int n) {
    return {Domain::Craft, {{GoalAtom::Kind::Inventory, index_of(o), n}}};
}

GoalSpec GoalSpec::key(int color) { return {Domain::Box, {{GoalAtom::Kind::Key, color, 1}}}; }

std::string GoalSpec::to_string() const {
    std::string out;
    for (const auto& a : atoms) {
        if (!out.empty()) out += " & ";
        if (a.kind == GoalAtom::Kind::Inventory) {
            out += "inv(" + std::string(name_of(static_cast<Object>(a.what))) +
                   ") >= " + std::to_string(a.at_least);
        } else {
            out += "key(" + std::string(color_name(a.what)) + ")";
        }
    }
    return out;
}

}  // namespace mpps
