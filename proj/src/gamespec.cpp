#include "powergame/gamespec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace pg {

std::string Diagnostic::to_string() const {
    std::ostringstream os;
    if (line > 0) os << line << ":" << column << ": ";
    os << message;
    if (!token.empty()) os << " [" << token << "]";
    return os.str();
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0) return "0";  // folds -0
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::optional<double> parse_double(std::string_view s) {
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || std::isnan(v)) return std::nullopt;
    return v;
}

bool valid_name(std::string_view s) {
    if (s.empty() || s == "->") return false;
    for (unsigned char c : s)
        if (c <= 32 || c >= 127 || c == '#' || c == '=' || c == ',') return false;
    return true;
}

namespace {

struct Tok {
    std::string_view text;
    int col = 0;
};

struct Loc {
    int line = 0;
    int col = 0;
};

std::vector<Tok> split(std::string_view line) {
    std::vector<Tok> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size() || line[i] == '#') break;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
        i = j;
    }
    return out;
}

// one parsed line of a positional section
struct Rec {
    int line = 0;
    std::vector<Tok> toks;
};

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ParseResult run() {
        scan();
        ParseResult res;
        if (diags_.empty()) build();
        if (diags_.empty()) {
            res.doc = std::move(doc_);
        }
        res.diagnostics = std::move(diags_);
        return res;
    }

private:
    std::string_view text_;
    std::vector<Diagnostic> diags_;
    GameSpecDocument doc_;

    std::map<std::string, std::pair<std::string, Loc>> top_, power_;
    std::vector<Rec> humans_, states_, commitments_, actions_, transitions_, goals_, behavior_, xover_, geometry_;
    bool saw_version_ = false;

    void err(int line, int col, std::string msg, std::string_view tok = {}) {
        if (diags_.size() >= 200) return;  // enough to act on
        diags_.push_back({line, col, std::move(msg), std::string(tok)});
    }
    void err(int line, const Tok& t, std::string msg) { err(line, t.col, std::move(msg), t.text); }

    void scan() {
        static const std::set<std::string_view> sections{"power", "humans", "states", "commitments", "actions",
                                                          "transitions", "goals", "behavior", "x_override", "geometry"};
        std::string section;
        std::set<std::string> seen_sections;
        int lineno = 0;
        std::size_t pos = 0;
        while (pos <= text_.size()) {
            std::size_t nl = text_.find('\n', pos);
            std::string_view line = text_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            ++lineno;
            pos = nl == std::string_view::npos ? text_.size() + 1 : nl + 1;
            auto toks = split(line);
            if (toks.empty()) continue;
            for (unsigned char c : line)
                if (c == 0 || c >= 127) {
                    err(lineno, 1, "non-ASCII or NUL byte");
                    toks.clear();
                    break;
                }
            if (toks.empty()) continue;
            std::string_view first = toks[0].text;
            if (first.front() == '[') {
                if (toks.size() != 1 || first.size() < 3 || first.back() != ']') {
                    err(lineno, toks[0], "malformed section header");
                    continue;
                }
                std::string name(first.substr(1, first.size() - 2));
                if (!sections.count(name)) {
                    err(lineno, toks[0], "unknown section");
                    section = "?";
                    continue;
                }
                if (!seen_sections.insert(name).second) err(lineno, toks[0], "section repeated");
                section = name;
                continue;
            }
            if (section == "?") continue;
            if (section.empty() || section == "power") {
                key_value(lineno, line, section.empty() ? top_ : power_);
                continue;
            }
            Rec r{lineno, std::move(toks)};
            if (section == "humans") humans_.push_back(std::move(r));
            else if (section == "states") states_.push_back(std::move(r));
            else if (section == "commitments") commitments_.push_back(std::move(r));
            else if (section == "actions") actions_.push_back(std::move(r));
            else if (section == "transitions") transitions_.push_back(std::move(r));
            else if (section == "goals") goals_.push_back(std::move(r));
            else if (section == "behavior") behavior_.push_back(std::move(r));
            else if (section == "x_override") xover_.push_back(std::move(r));
            else if (section == "geometry") geometry_.push_back(std::move(r));
        }
    }

    void key_value(int lineno, std::string_view line, std::map<std::string, std::pair<std::string, Loc>>& into) {
        std::size_t eq = line.find('=');
        std::size_t hash = line.find('#');
        if (hash != std::string_view::npos && (eq == std::string_view::npos || hash < eq)) eq = std::string_view::npos;
        auto trim = [](std::string_view s, std::size_t& off) {
            std::size_t a = 0;
            while (a < s.size() && (s[a] == ' ' || s[a] == '\t')) ++a;
            std::size_t b = s.size();
            while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
            off = a;
            return s.substr(a, b - a);
        };
        if (eq == std::string_view::npos) {
            auto t = split(line);
            err(lineno, t.empty() ? 1 : t[0].col, "expected key = value", t.empty() ? std::string_view{} : t[0].text);
            return;
        }
        std::size_t koff = 0, voff = 0;
        std::string_view key = trim(line.substr(0, eq), koff);
        std::string_view rest = line.substr(eq + 1);
        std::size_t h2 = rest.find('#');
        if (h2 != std::string_view::npos) rest = rest.substr(0, h2);
        std::string_view val = trim(rest, voff);
        Loc loc{lineno, static_cast<int>(eq + 2 + voff)};
        if (key.empty()) {
            err(lineno, 1, "missing key");
            return;
        }
        if (into.count(std::string(key))) {
            err(lineno, static_cast<int>(koff) + 1, "duplicate key", key);
            return;
        }
        into[std::string(key)] = {std::string(val), loc};
        (void)saw_version_;
    }

    // ---------------------------------------------------------------- resolution helpers

    std::map<std::string, int, std::less<>> state_id_, human_id_;
    std::vector<Loc> state_loc_, human_loc_;
    std::vector<std::map<std::string, int, std::less<>>> goal_id_;
    std::vector<std::vector<Loc>> goal_loc_;
    std::map<std::pair<int, std::size_t>, Loc> row_loc_;

    std::optional<double> number(int line, const Tok& t) {
        auto v = parse_double(t.text);
        if (!v) err(line, t, "expected a number");
        return v;
    }

    std::optional<double> number_text(const std::string& s, Loc loc) {
        auto v = parse_double(s);
        if (!v) err(loc.line, loc.col, "expected a number", s);
        return v;
    }

    int state_of(int line, const Tok& t) {
        auto it = state_id_.find(t.text);
        if (it == state_id_.end()) {
            err(line, t, "unknown state");
            return -1;
        }
        return it->second;
    }

    int human_of(int line, const Tok& t) {
        auto it = human_id_.find(t.text);
        if (it == human_id_.end()) {
            err(line, t, "unknown human");
            return -1;
        }
        return it->second;
    }

    int goal_of(int line, int h, const Tok& t) {
        auto it = goal_id_[h].find(t.text);
        if (it == goal_id_[h].end()) {
            err(line, t, "unknown goal");
            return -1;
        }
        return it->second;
    }

    static int index_in(const std::vector<std::string>& names, std::string_view n) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == n) return static_cast<int>(i);
        return -1;
    }

    std::optional<std::vector<double>> number_list(int line, const Tok& t, std::string_view body) {
        std::vector<double> out;
        std::size_t i = 0;
        while (i <= body.size()) {
            std::size_t j = body.find(',', i);
            if (j == std::string_view::npos) j = body.size();
            auto v = parse_double(body.substr(i, j - i));
            if (!v) {
                err(line, t, "expected a comma-separated number list");
                return std::nullopt;
            }
            out.push_back(*v);
            i = j + 1;
        }
        return out;
    }

    bool name_ok(int line, const Tok& t) {
        if (!valid_name(t.text)) {
            err(line, t, "invalid name");
            return false;
        }
        return true;
    }

    // ---------------------------------------------------------------- build

    void build() {
        Game& g = doc_.game;
        // header
        static const std::set<std::string> top_keys{"version", "name", "gamma_r", "absorption", "goal_resample_period"};
        for (auto& [k, v] : top_)
            if (!top_keys.count(k)) err(v.second.line, 1, "unknown key", k);
        auto ver = top_.find("version");
        if (ver == top_.end()) {
            err(1, 1, "missing version");
        } else if (ver->second.first != std::to_string(kGamespecVersion)) {
            err(ver->second.second.line, ver->second.second.col, "unsupported version", ver->second.first);
        }
        std::string name = "game";
        if (auto it = top_.find("name"); it != top_.end()) {
            name = it->second.first;
            if (!valid_name(name)) err(it->second.second.line, it->second.second.col, "invalid name", name);
        }
        GameBuilder b(name);
        double gamma_r = 0.99;
        if (auto it = top_.find("gamma_r"); it != top_.end())
            if (auto v = number_text(it->second.first, it->second.second)) gamma_r = *v;
        Absorption absorption = Absorption::terminal;
        if (auto it = top_.find("absorption"); it != top_.end()) {
            if (it->second.first == "terminal") absorption = Absorption::terminal;
            else if (it->second.first == "first_entry") absorption = Absorption::first_entry;
            else err(it->second.second.line, it->second.second.col, "absorption must be terminal or first_entry", it->second.first);
        }
        int period = 1;
        if (auto it = top_.find("goal_resample_period"); it != top_.end()) {
            auto v = number_text(it->second.first, it->second.second);
            if (v && (*v != std::floor(*v) || *v < 1 || *v > 1e9))
                err(it->second.second.line, it->second.second.col, "goal_resample_period must be a positive integer", it->second.first);
            else if (v) period = static_cast<int>(*v);
        }
        power();

        // humans
        for (auto& r : humans_) {
            auto& t = r.toks;
            if (t.size() != 2 || t[1].text.substr(0, 6) != "gamma=") {
                err(r.line, t[0], "expected: <human> gamma=<value>");
                continue;
            }
            if (!name_ok(r.line, t[0])) continue;
            auto v = parse_double(t[1].text.substr(6));
            if (!v) {
                err(r.line, t[1], "expected a number");
                continue;
            }
            if (human_id_.count(t[0].text)) {
                err(r.line, t[0], "duplicate human");
                continue;
            }
            human_id_[std::string(t[0].text)] = b.add_human(std::string(t[0].text), *v);
            human_loc_.push_back({r.line, t[0].col});
        }
        const int H = static_cast<int>(human_id_.size());
        // states
        for (auto& r : states_) {
            auto& t = r.toks;
            if (!name_ok(r.line, t[0])) continue;
            bool term = false, init = false, bad = false;
            for (std::size_t i = 1; i < t.size(); ++i) {
                if (t[i].text == "terminal" && !term) term = true;
                else if (t[i].text == "initial" && !init) init = true;
                else err(r.line, t[i], "expected 'initial' or 'terminal'"), bad = true;
            }
            if (bad) continue;
            if (state_id_.count(t[0].text)) {
                err(r.line, t[0], "duplicate state");
                continue;
            }
            if (state_id_.size() >= 1000000) {
                err(r.line, t[0], "too many states");
                return;
            }
            state_id_[std::string(t[0].text)] = b.add_state(std::string(t[0].text), term, init);
            state_loc_.push_back({r.line, t[0].col});
        }
        const int S = static_cast<int>(state_id_.size());
        if (!diags_.empty()) return;

        // actions
        std::vector<Loc> robot_loc(S), any_loc(S);
        std::vector<std::vector<char>> human_set(S, std::vector<char>(H, 0));
        for (auto& r : actions_) {
            auto& t = r.toks;
            if (t.size() < 2) {
                err(r.line, t[0], "expected: <state> robot <actions...> | <state> human <human> <actions...>");
                continue;
            }
            int s = state_of(r.line, t[0]);
            if (s < 0) continue;
            std::size_t first = 0;
            int h = -1;
            if (t[1].text == "robot") {
                first = 2;
            } else if (t[1].text == "human" && t.size() >= 3) {
                h = human_of(r.line, t[2]);
                if (h < 0) continue;
                first = 3;
            } else {
                err(r.line, t[1], "expected 'robot' or 'human <name>'");
                continue;
            }
            std::vector<std::string> names;
            bool bad = false;
            for (std::size_t i = first; i < t.size(); ++i) {
                if (!name_ok(r.line, t[i])) bad = true;
                else if (std::find(names.begin(), names.end(), t[i].text) != names.end()) err(r.line, t[i], "duplicate action"), bad = true;
                else names.emplace_back(t[i].text);
            }
            if (bad) continue;
            if (names.empty()) {
                err(r.line, t[1], "empty action list");
                continue;
            }
            auto& gm = b.game();
            if (h < 0) {
                if (!gm.robot_actions[s].empty()) {
                    err(r.line, t[0], "robot actions already given for this state");
                    continue;
                }
                b.set_robot_actions(s, std::move(names));
                robot_loc[s] = {r.line, t[0].col};
            } else {
                if (human_set[s][h]) {
                    err(r.line, t[0], "human actions already given for this state");
                    continue;
                }
                human_set[s][h] = 1;
                b.set_human_actions(s, h, std::move(names));
            }
            if (any_loc[s].line == 0) any_loc[s] = {r.line, t[0].col};
        }
        {
            // joint action spaces are allocated by the builder; cap them before that happens
            auto& gm = b.game();
            double total = 0;
            for (int s = 0; s < S; ++s) {
                if (!gm.terminal[s]) {
                    if (gm.robot_actions[s].empty())
                        err(state_loc_[s].line, state_loc_[s].col, "no robot actions for state", gm.state_names[s]);
                    for (int h = 0; h < H; ++h)
                        if (gm.human_actions[s][h].empty())
                            err(state_loc_[s].line, state_loc_[s].col, "no actions for human " + gm.human_names[h] + " in state",
                                gm.state_names[s]);
                }
                double n = std::max<std::size_t>(1, gm.robot_actions[s].size());
                for (int h = 0; h < H; ++h) n *= std::max<std::size_t>(1, gm.human_actions[s][h].size());
                if (n > 1e6) {
                    Loc l = any_loc[s].line ? any_loc[s] : state_loc_[s];
                    err(l.line, l.col, "joint action space exceeds 1e6", gm.state_names[s]);
                }
                total += n;
            }
            if (total > 1e7) err(0, 0, "total joint action count exceeds 1e7");
        }
        if (!diags_.empty()) return;

        // transitions
        std::set<std::pair<int, std::size_t>> given;
        for (auto& r : transitions_) {
            auto& t = r.toks;
            int s = state_of(r.line, t[0]);
            if (s < 0) continue;
            auto& gm = b.game();
            std::size_t arrow = 1 + 1 + H;
            if (t.size() < arrow + 1 || t[arrow].text != "->") {
                err(r.line, t[0], "expected: <state> <robot action> <human actions...> -> <next> <prob> ...");
                continue;
            }
            int ar = index_in(gm.robot_actions[s], t[1].text);
            if (ar < 0) {
                err(r.line, t[1], "unknown robot action for this state");
                continue;
            }
            std::vector<int> ah(H);
            bool bad = false;
            for (int h = 0; h < H && !bad; ++h) {
                ah[h] = index_in(gm.human_actions[s][h], t[2 + h].text);
                if (gm.human_actions[s][h].empty() && gm.terminal[s] && t[2 + h].text == "pass") ah[h] = 0;
                if (ah[h] < 0) err(r.line, t[2 + h], "unknown action of " + gm.human_names[h] + " for this state"), bad = true;
            }
            if (bad) continue;
            if ((t.size() - arrow - 1) % 2 != 0) {
                err(r.line, t.back(), "successors come in <state> <probability> pairs");
                continue;
            }
            std::vector<Transition> row;
            std::set<int> nexts;
            for (std::size_t i = arrow + 1; i + 1 < t.size(); i += 2) {
                int n = state_of(r.line, t[i]);
                auto p = number(r.line, t[i + 1]);
                if (n < 0 || !p) {
                    bad = true;
                    continue;
                }
                if (!(*p >= 0 && *p <= 1)) {
                    err(r.line, t[i + 1], "probability outside [0,1]");
                    bad = true;
                    continue;
                }
                if (!nexts.insert(n).second) {
                    err(r.line, t[i], "successor listed twice");
                    bad = true;
                    continue;
                }
                row.push_back({n, *p});
            }
            if (bad) continue;
            // terminal rows default to the implicit single "pass" per agent
            std::size_t nr = std::max<std::size_t>(1, gm.robot_actions[s].size());
            std::size_t P = 1;
            for (int h = 0; h < H; ++h) P *= std::max<std::size_t>(1, gm.human_actions[s][h].size());
            std::size_t joint = ar * P;
            {
                std::size_t idx = 0;
                for (int h = 0; h < H; ++h) idx = idx * std::max<std::size_t>(1, gm.human_actions[s][h].size()) + ah[h];
                joint += idx;
            }
            (void)nr;
            if (!given.insert({s, joint}).second) {
                err(r.line, t[0], "transition row given twice");
                continue;
            }
            row_loc_[{s, joint}] = {r.line, t[0].col};
            b.set_transition(s, ar, ah, std::move(row));
        }
        {
            auto& gm = b.game();
            for (int s = 0; s < S; ++s) {
                if (gm.terminal[s]) continue;
                std::size_t n = gm.robot_actions[s].size();
                for (int h = 0; h < H; ++h) n *= gm.human_actions[s][h].size();
                std::size_t have = 0;
                for (auto it = given.lower_bound({s, 0}); it != given.end() && it->first == s; ++it) ++have;
                if (have != n) {
                    Loc l = any_loc[s].line ? any_loc[s] : state_loc_[s];
                    err(l.line, l.col, "missing transition rows (" + std::to_string(have) + " of " + std::to_string(n) + ")",
                        gm.state_names[s]);
                }
            }
        }

        // goals
        goal_id_.assign(H, {});
        goal_loc_.assign(H, {});
        for (auto& r : goals_) {
            auto& t = r.toks;
            if (t.size() < 2) {
                err(r.line, t[0], "expected: <human> <goal> <states...>");
                continue;
            }
            int h = human_of(r.line, t[0]);
            if (h < 0 || !name_ok(r.line, t[1])) continue;
            if (goal_id_[h].count(t[1].text)) {
                err(r.line, t[1], "duplicate goal");
                continue;
            }
            std::vector<int> members;
            bool bad = false;
            for (std::size_t i = 2; i < t.size(); ++i) {
                int s = state_of(r.line, t[i]);
                if (s < 0) bad = true;
                else if (std::find(members.begin(), members.end(), s) != members.end()) err(r.line, t[i], "state listed twice"), bad = true;
                else members.push_back(s);
            }
            if (bad) continue;
            goal_id_[h][std::string(t[1].text)] = b.add_goal(h, std::string(t[1].text), std::move(members));
            goal_loc_[h].push_back({r.line, t[1].col});
        }

        // commitments
        for (auto& r : commitments_) {
            auto& t = r.toks;
            if (t.size() < 3) {
                err(r.line, t[0], "expected: <state> <base state> <actions...>");
                continue;
            }
            int s = state_of(r.line, t[0]);
            int base = state_of(r.line, t[1]);
            if (s < 0 || base < 0) continue;
            if (b.game().commitment[s]) {
                err(r.line, t[0], "commitment already given for this state");
                continue;
            }
            std::vector<std::string> acts;
            bool bad = false;
            for (std::size_t i = 2; i < t.size(); ++i)
                if (!name_ok(r.line, t[i])) bad = true;
                else acts.emplace_back(t[i].text);
            if (!bad) b.set_commitment(s, base, std::move(acts));
        }
        if (!diags_.empty()) return;

        // behavior
        std::set<int> default_seen;
        std::set<std::tuple<int, int, int>> beh_seen;
        for (auto& r : behavior_) {
            auto& t = r.toks;
            bool is_default = t[0].text == "default";
            std::size_t first = is_default ? 2 : 3;
            if (t.size() < first) {
                err(r.line, t[0], "expected: default <human> k=v... | <state> <human> <goal> k=v...");
                continue;
            }
            int s = -1, h = -1, k = -1;
            if (is_default) {
                h = human_of(r.line, t[1]);
                if (h < 0) continue;
                if (!default_seen.insert(h).second) {
                    err(r.line, t[1], "default behavior already given for this human");
                    continue;
                }
            } else {
                s = state_of(r.line, t[0]);
                h = human_of(r.line, t[1]);
                if (s < 0 || h < 0) continue;
                k = goal_of(r.line, h, t[2]);
                if (k < 0) continue;
                if (!beh_seen.insert({s, h, k}).second) {
                    err(r.line, t[0], "behavior already given for this state/human/goal");
                    continue;
                }
            }
            BehaviorParams p;
            bool bad = false;
            std::set<std::string> keys;
            for (std::size_t i = first; i < t.size(); ++i) {
                auto eq = t[i].text.find('=');
                if (eq == std::string_view::npos) {
                    err(r.line, t[i], "expected key=value");
                    bad = true;
                    continue;
                }
                std::string key(t[i].text.substr(0, eq));
                std::string_view val = t[i].text.substr(eq + 1);
                if (!keys.insert(key).second) {
                    err(r.line, t[i], "duplicate key");
                    bad = true;
                    continue;
                }
                if (key == "nu" || key == "beta") {
                    auto v = parse_double(val);
                    if (!v) {
                        err(r.line, t[i], "expected a number");
                        bad = true;
                        continue;
                    }
                    (key == "nu" ? p.nu : p.beta) = *v;
                } else if (key == "pi0" && !is_default) {
                    auto v = number_list(r.line, t[i], val);
                    if (!v) bad = true;
                    else p.pi0 = std::move(*v);
                } else if (key.rfind("mu.", 0) == 0 && !is_default) {
                    auto it = human_id_.find(key.substr(3));
                    if (it == human_id_.end()) {
                        err(r.line, t[i], "unknown human in mu key");
                        bad = true;
                        continue;
                    }
                    auto v = number_list(r.line, t[i], val);
                    if (!v) {
                        bad = true;
                        continue;
                    }
                    p.mu.resize(H);
                    p.mu[it->second] = std::move(*v);
                } else {
                    err(r.line, t[i], "unknown key");
                    bad = true;
                }
            }
            if (bad) continue;
            if (is_default) b.set_default_behavior(h, p);
            else b.behavior(s, h, k) = std::move(p);
        }

        // x override and geometry are attached after build()
        std::vector<double> xo;
        for (auto& r : xover_) {
            auto& t = r.toks;
            if (t.size() != 3) {
                err(r.line, t[0], "expected: <human> <state> <value>");
                continue;
            }
            int h = human_of(r.line, t[0]);
            int s = state_of(r.line, t[1]);
            auto v = number(r.line, t[2]);
            if (h < 0 || s < 0 || !v) continue;
            if (xo.empty()) xo.assign(static_cast<std::size_t>(H) * S, std::nan(""));
            double& cell = xo[static_cast<std::size_t>(h) * S + s];
            if (!std::isnan(cell)) {
                err(r.line, t[0], "x override already given for this human/state");
                continue;
            }
            cell = *v;
        }
        std::optional<Geometry> geo;
        std::vector<char> pos_seen, goal_seen;
        for (auto& r : geometry_) {
            auto& t = r.toks;
            if (t.size() != 5 || (t[0].text != "human" && t[0].text != "goal")) {
                err(r.line, t[0], "expected: human <state> <human> <x> <y> | goal <human> <goal> <x> <y>");
                continue;
            }
            auto x = number(r.line, t[3]);
            auto y = number(r.line, t[4]);
            if (!x || !y) continue;
            if (*x != std::floor(*x) || *y != std::floor(*y) || std::abs(*x) > 1e6 || std::abs(*y) > 1e6) {
                err(r.line, t[3], "coordinates must be integers");
                continue;
            }
            if (!geo) {
                geo.emplace();
                geo->human_pos.assign(static_cast<std::size_t>(S) * H, {});
                geo->goal_pos.assign(H, {});
                pos_seen.assign(static_cast<std::size_t>(S) * H, 0);
                for (int h = 0; h < H; ++h) geo->goal_pos[h].assign(goal_loc_[h].size(), {});
                for (int h = 0; h < H; ++h) goal_seen.resize(goal_seen.size() + goal_loc_[h].size(), 0);
            }
            Cell c{static_cast<int>(*x), static_cast<int>(*y)};
            if (t[0].text == "human") {
                int s = state_of(r.line, t[1]);
                int h = human_of(r.line, t[2]);
                if (s < 0 || h < 0) continue;
                std::size_t i = static_cast<std::size_t>(s) * H + h;
                if (pos_seen[i]++) err(r.line, t[0], "position already given");
                geo->human_pos[i] = c;
            } else {
                int h = human_of(r.line, t[1]);
                if (h < 0) continue;
                int k = goal_of(r.line, h, t[2]);
                if (k < 0) continue;
                std::size_t off = 0;
                for (int o = 0; o < h; ++o) off += goal_loc_[o].size();
                if (goal_seen[off + k]++) err(r.line, t[0], "position already given");
                geo->goal_pos[h][k] = c;
            }
        }
        if (geo) {
            bool full = std::all_of(pos_seen.begin(), pos_seen.end(), [](char c) { return c != 0; }) &&
                        std::all_of(goal_seen.begin(), goal_seen.end(), [](char c) { return c != 0; });
            if (!full) err(geometry_.front().line, 1, "geometry must give every human position and goal position");
        }
        if (!diags_.empty()) return;

        try {
            g = b.build();
        } catch (const Error& e) {
            err(0, 0, e.what());
            return;
        }
        g.gamma_r = gamma_r;
        g.absorption = absorption;
        g.goal_resample_period = period;
        g.x_override = std::move(xo);
        g.geometry = std::move(geo);
        validate();
    }

    void power() {
        static const std::set<std::string> keys{"zeta", "xi", "eta", "beta_r", "eps_x", "eps_q", "horizon", "form", "permissive"};
        PowerParams& p = doc_.power;
        for (auto& [k, v] : power_) {
            const auto& [val, loc] = v;
            if (!keys.count(k)) {
                err(loc.line, 1, "unknown key", k);
                continue;
            }
            if (k == "form") {
                if (val == "power_law") p.form = RobotPolicyForm::power_law;
                else if (val == "normalized_softmax") p.form = RobotPolicyForm::normalized_softmax;
                else err(loc.line, loc.col, "form must be power_law or normalized_softmax", val);
            } else if (k == "permissive") {
                if (val == "true") p.permissive = true;
                else if (val == "false") p.permissive = false;
                else err(loc.line, loc.col, "expected true or false", val);
            } else if (k == "horizon") {
                if (val == "none") {
                    p.horizon.reset();
                    continue;
                }
                auto x = number_text(val, loc);
                if (x && (*x != std::floor(*x) || *x < 0 || *x > 1e9)) err(loc.line, loc.col, "horizon must be a nonnegative integer or none", val);
                else if (x) p.horizon = static_cast<int>(*x);
            } else {
                auto x = number_text(val, loc);
                if (!x) continue;
                if (k == "zeta") p.zeta = *x;
                else if (k == "xi") p.xi = *x;
                else if (k == "eta") p.eta = *x;
                else if (k == "beta_r") p.beta_r = *x;
                else if (k == "eps_x") p.eps_x = *x;
                else if (k == "eps_q") p.eps_q = *x;
            }
        }
        if (diags_.empty()) {
            try {
                check_params(p);
            } catch (const Error& e) {
                Loc l = power_.empty() ? Loc{0, 0} : power_.begin()->second.second;
                err(l.line, 1, std::string("power parameters: ") + e.what());
            }
        }
    }

    void validate() {
        const Game& g = doc_.game;
        auto rep = validate_game(g);
        for (auto& i : rep.issues) {
            Loc l;
            if (i.goal >= 0 && i.human >= 0 && i.human < static_cast<int>(goal_loc_.size()) &&
                i.goal < static_cast<int>(goal_loc_[i.human].size()))
                l = goal_loc_[i.human][i.goal];
            else if (i.state >= 0 && row_loc_.count({i.state, i.joint}) &&
                     (i.kind == "row_not_normalized" || i.kind == "negative_probability" || i.kind == "terminal_transition"))
                l = row_loc_[{i.state, i.joint}];
            else if (i.state >= 0 && i.state < static_cast<int>(state_loc_.size()))
                l = state_loc_[i.state];
            else if (i.human >= 0 && i.human < static_cast<int>(human_loc_.size()))
                l = human_loc_[i.human];
            err(l.line, l.col, i.kind + ": " + i.message);
        }
    }
};

void put_list(std::ostringstream& os, const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_double(v[i]);
}

void need_name(const std::string& s) {
    if (!valid_name(s)) throw Error(ErrorKind::argument, "name not representable in gamespec: '" + s + "'");
}

// a mu vector of empty entries means the same as no mu at all
bool same_mu(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    static const std::vector<double> none;
    std::size_t n = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if ((i < a.size() ? a[i] : none) != (i < b.size() ? b[i] : none)) return false;
    return true;
}

bool has_mu(const BehaviorParams& b) {
    return std::any_of(b.mu.begin(), b.mu.end(), [](const auto& m) { return !m.empty(); });
}

bool same_behavior(const BehaviorParams& a, const BehaviorParams& b) {
    auto eq = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
    return eq(a.nu, b.nu) && eq(a.beta, b.beta) && a.pi0 == b.pi0 && same_mu(a.mu, b.mu);
}

}  // namespace

ParseResult parse_gamespec(std::string_view text) { return Parser(text).run(); }

GameSpecDocument parse_gamespec_or_throw(std::string_view text) {
    auto r = parse_gamespec(text);
    if (r.ok()) return std::move(*r.doc);
    std::string msg;
    for (auto& d : r.diagnostics) msg += (msg.empty() ? "" : "\n") + d.to_string();
    throw Error(ErrorKind::parse, msg);
}

std::string serialize_game(const Game& game, const PowerParams& power) {
    const int S = game.num_states(), H = game.num_humans();
    std::ostringstream os;
    need_name(game.name);
    os << "version = " << kGamespecVersion << "\n";
    os << "name = " << game.name << "\n";
    os << "gamma_r = " << format_double(game.gamma_r) << "\n";
    os << "absorption = " << (game.absorption == Absorption::terminal ? "terminal" : "first_entry") << "\n";
    os << "goal_resample_period = " << game.goal_resample_period << "\n";

    os << "\n[power]\n";
    os << "beta_r = " << format_double(power.beta_r) << "\n";
    os << "eps_q = " << format_double(power.eps_q) << "\n";
    os << "eps_x = " << format_double(power.eps_x) << "\n";
    os << "eta = " << format_double(power.eta) << "\n";
    os << "form = " << (power.form == RobotPolicyForm::power_law ? "power_law" : "normalized_softmax") << "\n";
    os << "horizon = " << (power.horizon ? std::to_string(*power.horizon) : std::string("none")) << "\n";
    os << "permissive = " << (power.permissive ? "true" : "false") << "\n";
    os << "xi = " << format_double(power.xi) << "\n";
    os << "zeta = " << format_double(power.zeta) << "\n";

    os << "\n[humans]\n";
    for (int h = 0; h < H; ++h) {
        need_name(game.human_names[h]);
        os << game.human_names[h] << " gamma=" << format_double(game.gamma_h[h]) << "\n";
    }

    std::vector<char> init(S, 0);
    for (int s : game.initial)
        if (s >= 0 && s < S) init[s] = 1;
    os << "\n[states]\n";
    for (int s = 0; s < S; ++s) {
        need_name(game.state_names[s]);
        os << game.state_names[s];
        if (init[s]) os << " initial";
        if (game.terminal[s]) os << " terminal";
        os << "\n";
    }

    bool any_commit = false;
    for (int s = 0; s < S; ++s) any_commit = any_commit || (s < static_cast<int>(game.commitment.size()) && game.commitment[s]);
    if (any_commit) {
        os << "\n[commitments]\n";
        for (int s = 0; s < S; ++s) {
            if (!game.commitment[s]) continue;
            const auto& c = *game.commitment[s];
            os << game.state_names[s] << " " << game.state_names.at(c.base_state);
            for (auto& a : c.actions) need_name(a), os << " " << a;
            os << "\n";
        }
    }

    os << "\n[actions]\n";
    for (int s = 0; s < S; ++s) {
        os << game.state_names[s] << " robot";
        for (auto& a : game.robot_actions[s]) need_name(a), os << " " << a;
        os << "\n";
        for (int h = 0; h < H; ++h) {
            os << game.state_names[s] << " human " << game.human_names[h];
            for (auto& a : game.human_actions[s][h]) need_name(a), os << " " << a;
            os << "\n";
        }
    }

    os << "\n[transitions]\n";
    std::vector<int> ah(H);
    for (int s = 0; s < S; ++s) {
        const std::size_t P = game.human_profiles(s);
        for (int ar = 0; ar < game.num_robot(s); ++ar)
            for (std::size_t p = 0; p < P; ++p) {
                game.decode_profile(s, p, ah.data());
                os << game.state_names[s] << " " << game.robot_actions[s][ar];
                for (int h = 0; h < H; ++h) os << " " << game.human_actions[s][h][ah[h]];
                os << " ->";
                for (auto& t : game.row(s, ar * P + p)) os << " " << game.state_names.at(t.next) << " " << format_double(t.prob);
                os << "\n";
            }
    }

    os << "\n[goals]\n";
    for (int h = 0; h < H; ++h)
        for (int k = 0; k < game.num_goals(h); ++k) {
            need_name(game.goals[h][k].name);
            os << game.human_names[h] << " " << game.goals[h][k].name;
            for (int m : game.goals[h][k].states) os << " " << game.state_names.at(m);
            os << "\n";
        }

    // per human, the most common plain (nu, beta) becomes the default line
    os << "\n[behavior]\n";
    std::vector<BehaviorParams> defaults(H);
    for (int h = 0; h < H; ++h) {
        std::vector<std::pair<BehaviorParams, long>> counts;
        for (int s = 0; s < S; ++s)
            for (int k = 0; k < game.num_goals(h); ++k) {
                const auto& b = game.behavior_at(s, h, k);
                if (!b.pi0.empty() || has_mu(b)) continue;
                auto it = std::find_if(counts.begin(), counts.end(), [&](auto& c) { return same_behavior(c.first, b); });
                if (it == counts.end()) counts.push_back({b, 1});
                else ++it->second;
            }
        long best = -1;
        for (auto& [b, n] : counts)
            if (n > best) best = n, defaults[h] = b;
        os << "default " << game.human_names[h] << " nu=" << format_double(defaults[h].nu)
           << " beta=" << format_double(defaults[h].beta) << "\n";
    }
    for (int s = 0; s < S; ++s)
        for (int h = 0; h < H; ++h)
            for (int k = 0; k < game.num_goals(h); ++k) {
                const auto& b = game.behavior_at(s, h, k);
                if (same_behavior(b, defaults[h])) continue;
                os << game.state_names[s] << " " << game.human_names[h] << " " << game.goals[h][k].name
                   << " nu=" << format_double(b.nu) << " beta=" << format_double(b.beta);
                if (!b.pi0.empty()) os << " pi0=", put_list(os, b.pi0);
                for (int o = 0; o < static_cast<int>(b.mu.size()); ++o)
                    if (!b.mu[o].empty()) os << " mu." << game.human_names.at(o) << "=", put_list(os, b.mu[o]);
                os << "\n";
            }

    if (!game.x_override.empty()) {
        os << "\n[x_override]\n";
        for (int h = 0; h < H; ++h)
            for (int s = 0; s < S; ++s)
                if (game.has_x_override(h, s))
                    os << game.human_names[h] << " " << game.state_names[s] << " " << format_double(game.x_override_at(h, s)) << "\n";
    }

    if (game.geometry) {
        const auto& geo = *game.geometry;
        os << "\n[geometry]\n";
        for (int s = 0; s < S; ++s)
            for (int h = 0; h < H; ++h) {
                const Cell& c = geo.human_pos.at(static_cast<std::size_t>(s) * H + h);
                os << "human " << game.state_names[s] << " " << game.human_names[h] << " " << c.x << " " << c.y << "\n";
            }
        for (int h = 0; h < H; ++h)
            for (int k = 0; k < game.num_goals(h); ++k) {
                const Cell& c = geo.goal_pos.at(h).at(k);
                os << "goal " << game.human_names[h] << " " << game.goals[h][k].name << " " << c.x << " " << c.y << "\n";
            }
    }
    return os.str();
}

std::string serialize_document(const GameSpecDocument& doc) { return serialize_game(doc.game, doc.power); }

bool game_equal(const Game& a, const Game& b, std::string* why) {
    auto fail = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    if (a.name != b.name) return fail("name");
    if (a.state_names != b.state_names) return fail("state names");
    if (a.terminal != b.terminal) return fail("terminal flags");
    auto ia = a.initial, ib = b.initial;
    std::sort(ia.begin(), ia.end());
    std::sort(ib.begin(), ib.end());
    if (ia != ib) return fail("initial states");
    if (a.human_names != b.human_names || a.gamma_h != b.gamma_h) return fail("humans");
    if (a.gamma_r != b.gamma_r) return fail("gamma_r");
    if (a.goal_resample_period != b.goal_resample_period || a.absorption != b.absorption) return fail("game options");
    if (a.robot_actions != b.robot_actions || a.human_actions != b.human_actions) return fail("action sets");
    if (a.joint_offset != b.joint_offset || a.row_ptr != b.row_ptr || a.trans.size() != b.trans.size()) return fail("kernel shape");
    for (std::size_t i = 0; i < a.trans.size(); ++i)
        if (a.trans[i].next != b.trans[i].next || a.trans[i].prob != b.trans[i].prob) return fail("kernel entry " + std::to_string(i));
    if (a.goals.size() != b.goals.size()) return fail("goal families");
    for (std::size_t h = 0; h < a.goals.size(); ++h) {
        if (a.goals[h].size() != b.goals[h].size()) return fail("goal count");
        for (std::size_t k = 0; k < a.goals[h].size(); ++k)
            if (a.goals[h][k].name != b.goals[h][k].name || a.goals[h][k].states != b.goals[h][k].states) return fail("goal " + a.goals[h][k].name);
    }
    if (a.behavior.size() != b.behavior.size()) return fail("behavior table size");
    for (std::size_t i = 0; i < a.behavior.size(); ++i)
        if (!same_behavior(a.behavior[i], b.behavior[i])) return fail("behavior entry " + std::to_string(i));
    std::size_t nc = std::max(a.commitment.size(), b.commitment.size());
    for (std::size_t s = 0; s < nc; ++s) {
        bool ha = s < a.commitment.size() && a.commitment[s], hb = s < b.commitment.size() && b.commitment[s];
        if (ha != hb) return fail("commitment presence");
        if (ha && (a.commitment[s]->base_state != b.commitment[s]->base_state || a.commitment[s]->actions != b.commitment[s]->actions))
            return fail("commitment of " + a.state_names[s]);
    }
    // empty and all-NaN override tables are the same thing
    auto xo_at = [](const Game& g, std::size_t i) { return g.x_override.empty() ? std::nan("") : g.x_override[i]; };
    std::size_t nx = static_cast<std::size_t>(a.num_humans()) * a.num_states();
    for (std::size_t i = 0; i < nx; ++i) {
        double x = xo_at(a, i), y = xo_at(b, i);
        if (!(x == y || (std::isnan(x) && std::isnan(y)))) return fail("x override");
    }
    if (a.geometry.has_value() != b.geometry.has_value()) return fail("geometry presence");
    if (a.geometry) {
        const auto &ga = *a.geometry, &gb = *b.geometry;
        if (ga.human_pos.size() != gb.human_pos.size() || ga.goal_pos.size() != gb.goal_pos.size()) return fail("geometry shape");
        for (std::size_t i = 0; i < ga.human_pos.size(); ++i)
            if (ga.human_pos[i].x != gb.human_pos[i].x || ga.human_pos[i].y != gb.human_pos[i].y) return fail("human position");
        for (std::size_t h = 0; h < ga.goal_pos.size(); ++h) {
            if (ga.goal_pos[h].size() != gb.goal_pos[h].size()) return fail("goal position shape");
            for (std::size_t k = 0; k < ga.goal_pos[h].size(); ++k)
                if (ga.goal_pos[h][k].x != gb.goal_pos[h][k].x || ga.goal_pos[h][k].y != gb.goal_pos[h][k].y) return fail("goal position");
        }
    }
    return true;
}

}  // namespace pg
