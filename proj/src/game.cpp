#include "powergame/game.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <set>
#include <sstream>

namespace pg {

const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::usage: return "usage";
        case ErrorKind::parse: return "parse";
        case ErrorKind::validation: return "validation";
        case ErrorKind::convergence: return "convergence";
        case ErrorKind::mismatch: return "mismatch";
        case ErrorKind::argument: return "argument";
    }
    return "error";
}

std::size_t Game::profile_index(int s, const int* ah) const {
    std::size_t idx = 0;
    for (int h = 0; h < num_humans(); ++h) idx = idx * human_actions[s][h].size() + ah[h];
    return idx;
}

void Game::decode_profile(int s, std::size_t profile, int* ah) const {
    for (int h = num_humans() - 1; h >= 0; --h) {
        std::size_t n = human_actions[s][h].size();
        ah[h] = static_cast<int>(profile % n);
        profile /= n;
    }
}

bool Game::has_x_override(int h, int s) const {
    return !x_override.empty() && !std::isnan(x_override_at(h, s));
}

int Game::state_index(const std::string& nm) const {
    auto it = std::find(state_names.begin(), state_names.end(), nm);
    return it == state_names.end() ? -1 : static_cast<int>(it - state_names.begin());
}

int Game::human_index(const std::string& nm) const {
    auto it = std::find(human_names.begin(), human_names.end(), nm);
    return it == human_names.end() ? -1 : static_cast<int>(it - human_names.begin());
}

int Game::goal_index(int h, const std::string& nm) const {
    for (std::size_t g = 0; g < goals[h].size(); ++g)
        if (goals[h][g].name == nm) return static_cast<int>(g);
    return -1;
}

void Game::finalize() {
    const int S = num_states(), H = num_humans();
    goals.resize(H);
    goal_offset.assign(H + 1, 0);
    for (int h = 0; h < H; ++h) goal_offset[h + 1] = goal_offset[h] + static_cast<int>(goals[h].size());
    member_bits.assign(static_cast<std::size_t>(total_goals()) * S, 0);
    for (int h = 0; h < H; ++h)
        for (int g = 0; g < num_goals(h); ++g)
            for (int s : goals[h][g].states)
                if (s >= 0 && s < S) member_bits[static_cast<std::size_t>(goal_offset[h] + g) * S + s] = 1;
    behavior.resize(static_cast<std::size_t>(S) * total_goals());
    commitment.resize(S);
    terminal.resize(S, 0);
}

// ---------------------------------------------------------------- builder

GameBuilder::GameBuilder(std::string name) { g_.name = std::move(name); }

int GameBuilder::add_human(const std::string& name, double gamma_h) {
    g_.human_names.push_back(name);
    g_.gamma_h.push_back(gamma_h);
    g_.goals.emplace_back();
    default_beh_.emplace_back();
    for (auto& ha : g_.human_actions) ha.emplace_back();
    return g_.num_humans() - 1;
}

int GameBuilder::add_state(const std::string& name, bool terminal, bool initial) {
    int s = g_.num_states();
    g_.state_names.push_back(name);
    g_.terminal.push_back(terminal ? 1 : 0);
    if (initial) g_.initial.push_back(s);
    g_.robot_actions.emplace_back();
    g_.human_actions.emplace_back(g_.num_humans());
    g_.commitment.emplace_back();
    raw_.emplace_back();
    return s;
}

void GameBuilder::set_robot_actions(int s, std::vector<std::string> names) { g_.robot_actions[s] = std::move(names); }

void GameBuilder::set_human_actions(int s, int h, std::vector<std::string> names) {
    g_.human_actions[s][h] = std::move(names);
}

void GameBuilder::set_transition(int s, int ar, const std::vector<int>& ah, std::vector<Transition> row) {
    raw_[s].emplace_back(ar, ah, std::move(row));
}

int GameBuilder::add_goal(int h, const std::string& name, std::vector<int> states) {
    g_.goals[h].push_back({name, std::move(states)});
    return static_cast<int>(g_.goals[h].size()) - 1;
}

void GameBuilder::set_commitment(int s, int base_state, std::vector<std::string> actions) {
    g_.commitment[s] = Commitment{base_state, std::move(actions)};
}

BehaviorParams& GameBuilder::behavior(int s, int h, int g) { return beh_[{s, h, g}]; }

void GameBuilder::set_default_behavior(int h, const BehaviorParams& p) { default_beh_[h] = p; }

Game GameBuilder::build() {
    Game g = std::move(g_);
    const int S = g.num_states(), H = g.num_humans();
    for (int s = 0; s < S; ++s) {
        if (g.terminal[s]) {
            if (g.robot_actions[s].empty()) g.robot_actions[s] = {"pass"};
            for (int h = 0; h < H; ++h)
                if (g.human_actions[s][h].empty()) g.human_actions[s][h] = {"pass"};
        }
    }
    g.joint_offset.assign(S + 1, 0);
    for (int s = 0; s < S; ++s) {
        std::size_t n = g.robot_actions[s].size();
        for (int h = 0; h < H; ++h) n *= g.human_actions[s][h].size();
        g.joint_offset[s + 1] = g.joint_offset[s] + n;
    }
    std::vector<std::vector<Transition>> rows(g.joint_offset[S]);
    std::vector<char> given(g.joint_offset[S], 0);
    for (int s = 0; s < S; ++s) {
        for (auto& [ar, ah, row] : raw_[s]) {
            if (ar < 0 || ar >= g.num_robot(s) || static_cast<int>(ah.size()) != H)
                throw Error(ErrorKind::argument, "bad action profile at state " + g.state_names[s]);
            for (int h = 0; h < H; ++h)
                if (ah[h] < 0 || ah[h] >= g.num_human(s, h))
                    throw Error(ErrorKind::argument, "bad human action at state " + g.state_names[s]);
            std::size_t j = g.joint_offset[s] + ar * g.human_profiles(s) + g.profile_index(s, ah.data());
            rows[j] = std::move(row);
            given[j] = 1;
        }
        // unspecified terminal rows self-loop
        if (g.terminal[s])
            for (std::size_t j = g.joint_offset[s]; j < g.joint_offset[s + 1]; ++j)
                if (!given[j]) rows[j] = {{s, 1.0}};
    }
    g.row_ptr.assign(rows.size() + 1, 0);
    for (std::size_t r = 0; r < rows.size(); ++r) g.row_ptr[r + 1] = g.row_ptr[r] + rows[r].size();
    g.trans.clear();
    g.trans.reserve(g.row_ptr.back());
    for (auto& r : rows) g.trans.insert(g.trans.end(), r.begin(), r.end());

    g.finalize();
    for (int s = 0; s < S; ++s)
        for (int h = 0; h < H; ++h)
            for (int k = 0; k < g.num_goals(h); ++k)
                if (default_beh_[h]) g.behavior_at(s, h, k) = *default_beh_[h];
    for (auto& [key, p] : beh_) {
        auto [s, h, k] = key;
        g.behavior_at(s, h, k) = p;
    }
    return g;
}

// ---------------------------------------------------------------- validation

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (auto& i : issues) os << i.kind << ": " << i.message << "\n";
    return os.str();
}

std::vector<char> reachable_states(const Game& game, const std::vector<int>& sources) {
    std::vector<char> seen(game.num_states(), 0);
    std::deque<int> q;
    for (int s : sources)
        if (s >= 0 && s < game.num_states() && !seen[s]) seen[s] = 1, q.push_back(s);
    while (!q.empty()) {
        int s = q.front();
        q.pop_front();
        for (std::size_t j = 0; j < game.num_joint(s); ++j)
            for (auto& t : game.row(s, j))
                if (t.prob > 0 && !seen[t.next]) seen[t.next] = 1, q.push_back(t.next);
    }
    return seen;
}

namespace {

// successor lists over positive-probability support
std::vector<std::vector<int>> support_graph(const Game& game) {
    const int S = game.num_states();
    std::vector<std::vector<int>> adj(S);
    for (int s = 0; s < S; ++s) {
        for (std::size_t j = 0; j < game.num_joint(s); ++j)
            for (auto& t : game.row(s, j))
                if (t.prob > 0 && t.next >= 0 && t.next < S) adj[s].push_back(t.next);
        std::sort(adj[s].begin(), adj[s].end());
        adj[s].erase(std::unique(adj[s].begin(), adj[s].end()), adj[s].end());
    }
    return adj;
}

bool distribution_ok(const std::vector<double>& p, std::size_t n) {
    if (p.size() != n) return false;
    double sum = 0;
    for (double x : p) {
        if (!(x >= 0) || !std::isfinite(x)) return false;
        sum += x;
    }
    return std::abs(sum - 1.0) <= 1e-12;
}

std::string path_text(const Game& game, const std::vector<int>& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += " -> ";
        out += game.state_names[path[i]];
    }
    return out;
}

}  // namespace

ValidationReport validate_game(const Game& game) {
    ValidationReport rep;
    auto add = [&](std::string kind, std::string msg, int s = -1, int h = -1, int g = -1) {
        ValidationIssue i;
        i.kind = std::move(kind);
        i.message = std::move(msg);
        i.state = s;
        i.human = h;
        i.goal = g;
        rep.issues.push_back(std::move(i));
        return &rep.issues.back();
    };
    const int S = game.num_states(), H = game.num_humans();
    if (S == 0) {
        add("empty_game", "game has no states");
        return rep;
    }
    if (H == 0) add("no_humans", "game has no humans");
    if (static_cast<int>(game.terminal.size()) != S || static_cast<int>(game.robot_actions.size()) != S ||
        static_cast<int>(game.human_actions.size()) != S || game.joint_offset.size() != static_cast<std::size_t>(S) + 1 ||
        game.goal_offset.size() != static_cast<std::size_t>(H) + 1 || static_cast<int>(game.goals.size()) != H ||
        static_cast<int>(game.gamma_h.size()) != H || game.row_ptr.size() != game.joint_offset[S] + 1 ||
        game.behavior.size() != static_cast<std::size_t>(S) * game.total_goals()) {
        add("shape", "table sizes inconsistent with state/human counts");
        return rep;
    }
    if (game.initial.empty()) add("no_initial", "no initial state");
    for (int s : game.initial)
        if (s < 0 || s >= S) add("no_initial", "initial state id out of range");
    // gamma_h = 1 is fine on acyclic games: every value is a finite sum
    bool finite_game = false;
    for (int h = 0; h < H; ++h)
        if (game.gamma_h[h] == 1.0) finite_game = true;
    if (finite_game) {
        bool in_range = std::all_of(game.trans.begin(), game.trans.end(), [&](const Transition& t) { return t.next >= 0 && t.next < S; });
        finite_game = in_range && is_acyclic(game).has_value();
    }
    for (int h = 0; h < H; ++h)
        if (!(game.gamma_h[h] >= 0 && (game.gamma_h[h] < 1 || (game.gamma_h[h] == 1.0 && finite_game))))
            add("gamma", "gamma_h of " + game.human_names[h] + " outside [0,1) (1 only on acyclic games)", -1, h);
    if (!(game.gamma_r >= 0 && game.gamma_r < 1)) add("gamma", "gamma_r outside [0,1)");
    if (game.goal_resample_period < 1) add("resample_period", "goal resample period must be >= 1");

    bool kernel_sane = true;
    for (int s = 0; s < S; ++s) {
        const std::string& sn = game.state_names[s];
        if (game.robot_actions[s].empty()) add("empty_actions", "no robot actions in " + sn, s);
        std::size_t n = game.robot_actions[s].size();
        for (int h = 0; h < H; ++h) {
            if (game.human_actions[s][h].empty())
                add("empty_actions", "no actions for " + game.human_names[h] + " in " + sn, s, h);
            n *= game.human_actions[s][h].size();
        }
        if (n > 1000000) add("joint_space", "joint action space of " + sn + " exceeds 1e6", s);
        if (n != game.num_joint(s)) {
            add("shape", "joint row count of " + sn + " does not match its action sets", s);
            kernel_sane = false;
            continue;
        }
        if (game.terminal[s]) {
            bool one = game.robot_actions[s].size() == 1;
            for (int h = 0; h < H; ++h) one = one && game.human_actions[s][h].size() == 1;
            if (!one) add("terminal_actions", "terminal " + sn + " must have exactly one action per agent", s);
        }
        for (std::size_t j = 0; j < game.num_joint(s); ++j) {
            auto row = game.row(s, j);
            double sum = 0;
            bool neg = false, bad = false;
            for (auto& t : row) {
                if (t.next < 0 || t.next >= S) bad = true;
                if (!(t.prob >= 0) || !std::isfinite(t.prob)) neg = true;
                sum += t.prob;
            }
            if (bad) {
                add("unknown_successor", "successor id out of range in " + sn, s)->joint = j;
                kernel_sane = false;
            }
            if (neg) add("negative_probability", "negative or non-finite probability in " + sn, s)->joint = j;
            if (game.terminal[s]) {
                bool self = row.size() == 1 && row[0].next == s && std::abs(row[0].prob - 1) <= 1e-12;
                if (!row.empty() && !self)
                    add("terminal_transition", "terminal " + sn + " must self-loop or have no successors", s)->joint = j;
            } else if (std::abs(sum - 1.0) > 1e-12) {
                std::ostringstream os;
                os.precision(17);
                os << "kernel row not normalized in " << sn << " (sum " << sum << ")";
                add("row_not_normalized", os.str(), s)->joint = j;
            }
        }
    }
    if (!kernel_sane) return rep;

    // behavior parameters
    for (int s = 0; s < S; ++s)
        for (int h = 0; h < H; ++h)
            for (int g = 0; g < game.num_goals(h); ++g) {
                const auto& b = game.behavior_at(s, h, g);
                std::string where = game.state_names[s] + "/" + game.human_names[h] + "/" + game.goals[h][g].name;
                if (!(b.nu >= 0 && b.nu <= 1)) add("bad_nu", "nu outside [0,1] at " + where, s, h, g);
                if (std::isnan(b.beta) || b.beta < 0) add("bad_beta", "beta must be >= 0 at " + where, s, h, g);
                if (!b.pi0.empty() && !distribution_ok(b.pi0, game.human_actions[s][h].size()))
                    add("bad_pi0", "pi0 is not a distribution over A_h at " + where, s, h, g);
                if (!b.mu.empty()) {
                    if (static_cast<int>(b.mu.size()) != H) {
                        add("bad_mu", "mu must have one entry per human at " + where, s, h, g);
                        continue;
                    }
                    for (int o = 0; o < H; ++o) {
                        if (b.mu[o].empty()) continue;
                        if (o == h) add("bad_mu", "mu names the human itself at " + where, s, h, g);
                        else if (!distribution_ok(b.mu[o], game.human_actions[s][o].size()))
                            add("bad_mu", "mu over " + game.human_names[o] + " is not a distribution at " + where, s, h, g);
                    }
                }
            }

    if (!game.x_override.empty()) {
        if (game.x_override.size() != static_cast<std::size_t>(H) * S) add("bad_x_override", "x override table has wrong size");
        else
            for (double x : game.x_override)
                if (!std::isnan(x) && !(x > 0 && std::isfinite(x))) {
                    add("bad_x_override", "x override values must be positive");
                    break;
                }
    }

    // commitments
    std::set<std::pair<int, std::vector<std::string>>> seen_commit;
    for (int s = 0; s < S; ++s) {
        if (!game.commitment[s]) continue;
        const auto& c = *game.commitment[s];
        const std::string& sn = game.state_names[s];
        if (c.base_state < 0 || c.base_state >= S) {
            add("commitment", "commitment of " + sn + " has unknown base state", s);
            continue;
        }
        if (c.actions.empty()) add("commitment", "empty committed set at " + sn, s);
        const auto& base = game.robot_actions[c.base_state];
        for (auto& a : c.actions)
            if (std::find(base.begin(), base.end(), a) == base.end())
                add("commitment", "committed action " + a + " not available in base " + game.state_names[c.base_state], s);
        for (auto& a : game.robot_actions[s])
            if (std::find(c.actions.begin(), c.actions.end(), a) == c.actions.end())
                add("commitment", "A_r(" + sn + ") contains " + a + " outside its committed set", s);
        auto key = std::make_pair(c.base_state, c.actions);
        std::sort(key.second.begin(), key.second.end());
        if (!seen_commit.insert(key).second)
            add("commitment", "commitment history of " + sn + " duplicates another state", s);
    }

    // goals
    auto adj = support_graph(game);
    for (int h = 0; h < H; ++h) {
        if (game.goals[h].empty()) add("empty_goal_family", "no goals for " + game.human_names[h], -1, h);
        for (int g = 0; g < game.num_goals(h); ++g) {
            const auto& goal = game.goals[h][g];
            if (goal.states.empty()) add("empty_goal", "goal " + goal.name + " has no states", -1, h, g);
            for (int m : goal.states)
                if (m < 0 || m >= S) add("unknown_state", "goal " + goal.name + " references unknown state", -1, h, g);
        }
    }
    if (game.absorption == Absorption::terminal) {
        for (int h = 0; h < H; ++h)
            for (int g = 0; g < game.num_goals(h); ++g) {
                const auto& goal = game.goals[h][g];
                for (int m : goal.states) {
                    if (m < 0 || m >= S) continue;
                    // BFS from m over >= 1 step; report the first other member hit
                    std::vector<int> parent(S, -2);
                    std::deque<int> q;
                    for (int t : adj[m])
                        if (parent[t] == -2) parent[t] = m, q.push_back(t);
                    int hit = -1;
                    while (!q.empty() && hit < 0) {
                        int u = q.front();
                        q.pop_front();
                        if (u != m && game.member(h, g, u)) {
                            hit = u;
                            break;
                        }
                        for (int t : adj[u])
                            if (parent[t] == -2) parent[t] = u, q.push_back(t);
                    }
                    if (hit >= 0) {
                        std::vector<int> path{hit};
                        for (int u = parent[hit]; u != m; u = parent[u]) path.push_back(u);
                        path.push_back(m);
                        std::reverse(path.begin(), path.end());
                        auto* i = add("goal_mutually_reachable",
                                      "goal states mutually reachable in " + goal.name + ": " + path_text(game, path), m, h, g);
                        i->witness = path;
                        break;
                    }
                }
            }
    }

    // goal cover, almost surely under fully mixed play
    for (int h = 0; h < H; ++h) {
        if (game.goals[h].empty()) continue;
        std::vector<char> in_goal(S, 0);
        for (int g = 0; g < game.num_goals(h); ++g)
            for (int m : game.goals[h][g].states)
                if (m >= 0 && m < S) in_goal[m] = 1;
        for (int s = 0; s < S; ++s)
            if (game.has_x_override(h, s)) in_goal[s] = 1;
        // states reachable from the initial ones without having entered a goal (>= 1 step)
        std::vector<char> open(S, 0);
        std::deque<int> q;
        for (int s0 : game.initial)
            if (s0 >= 0 && s0 < S && !open[s0]) open[s0] = 1, q.push_back(s0);
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (int t : adj[u])
                if (!in_goal[t] && !open[t]) open[t] = 1, q.push_back(t);
        }
        // can reach a goal in >= 1 step
        std::vector<char> good(S, 0);
        std::vector<std::vector<int>> radj(S);
        for (int u = 0; u < S; ++u)
            for (int t : adj[u]) radj[t].push_back(u);
        std::deque<int> r;
        for (int s = 0; s < S; ++s)
            if (in_goal[s])
                for (int u : radj[s])
                    if (!good[u]) good[u] = 1, r.push_back(u);
        while (!r.empty()) {
            int u = r.front();
            r.pop_front();
            for (int p : radj[u])
                if (!good[p]) good[p] = 1, r.push_back(p);
        }
        for (int s = 0; s < S; ++s) {
            if (!open[s] || good[s]) continue;
            if (game.has_x_override(h, s)) continue;
            add("goal_cover",
                "trajectories through " + game.state_names[s] + " can miss every goal of " + game.human_names[h], s, h);
        }
    }
    return rep;
}

std::optional<std::vector<int>> is_acyclic(const Game& game) {
    const int S = game.num_states();
    auto adj = support_graph(game);
    std::vector<int> indeg(S, 0);
    for (int s = 0; s < S; ++s)
        for (int t : adj[s]) {
            if (t == s && game.terminal[s]) continue;
            if (t == s) return std::nullopt;
            ++indeg[t];
        }
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int s = 0; s < S; ++s)
        if (indeg[s] == 0) ready.push(s);
    std::vector<int> order;
    order.reserve(S);
    while (!ready.empty()) {
        int s = ready.top();
        ready.pop();
        order.push_back(s);
        for (int t : adj[s]) {
            if (t == s) continue;
            if (--indeg[t] == 0) ready.push(t);
        }
    }
    if (static_cast<int>(order.size()) != S) return std::nullopt;
    return order;
}

int reachable_goal_indicator(const Game& game, int h, int g, int s) {
    if (h < 0 || h >= game.num_humans()) throw Error(ErrorKind::argument, "unknown human id");
    if (g < 0 || g >= game.num_goals(h)) throw Error(ErrorKind::argument, "unknown goal id");
    if (s < 0 || s >= game.num_states()) throw Error(ErrorKind::argument, "unknown state id");
    return game.member(h, g, s) ? 1 : 0;
}

Game restrict_robot_actions(const Game& game, int s, const std::vector<int>& keep) {
    if (s < 0 || s >= game.num_states()) throw Error(ErrorKind::argument, "unknown state id");
    if (keep.empty()) throw Error(ErrorKind::argument, "restricted action set must be nonempty");
    for (int a : keep)
        if (a < 0 || a >= game.num_robot(s)) throw Error(ErrorKind::argument, "robot action id out of range");
    Game out = game;
    const int S = game.num_states();
    const std::size_t P = game.human_profiles(s);
    std::vector<std::string> names;
    for (int a : keep) names.push_back(game.robot_actions[s][a]);
    out.robot_actions[s] = names;
    out.joint_offset.assign(S + 1, 0);
    out.row_ptr.assign(1, 0);
    out.trans.clear();
    for (int u = 0; u < S; ++u) {
        std::vector<std::size_t> rows;
        if (u == s) {
            for (int a : keep)
                for (std::size_t p = 0; p < P; ++p) rows.push_back(a * P + p);
        } else {
            for (std::size_t j = 0; j < game.num_joint(u); ++j) rows.push_back(j);
        }
        out.joint_offset[u + 1] = out.joint_offset[u] + rows.size();
        for (std::size_t j : rows) {
            auto r = game.row(u, j);
            out.trans.insert(out.trans.end(), r.begin(), r.end());
            out.row_ptr.push_back(out.trans.size());
        }
    }
    return out;
}

}  // namespace pg
