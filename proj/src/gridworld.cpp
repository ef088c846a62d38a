#include "powergame/gridworld.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <map>

namespace pg {

GridworldConfig default_gridworld_config() {
    GridworldConfig c;
    c.rows = {"########", "#H..#..#", "#...D..#", "#R.K#.G#", "########"};
    return c;
}

namespace {

constexpr int kDx[5] = {0, 0, 0, -1, 1};
constexpr int kDy[5] = {0, -1, 1, 0, 0};

bool same(Cell a, Cell b) { return a.x == b.x && a.y == b.y; }

std::string state_name(const GridState& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "r%d_%d_h%d_%d_k%d", s.robot.x, s.robot.y, s.human.x, s.human.y, s.key);
    return buf;
}

// BFS distances on open cells, door passable
std::vector<int> distances(const GridLayout& L, Cell from) {
    std::vector<int> d(L.width * L.height, -1);
    std::deque<Cell> q{from};
    d[from.y * L.width + from.x] = 0;
    while (!q.empty()) {
        Cell c = q.front();
        q.pop_front();
        for (int k = 1; k < 5; ++k) {
            Cell n{c.x + kDx[k], c.y + kDy[k]};
            if (!L.is_open(n) || d[n.y * L.width + n.x] >= 0) continue;
            d[n.y * L.width + n.x] = d[c.y * L.width + c.x] + 1;
            q.push_back(n);
        }
    }
    return d;
}

}  // namespace

GridLayout parse_grid(const GridworldConfig& cfg) {
    GridLayout L;
    L.height = static_cast<int>(cfg.rows.size());
    if (L.height == 0) throw Error(ErrorKind::argument, "empty grid");
    L.width = static_cast<int>(cfg.rows[0].size());
    L.open.assign(L.width * L.height, 0);
    int nk = 0, nd = 0, nh = 0, nr = 0, ng = 0;
    for (int y = 0; y < L.height; ++y) {
        if (static_cast<int>(cfg.rows[y].size()) != L.width) throw Error(ErrorKind::argument, "ragged grid rows");
        for (int x = 0; x < L.width; ++x) {
            char c = cfg.rows[y][x];
            Cell here{x, y};
            switch (c) {
                case '#': continue;
                case '.': break;
                case 'K': L.key = here, ++nk; break;
                case 'D': L.door = here, ++nd; break;
                case 'H': L.human_start = here, ++nh; break;
                case 'R': L.robot_start = here, ++nr; break;
                case 'G': L.green = here, ++ng; break;
                default: throw Error(ErrorKind::argument, std::string("unknown grid symbol '") + c + "'");
            }
            L.open[y * L.width + x] = 1;
        }
    }
    if (nk != 1 || nd != 1) throw Error(ErrorKind::argument, "grid needs exactly one key and one door");
    if (nh != 1 || nr != 1 || ng != 1) throw Error(ErrorKind::argument, "grid needs one H, one R and one G cell");
    for (int x = 0; x < L.width; ++x)
        for (int y : {0, L.height - 1})
            if (L.open[y * L.width + x]) throw Error(ErrorKind::argument, "grid border must be walls");
    for (int y = 0; y < L.height; ++y)
        for (int x : {0, L.width - 1})
            if (L.open[y * L.width + x]) throw Error(ErrorKind::argument, "grid border must be walls");
    // all open cells connected with the door open, and at least two regions with it closed
    auto d = distances(L, L.human_start);
    for (int i = 0; i < L.width * L.height; ++i)
        if (L.open[i] && d[i] < 0) throw Error(ErrorKind::argument, "grid has unreachable open cells");
    GridLayout closed = L;
    closed.open[L.door.y * L.width + L.door.x] = 0;
    auto dc = distances(closed, L.human_start);
    bool split = false;
    for (int i = 0; i < L.width * L.height; ++i)
        if (closed.open[i] && dc[i] < 0) split = true;
    if (!split) throw Error(ErrorKind::argument, "door does not separate the grid");
    return L;
}

GridState grid_state(const Game& game, int s) {
    GridState g;
    if (std::sscanf(game.state_names[s].c_str(), "r%d_%d_h%d_%d_k%d", &g.robot.x, &g.robot.y, &g.human.x, &g.human.y, &g.key) != 5)
        throw Error(ErrorKind::argument, "not a gridworld state: " + game.state_names[s]);
    return g;
}

int grid_state_id(const Game& game, const GridState& st) { return game.state_index(state_name(st)); }

Scenario build_gridworld(const GridworldConfig& cfg) {
    GridLayout L = parse_grid(cfg);
    const std::vector<std::string> robot_names = {"pass", "up", "down", "left", "right", "pickup", "unlock"};
    const std::vector<std::string> human_names = {"pass", "up", "down", "left", "right"};

    auto passable = [&](Cell c, int key) { return L.is_open(c) && (key == 2 || !same(c, L.door)); };
    auto step = [&](const GridState& s, int ar, int ah) {
        GridState t = s;
        Cell rt = s.robot, ht = s.human;
        if (ar >= 1 && ar <= 4) {
            Cell n{s.robot.x + kDx[ar], s.robot.y + kDy[ar]};
            if (passable(n, s.key) && !same(n, s.human)) rt = n;
        }
        if (ah >= 1 && ah <= 4) {
            Cell n{s.human.x + kDx[ah], s.human.y + kDy[ah]};
            if (passable(n, s.key) && !same(n, s.robot)) ht = n;
        }
        if (same(rt, ht)) rt = s.robot, ht = s.human;  // contested cell: nobody moves
        t.robot = rt, t.human = ht;
        if (ar == 5 && s.key == 0 && same(s.robot, L.key)) t.key = 1;
        if (ar == 6 && s.key == 1 && std::abs(s.robot.x - L.door.x) + std::abs(s.robot.y - L.door.y) == 1) t.key = 2;
        return t;
    };

    GridState init{L.robot_start, L.human_start, cfg.door_unlocked ? 2 : 0};
    std::map<std::string, int> ids;
    std::vector<GridState> states{init};
    ids[state_name(init)] = 0;
    for (std::size_t i = 0; i < states.size(); ++i)
        for (int ar = 0; ar < 7; ++ar)
            for (int ah = 0; ah < 5; ++ah) {
                GridState t = step(states[i], ar, ah);
                auto nm = state_name(t);
                if (!ids.count(nm)) {
                    ids[nm] = static_cast<int>(states.size());
                    states.push_back(t);
                }
            }

    GameBuilder b("gridworld");
    int h = b.add_human("h", cfg.gamma_h);
    for (std::size_t i = 0; i < states.size(); ++i) b.add_state(state_name(states[i]), false, i == 0);
    for (std::size_t i = 0; i < states.size(); ++i) {
        int s = static_cast<int>(i);
        b.set_robot_actions(s, robot_names);
        b.set_human_actions(s, h, human_names);
        for (int ar = 0; ar < 7; ++ar)
            for (int ah = 0; ah < 5; ++ah) b.set_transition(s, ar, {ah}, {{ids.at(state_name(step(states[i], ar, ah))), 1.0}});
    }
    std::vector<Cell> goal_cells;
    for (int y = 0; y < L.height; ++y)
        for (int x = 0; x < L.width; ++x)
            if (L.open[y * L.width + x]) {
                Cell c{x, y};
                std::vector<int> st;
                for (std::size_t i = 0; i < states.size(); ++i)
                    if (same(states[i].human, c)) st.push_back(static_cast<int>(i));
                if (st.empty()) continue;  // never occupied (cannot happen on validated maps)
                b.add_goal(h, "c" + std::to_string(x) + "_" + std::to_string(y), st);
                goal_cells.push_back(c);
            }
    BehaviorParams beh;
    beh.beta = cfg.beta_h;
    b.set_default_behavior(h, beh);
    b.game().gamma_r = cfg.gamma_r;
    b.game().absorption = Absorption::first_entry;
    Geometry geo;
    for (auto& s : states) geo.human_pos.push_back(s.human);
    geo.goal_pos.push_back(goal_cells);
    b.game().geometry = geo;

    Scenario sc;
    sc.name = "gridworld";
    sc.game = b.build();
    sc.params.zeta = 2.0;
    sc.params.xi = 1.0;
    sc.params.eta = 1.1;
    sc.params.beta_r = 5.0;
    return sc;
}

GridEvents gridworld_events(const GridworldConfig& cfg, const Game& game, const std::vector<int>& states) {
    GridLayout L = parse_grid(cfg);
    auto to_green = distances(L, L.green);
    GridEvents ev;
    for (std::size_t t = 0; t + 1 < states.size(); ++t) {
        GridState a = grid_state(game, states[t]), b = grid_state(game, states[t + 1]);
        if (ev.key_step < 0 && a.key == 0 && b.key == 1) ev.key_step = static_cast<int>(t);
        if (ev.unlock_step < 0 && a.key == 1 && b.key == 2) ev.unlock_step = static_cast<int>(t);
        if (ev.unlock_step >= 0 && ev.aside_step < 0 && static_cast<int>(t) > ev.unlock_step) {
            // robot cell on some shortest human path to the green cell (robot ignored)
            auto from_h = distances(L, b.human);
            int total = from_h[L.green.y * L.width + L.green.x];
            int ri = b.robot.y * L.width + b.robot.x;
            bool on_path = from_h[ri] >= 0 && from_h[ri] + to_green[ri] == total;
            if (!on_path) ev.aside_step = static_cast<int>(t);
        }
    }
    return ev;
}

std::vector<int> gridworld_greedy_rollout(const GridworldConfig& cfg, const Game& game, const HumanPrior& prior,
                                          const std::vector<double>& pi_r, int steps) {
    GridLayout L = parse_grid(cfg);
    int green = game.goal_index(0, "c" + std::to_string(L.green.x) + "_" + std::to_string(L.green.y));
    std::vector<std::size_t> off(game.num_states() + 1, 0);
    for (int s = 0; s < game.num_states(); ++s) off[s + 1] = off[s] + game.num_robot(s);
    std::vector<int> out{game.initial.front()};
    int s = out.back();
    for (int t = 0; t < steps; ++t) {
        auto pr = std::span<const double>(pi_r.data() + off[s], off[s + 1] - off[s]);
        int ar = static_cast<int>(std::max_element(pr.begin(), pr.end()) - pr.begin());
        auto ph = prior.pi(0, green, s);
        int ah = static_cast<int>(std::max_element(ph.begin(), ph.end()) - ph.begin());
        std::size_t j = ar * game.human_profiles(s) + ah;
        s = game.row(s, j).front().next;
        out.push_back(s);
        if (game.member(0, green, s)) break;
    }
    return out;
}

Phase1Schedule gridworld_phase1_schedule() {
    Phase1Schedule s;
    s.potential = Potential::manhattan;
    return s;
}

LearnSchedule gridworld_learn_schedule() {
    LearnSchedule s = reference_schedule("default");
    s.episodes = 250000;
    s.x_mode = XMode::table;
    return s;
}

GridRun gridworld_learn_run(const GridworldConfig& cfg, const Scenario& sc, std::uint64_t seed, const Phase1Schedule& s1,
                            const LearnSchedule& s2) {
    GridRun run;
    run.prior = phase1_learn_all(sc.game, s1, seed, ExecPolicy::serial, &run.phase1);
    LearnSchedule sched = s2;
    sched.seed = seed;
    run.learned = phase2_learn(sc.game, run.prior, sc.params, sched);
    run.rollout = gridworld_greedy_rollout(cfg, sc.game, run.prior, run.learned.solution.pi_r);
    run.events = gridworld_events(cfg, sc.game, run.rollout);
    return run;
}

}  // namespace pg
