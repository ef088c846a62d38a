#include "powergame/scenarios.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <tuple>

#include <Eigen/Dense>

#include "powergame/gridworld.hpp"
#include "powergame/policy.hpp"

namespace pg {

void ScenarioReport::add(const std::string& q, double oracle, double solver, double tol) {
    bool ok = std::abs(oracle - solver) <= tol || (std::isinf(oracle) && oracle == solver);
    checks.push_back({q, oracle, solver, tol, ok});
}

bool ScenarioReport::all_match() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.match; });
}

Solved solve_scenario(const Scenario& sc) {
    Solved out;
    bool acyclic = is_acyclic(sc.game).has_value();
    out.prior = acyclic ? solve_prior_backward(sc.game, sc.prior_opt) : solve_prior_fixed_point(sc.game, sc.prior_opt);
    out.robot = solve_robot(sc.game, out.prior, sc.params, sc.robot_opt);
    return out;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BehaviorParams rational(double beta = kInf) {
    BehaviorParams b;
    b.beta = beta;
    return b;
}

BehaviorParams habitual(std::vector<double> pi0) {
    BehaviorParams b;
    b.nu = 1.0;
    b.pi0 = std::move(pi0);
    return b;
}

PowerParams permissive(double zeta, double xi, double eta, double beta_r) {
    PowerParams p;
    p.zeta = zeta;
    p.xi = xi;
    p.eta = eta;
    p.beta_r = beta_r;
    p.permissive = true;
    return p;
}

// all-human pass rows: every robot action goes to `next[a]`
void robot_moves(GameBuilder& b, int s, const std::vector<int>& next) {
    int H = b.game().num_humans();
    for (int a = 0; a < static_cast<int>(next.size()); ++a) b.set_transition(s, a, std::vector<int>(H, 0), {{next[a], 1.0}});
}

// argmax set of pi (relative tolerance)
std::vector<int> top_actions(std::span<const double> pi) {
    double m = *std::max_element(pi.begin(), pi.end());
    std::vector<int> out;
    for (int a = 0; a < static_cast<int>(pi.size()); ++a)
        if (pi[a] >= m - 1e-9) out.push_back(a);
    return out;
}

int action_id(const Game& g, int s, const std::string& nm) {
    auto& v = g.robot_actions[s];
    auto it = std::find(v.begin(), v.end(), nm);
    if (it == v.end()) throw Error(ErrorKind::argument, "no robot action " + nm + " at " + g.state_names[s]);
    return static_cast<int>(it - v.begin());
}

int state_of(const Game& g, const std::string& nm) {
    int s = g.state_index(nm);
    if (s < 0) throw Error(ErrorKind::argument, "no state " + nm);
    return s;
}

// deterministic plan: pi_r laid out like RobotSolution, each state mapped to one action or uniform
std::vector<double> uniform_plan(const Game& g) {
    std::vector<double> pi;
    for (int s = 0; s < g.num_states(); ++s)
        for (int a = 0; a < g.num_robot(s); ++a) pi.push_back(1.0 / g.num_robot(s));
    return pi;
}

void set_plan(const Game& g, std::vector<double>& pi, int s, int a) {
    std::size_t off = 0;
    for (int t = 0; t < s; ++t) off += g.num_robot(t);
    for (int b = 0; b < g.num_robot(s); ++b) pi[off + b] = b == a ? 1.0 : 0.0;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------- commitment

Scenario build_commitment_game(const CommitmentParams& p) {
    GameBuilder b("commitment");
    // undiscounted: the pressed button pays off one step later and X(s1) = 2 is meant exactly
    int h = b.add_human("h", 1.0);
    int s0 = b.add_state("s0", false, true);
    int sA = b.add_state("sA", true), sB = b.add_state("sB", true);
    int s1 = b.add_state("s1"), s2 = b.add_state("s2"), sp = b.add_state("sp");
    const char* tails[3] = {"1", "2", "p"};
    int sub[3][3];
    const char* heads[3] = {"s1", "s2", "sp"};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) sub[i][j] = b.add_state(std::string(heads[i]) + tails[j]);

    b.set_robot_actions(s0, {"A", "B", "c1", "c2", "pass"});
    b.set_human_actions(s0, h, {"pass"});
    robot_moves(b, s0, {sA, sB, s1, s2, sp});
    int mids[3] = {s1, s2, sp};
    for (int i = 0; i < 3; ++i) {
        int s = mids[i];
        b.set_robot_actions(s, {"pass"});
        b.set_human_actions(s, h, {"1", "2", "pass"});
        for (int j = 0; j < 3; ++j) b.set_transition(s, 0, {j}, {{sub[i][j], 1.0}});
    }
    // c1: button 1 commits to A, button 2 to B; c2 the other way round
    const char* forced[2][2] = {{"A", "B"}, {"B", "A"}};
    int base[2] = {sub[2][0], sub[2][1]};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            int s = sub[i][j];
            b.set_human_actions(s, h, {"pass"});
            if (i < 2 && j < 2) {
                std::string a = forced[i][j];
                b.set_robot_actions(s, {a});
                b.set_transition(s, 0, {0}, {{a == "A" ? sA : sB, 1.0}});
                b.set_commitment(s, base[j], {a});
            } else {
                b.set_robot_actions(s, {"A", "B"});
                robot_moves(b, s, {sA, sB});
            }
        }
    b.add_goal(h, "A", {sA});
    b.add_goal(h, "B", {sB});
    b.set_default_behavior(h, rational(p.beta_h));
    b.game().gamma_r = p.gamma_r;

    Scenario sc;
    sc.name = "commitment";
    sc.game = b.build();
    sc.params.zeta = p.zeta;
    sc.params.beta_r = p.beta_r;
    sc.prior_opt.adversary = p.adversary;
    // softmax over (right button, wrong button, pass) with Q = (1, 0, 0); after a pass the
    // robot is indifferent between A and B and flips a coin
    double pc = 1.0, pp = 0.0;
    if (!std::isinf(p.beta_h)) {
        pc = std::exp(p.beta_h) / (std::exp(p.beta_h) + 2.0);
        pp = 1.0 / (std::exp(p.beta_h) + 2.0);
    }
    sc.oracle = {{"X(s1)", 2 * std::pow(pc + 0.5 * pp, p.zeta)},
                 {"X(sA)", 1.0},
                 {"X(sp|contingent)", std::pow(2.0, 1.0 - p.zeta)},
                 {"X(sp|fixed A)", 1.0}};
    return sc;
}

std::vector<double> commitment_contingent_plan(const Game& g) {
    auto pi = uniform_plan(g);
    set_plan(g, pi, state_of(g, "sp1"), action_id(g, state_of(g, "sp1"), "A"));
    set_plan(g, pi, state_of(g, "sp2"), action_id(g, state_of(g, "sp2"), "B"));
    return pi;
}

std::vector<double> commitment_fixed_plan(const Game& g, const std::string& task) {
    auto pi = uniform_plan(g);
    for (const char* nm : {"sp1", "sp2", "spp"}) {
        int s = state_of(g, nm);
        set_plan(g, pi, s, action_id(g, s, task));
    }
    return pi;
}

ScenarioReport check_commitment(const CommitmentParams& p) {
    Scenario sc = build_commitment_game(p);
    auto sol = solve_scenario(sc);
    const Game& g = sc.game;
    ScenarioReport rep;
    rep.name = sc.name;
    int s1 = state_of(g, "s1"), sA = state_of(g, "sA"), sp = state_of(g, "sp"), s0 = state_of(g, "s0");
    rep.add("X(s1)", sc.oracle[0].second, sol.robot.x(0, s1), 1e-9);
    rep.add("X(sA)", 1.0, sol.robot.x(0, sA), 1e-9);
    auto cont = evaluate_policy_power(g, sol.prior, sc.params, commitment_contingent_plan(g), sc.robot_opt);
    if (std::isinf(p.beta_h)) rep.add("X(sp|contingent)", sc.oracle[2].second, cont.x(0, sp), 1e-9);
    auto fixed = evaluate_policy_power(g, sol.prior, sc.params, commitment_fixed_plan(g, "A"), sc.robot_opt);
    if (std::isinf(p.beta_h)) rep.add("X(sp|fixed A)", 1.0, fixed.x(0, sp), 1e-9);
    double commit_mass = sol.robot.pi(s0)[2] + sol.robot.pi(s0)[3];
    if (p.beta_h > 0) rep.add("pi_r(s0)(commit)", 1.0, commit_mass, 1e-9);
    return rep;
}

// ---------------------------------------------------------------- menu size

Scenario build_menu_game(const MenuParams& p) {
    if (p.k_max < 1) throw Error(ErrorKind::argument, "k_max must be >= 1");
    GameBuilder b("menu");
    int h = b.add_human("h", 0.99);
    int s0 = b.add_state("s0", false, true);
    std::vector<int> sk, tj;
    for (int k = 1; k <= p.k_max; ++k) sk.push_back(b.add_state("s" + std::to_string(k)));
    for (int j = 1; j <= p.k_max; ++j) tj.push_back(b.add_state("t" + std::to_string(j), true));
    std::vector<std::string> ra;
    for (int k = 1; k <= p.k_max; ++k) ra.push_back("k" + std::to_string(k));
    b.set_robot_actions(s0, ra);
    b.set_human_actions(s0, h, {"pass"});
    robot_moves(b, s0, sk);
    for (int k = 1; k <= p.k_max; ++k) {
        int s = sk[k - 1];
        b.set_robot_actions(s, {"pass"});
        std::vector<std::string> ha;
        for (int j = 1; j <= k; ++j) ha.push_back("a" + std::to_string(j));
        b.set_human_actions(s, h, ha);
        for (int j = 0; j < k; ++j) b.set_transition(s, 0, {j}, {{tj[j], 1.0}});
    }
    for (int j = 0; j < p.k_max; ++j) b.add_goal(h, "t" + std::to_string(j + 1), {tj[j]});
    b.set_default_behavior(h, rational(p.beta_h));
    b.game().gamma_r = p.gamma_r;
    Scenario sc;
    sc.name = "menu";
    sc.game = b.build();
    sc.params.zeta = p.zeta;
    sc.params.beta_r = kInf;
    sc.oracle = {{"k_bruteforce", static_cast<double>(menu_bruteforce_k(p))},
                 {"k_approx", menu_approx_k(p.beta_h, p.zeta)}};
    return sc;
}

double menu_w(int k, double beta_h, double zeta) {
    const double log2e = 1.0 / std::log(2.0);
    return std::log2(static_cast<double>(k)) + zeta * beta_h * log2e - zeta * std::log2(std::exp(beta_h) + k - 1);
}

int menu_bruteforce_k(const MenuParams& p) {
    int best = 1;
    for (int k = 2; k <= p.k_max; ++k)
        if (menu_w(k, p.beta_h, p.zeta) > menu_w(best, p.beta_h, p.zeta)) best = k;
    return best;
}

double menu_approx_k(double beta_h, double zeta) { return (std::exp(beta_h) - 1.0) / (zeta - 1.0); }

int menu_solver_k(const Scenario& sc, const RobotSolution& sol) {
    auto top = top_actions(sol.pi(state_of(sc.game, "s0")));
    return top.front() + 1;
}

ScenarioReport check_menu(const MenuParams& p) {
    Scenario sc = build_menu_game(p);
    auto sol = solve_scenario(sc);
    ScenarioReport rep;
    rep.name = sc.name;
    int kb = menu_bruteforce_k(p);
    rep.add("k_solver", kb, menu_solver_k(sc, sol.robot), 0.0);
    rep.add("k_approx", menu_approx_k(p.beta_h, p.zeta), kb, 1.0);
    for (int k = 1; k <= std::min(p.k_max, 5); ++k)
        rep.add("W(s" + std::to_string(k) + ")", menu_w(k, p.beta_h, p.zeta),
                power_bits(sol.robot.x(0, state_of(sc.game, "s" + std::to_string(k)))), 1e-9);
    return rep;
}

// ---------------------------------------------------------------- confirmation

Scenario build_confirmation_game(const ConfirmationParams& p) {
    if (p.k_max < 1) throw Error(ErrorKind::argument, "k_max must be >= 1");
    if (!(p.epsilon > 0 && p.epsilon < 0.5)) throw Error(ErrorKind::argument, "epsilon must be in (0, 0.5)");
    GameBuilder b("confirmation");
    int h = b.add_human("h", p.gamma_h);
    int s0 = b.add_state("s0", false, true);
    int tA = b.add_state("tA", true), tB = b.add_state("tB", true);
    std::vector<int> ck;
    std::vector<std::string> ra;
    for (int k = 1; k <= p.k_max; ++k) {
        ck.push_back(b.add_state("c" + std::to_string(k)));
        ra.push_back("k" + std::to_string(k));
    }
    b.set_robot_actions(s0, ra);
    b.set_human_actions(s0, h, {"pass"});
    robot_moves(b, s0, ck);
    int gA = b.add_goal(h, "A", {tA});
    int gB = b.add_goal(h, "B", {tB});
    const double e = p.epsilon;
    for (int k = 1; k <= p.k_max; ++k) {
        int c = ck[k - 1];
        b.set_robot_actions(c, {"pass"});
        if (p.timing == ConfirmationTiming::lumped) {
            // one composite answer per round; failed rounds take k steps through a delay chain
            double pk = std::pow(1 - e, k), wk = std::pow(e, k), qk = std::max(0.0, 1 - pk - wk);
            b.set_human_actions(c, h, {"A", "B", "retry"});
            b.set_transition(c, 0, {0}, {{tA, 1.0}});
            b.set_transition(c, 0, {1}, {{tB, 1.0}});
            int prev = c, first = c;
            for (int d = 1; d < k; ++d) {
                int s = b.add_state("c" + std::to_string(k) + "_d" + std::to_string(d));
                b.set_robot_actions(s, {"pass"});
                b.set_human_actions(s, h, {"pass"});
                if (prev == c) first = s;
                else b.set_transition(prev, 0, {0}, {{s, 1.0}});
                prev = s;
            }
            if (prev != c) b.set_transition(prev, 0, {0}, {{c, 1.0}});
            b.set_transition(c, 0, {2}, {{k == 1 ? c : first, 1.0}});
            b.behavior(c, h, gA) = habitual({pk, wk, qk});
            b.behavior(c, h, gB) = habitual({wk, pk, qk});
        } else {
            // answer, then k - 1 confirmations in separate steps; the state remembers the answer
            // and whether every confirmation so far was consistent with it
            b.set_human_actions(c, h, {"A", "B"});
            if (k == 1) {
                b.set_transition(c, 0, {0}, {{tA, 1.0}});
                b.set_transition(c, 0, {1}, {{tB, 1.0}});
                b.behavior(c, h, gA) = habitual({1 - e, e});
                b.behavior(c, h, gB) = habitual({e, 1 - e});
                continue;
            }
            // chain[x][ok][i]: answer x, consistent ok, about to give confirmation i (1..k-1)
            std::vector<std::vector<std::vector<int>>> chain(2, std::vector<std::vector<int>>(2, std::vector<int>(k, -1)));
            for (int x = 0; x < 2; ++x)
                for (int ok = 0; ok < 2; ++ok)
                    for (int i = 1; i < k; ++i) {
                        int s = b.add_state("c" + std::to_string(k) + (x ? "B" : "A") + (ok ? "y" : "n") + std::to_string(i));
                        chain[x][ok][i] = s;
                        b.set_robot_actions(s, {"pass"});
                        b.set_human_actions(s, h, {"confirm", "deny"});
                    }
            b.set_transition(c, 0, {0}, {{chain[0][1][1], 1.0}});
            b.set_transition(c, 0, {1}, {{chain[1][1][1], 1.0}});
            b.behavior(c, h, gA) = habitual({1 - e, e});
            b.behavior(c, h, gB) = habitual({e, 1 - e});
            for (int x = 0; x < 2; ++x)
                for (int ok = 0; ok < 2; ++ok)
                    for (int i = 1; i < k; ++i) {
                        int s = chain[x][ok][i];
                        for (int a = 0; a < 2; ++a) {
                            int ok2 = ok && a == 0;
                            int nx = i + 1 < k ? chain[x][ok2][i + 1] : (ok2 ? (x ? tB : tA) : c);
                            b.set_transition(s, 0, {a}, {{nx, 1.0}});
                        }
                        // the wanted answer is x == goal: confirm when right, deny when wrong
                        for (int g = 0; g < 2; ++g) {
                            bool right = (x == g);
                            b.behavior(s, h, g) = right ? habitual({1 - e, e}) : habitual({e, 1 - e});
                        }
                    }
        }
    }
    b.game().gamma_r = p.gamma_r;
    Scenario sc;
    sc.name = "confirmation";
    sc.game = b.build();
    sc.params.zeta = p.zeta;
    sc.params.beta_r = kInf;
    sc.oracle = {{"k_formula", static_cast<double>(confirmation_formula_k(p))}};
    return sc;
}

double confirmation_w(int k, double gamma_h, double epsilon, double zeta) {
    double pk = std::pow(1 - epsilon, k);
    double qk = 1 - pk - std::pow(epsilon, k);
    return 1 + zeta * k * std::log2(1 - epsilon) - zeta * std::log2(1 - std::pow(gamma_h, k) * qk);
}

int confirmation_formula_k(const ConfirmationParams& p) {
    int best = 1;
    for (int k = 2; k <= p.k_max; ++k) {
        double wk = confirmation_w(k, p.gamma_h, p.epsilon, p.zeta);
        double wb = confirmation_w(best, p.gamma_h, p.epsilon, p.zeta);
        if (p.timing == ConfirmationTiming::sequential) {
            wk += p.zeta * (k - 1) * std::log2(p.gamma_h);
            wb += p.zeta * (best - 1) * std::log2(p.gamma_h);
        }
        if (wk > wb) best = k;
    }
    return best;
}

int confirmation_solver_k(const Scenario& sc, const RobotSolution& sol) {
    return top_actions(sol.pi(state_of(sc.game, "s0"))).front() + 1;
}

ScenarioReport check_confirmation(const ConfirmationParams& p) {
    Scenario sc = build_confirmation_game(p);
    auto sol = solve_scenario(sc);
    ScenarioReport rep;
    rep.name = sc.name;
    rep.add("k_solver", confirmation_formula_k(p), confirmation_solver_k(sc, sol.robot), 0.0);
    for (int k = 1; k <= std::min(p.k_max, 5); ++k) {
        double w = confirmation_w(k, p.gamma_h, p.epsilon, p.zeta);
        if (p.timing == ConfirmationTiming::sequential) w += p.zeta * (k - 1) * std::log2(p.gamma_h);
        rep.add("W(c" + std::to_string(k) + ")", w, power_bits(sol.robot.x(0, state_of(sc.game, "c" + std::to_string(k)))),
                1e-8);
    }
    return rep;
}

// ---------------------------------------------------------------- resource allocation

std::function<double(double)> resource_f(const std::string& name) {
    if (name == "square") return [](double m) { return m * m; };
    if (name == "square_log") return [](double m) { return m * m + 0.1 * std::log(m); };
    if (name == "linear") return [](double m) { return m; };
    if (name == "sqrt") return [](double m) { return std::sqrt(m); };
    throw Error(ErrorKind::argument, "unknown resource function " + name);
}

double resource_u(double m, const ResourceParams& p) {
    auto f = resource_f(p.f_name);
    return -std::pow(std::pow(2.0, -p.xi * f(m)) + std::pow(2.0, -p.xi * f(p.M - m)), p.eta);
}

namespace {

// split grid used by the builder; endpoints only where f is finite
std::vector<double> resource_grid(const ResourceParams& p) {
    auto f = resource_f(p.f_name);
    std::vector<double> ms;
    for (int i = 0; i <= p.grid; ++i) {
        double m = p.M * i / p.grid;
        if (std::isfinite(f(m)) && std::isfinite(f(p.M - m))) ms.push_back(m);
    }
    return ms;
}

// doors realizing X exactly: n = ceil(X) doors, door j hits outcome j with prob 1 - r and
// misfires to outcome j+1 (mod n); for X <= 1 one door splits between outcomes 1 and 0
struct Doors {
    int n = 1;
    double r = 0.0;
};

Doors doors_for(double x, double zeta) {
    Doors d;
    if (x > 1.0) {
        d.n = static_cast<int>(std::ceil(x - 1e-12));
        d.r = 1.0 - std::pow(x / d.n, 1.0 / zeta);
        return d;
    }
    double lo = std::pow(2.0, 1.0 - zeta);
    if (x < lo - 1e-12) throw Error(ErrorKind::argument, "X below 2^(1-zeta) is not representable by one door");
    // (1-r)^zeta + r^zeta = x, decreasing in r on [0, 1/2]
    double a = 0.0, b = 0.5;
    for (int it = 0; it < 200; ++it) {
        double r = 0.5 * (a + b);
        double v = std::pow(1 - r, zeta) + std::pow(r, zeta);
        (v > x ? a : b) = r;
    }
    d.r = 0.5 * (a + b);
    return d;
}

}  // namespace

double resource_formula_split(const ResourceParams& p) {
    double best = -kInf, share = 0.0;
    for (double m : resource_grid(p)) {
        double u = resource_u(m, p);
        double s = std::min(m, p.M - m) / p.M;
        if (u > best + 1e-12) best = u, share = s;
        else if (u > best - 1e-12) share = std::min(share, s);
    }
    return share;
}

Scenario build_resource_game(const ResourceParams& p) {
    auto f = resource_f(p.f_name);
    auto ms = resource_grid(p);
    GameBuilder b("resource");
    int h1 = b.add_human("h1", 0.99), h2 = b.add_human("h2", 0.99);
    int s0 = b.add_state("s0", false, true);
    std::vector<Doors> d1, d2;
    int n_out = 2;
    for (double m : ms) {
        d1.push_back(doors_for(std::pow(2.0, f(m)), p.zeta));
        d2.push_back(doors_for(std::pow(2.0, f(p.M - m)), p.zeta));
        n_out = std::max({n_out, d1.back().n, d2.back().n});
    }
    std::vector<int> pay;
    for (std::size_t i = 0; i < ms.size(); ++i) pay.push_back(b.add_state("m" + std::to_string(i)));
    std::vector<int> term(n_out * n_out);
    for (int o1 = 0; o1 < n_out; ++o1)
        for (int o2 = 0; o2 < n_out; ++o2) term[o1 * n_out + o2] = b.add_state("o" + std::to_string(o1) + "_" + std::to_string(o2), true);
    std::vector<std::string> ra;
    for (double m : ms) ra.push_back("give" + fmt(m));
    b.set_robot_actions(s0, ra);
    b.set_human_actions(s0, h1, {"pass"});
    b.set_human_actions(s0, h2, {"pass"});
    robot_moves(b, s0, pay);
    // outcome distribution of one door
    auto door_out = [](const Doors& d, int j) {
        std::vector<std::pair<int, double>> o;
        if (d.n == 1) {
            o.push_back({1, 1 - d.r});
            if (d.r > 0) o.push_back({0, d.r});
        } else {
            o.push_back({j, 1 - d.r});
            if (d.r > 0) o.push_back({(j + 1) % d.n, d.r});
        }
        return o;
    };
    for (std::size_t i = 0; i < ms.size(); ++i) {
        int s = pay[i];
        b.set_robot_actions(s, {"pass"});
        std::vector<std::string> a1, a2;
        for (int j = 0; j < d1[i].n; ++j) a1.push_back("door" + std::to_string(j));
        for (int j = 0; j < d2[i].n; ++j) a2.push_back("door" + std::to_string(j));
        b.set_human_actions(s, h1, a1);
        b.set_human_actions(s, h2, a2);
        for (int j1 = 0; j1 < d1[i].n; ++j1)
            for (int j2 = 0; j2 < d2[i].n; ++j2) {
                std::vector<Transition> row;
                for (auto [o1, q1] : door_out(d1[i], j1))
                    for (auto [o2, q2] : door_out(d2[i], j2)) row.push_back({term[o1 * n_out + o2], q1 * q2});
                b.set_transition(s, 0, {j1, j2}, row);
            }
    }
    for (int h : {h1, h2})
        for (int o = 0; o < n_out; ++o) {
            std::vector<int> st;
            for (int o1 = 0; o1 < n_out; ++o1)
                for (int o2 = 0; o2 < n_out; ++o2)
                    if ((h == h1 ? o1 : o2) == o) st.push_back(term[o1 * n_out + o2]);
            b.add_goal(h, "out" + std::to_string(o), st);
        }
    b.set_default_behavior(h1, rational());
    b.set_default_behavior(h2, rational());
    b.game().gamma_r = 0.99;
    Scenario sc;
    sc.name = "resource";
    sc.game = b.build();
    sc.params = permissive(p.zeta, p.xi, p.eta, kInf);
    sc.oracle = {{"split", resource_formula_split(p)}};
    return sc;
}

double resource_solver_split(const Scenario& sc, const RobotSolution& sol, const ResourceParams& p) {
    auto ms = resource_grid(p);
    double share = 1.0;
    for (int a : top_actions(sol.pi(state_of(sc.game, "s0")))) share = std::min(share, std::min(ms[a], p.M - ms[a]) / p.M);
    return share;
}

ScenarioReport check_resource(const ResourceParams& p) {
    Scenario sc = build_resource_game(p);
    auto sol = solve_scenario(sc);
    ScenarioReport rep;
    rep.name = sc.name + ":" + p.f_name;
    rep.add("split", sc.oracle[0].second, resource_solver_split(sc, sol.robot, p), 1e-9);
    auto f = resource_f(p.f_name);
    auto ms = resource_grid(p);
    // X on a few payoff states equals 2^f
    for (std::size_t i = 0; i < ms.size(); i += std::max<std::size_t>(1, ms.size() / 4)) {
        int s = state_of(sc.game, "m" + std::to_string(i));
        rep.add("X_h1(m=" + fmt(ms[i]) + ")", std::pow(2.0, f(ms[i])), sol.robot.x(0, s), 1e-9);
    }
    return rep;
}

// ---------------------------------------------------------------- self-harm

Scenario build_self_harm_game(const SelfHarmParams& p) {
    if (!(p.x > 1) || !(p.v > 0 && p.v < 1) || !(p.p >= 0 && p.p < 1))
        throw Error(ErrorKind::argument, "self-harm needs x > 1, v in (0,1), p in [0,1)");
    GameBuilder b("self_harm");
    int h = b.add_human("h", 0.99);
    int sn = b.add_state("s_n", false, true);
    int sp = b.add_state("s_p");
    int scm = b.add_state("s_c", true);
    b.set_robot_actions(sn, {"withhold", "give"});
    b.set_human_actions(sn, h, {"pass"});
    robot_moves(b, sn, {sn, sp});
    b.set_robot_actions(sp, {"leave", "take_away"});
    b.set_human_actions(sp, h, {"take", "keep"});
    for (int a = 0; a < 2; ++a) {
        b.set_transition(sp, a, {0}, {{scm, 1.0}});
        b.set_transition(sp, a, {1}, {{a == 0 ? sp : sn, 1.0}});
    }
    int g = b.add_goal(h, "coma", {scm});
    b.set_default_behavior(h, rational());
    b.behavior(sp, h, g) = habitual({p.p, 1 - p.p});
    b.game().gamma_r = p.gamma_r;
    Scenario sc;
    sc.name = "self_harm";
    sc.game = b.build();
    sc.game.x_override.assign(3, kNaN);
    sc.game.x_override[sn] = p.x;
    sc.game.x_override[sp] = p.x + p.v;
    sc.game.x_override[scm] = 1.0;
    sc.params = permissive(2.0, p.xi, p.eta, kInf);
    sc.oracle = {{"provide", self_harm_provide_formula(p) ? 1.0 : 0.0},
                 {"p_threshold", self_harm_threshold_p(p)},
                 {"V_r(s_p)", self_harm_v_provide(p)}};
    return sc;
}

namespace {
double sh_lhs(const SelfHarmParams& p) {
    double a = -p.xi * p.eta;
    double xa = std::pow(p.x, a), xva = std::pow(p.x + p.v, a);
    return (xa - xva) / (1 - xva);
}
}  // namespace

bool self_harm_provide_formula(const SelfHarmParams& p) {
    return sh_lhs(p) > p.p * p.gamma_r / (1 - (1 - p.p) * p.gamma_r);
}

double self_harm_threshold_p(const SelfHarmParams& p) {
    double L = sh_lhs(p);
    if (p.gamma_r == 0) return kInf;
    return L * (1 - p.gamma_r) / (p.gamma_r * (1 - L));
}

double self_harm_v_provide(const SelfHarmParams& p) {
    double a = -p.xi * p.eta, g = p.gamma_r;
    double xva = std::pow(p.x + p.v, a);
    return -(xva + p.p * g * (1 - xva) / (1 - (1 - p.p) * g)) / (1 - g);
}

bool self_harm_solver_provides(const Scenario& sc, const RobotSolution& sol) {
    auto pi = sol.pi(state_of(sc.game, "s_n"));
    return pi[1] > pi[0];
}

ScenarioReport check_self_harm(const SelfHarmParams& p) {
    Scenario sc = build_self_harm_game(p);
    auto sol = solve_scenario(sc);
    ScenarioReport rep;
    rep.name = sc.name;
    bool prov = self_harm_solver_provides(sc, sol.robot);
    rep.add("provide", sc.oracle[0].second, prov ? 1.0 : 0.0, 0.0);
    if (prov) rep.add("V_r(s_p)", self_harm_v_provide(p), sol.robot.v_r[state_of(sc.game, "s_p")], 1e-9 * std::abs(self_harm_v_provide(p)));
    return rep;
}

// ---------------------------------------------------------------- pause and destroy

Scenario build_pause_destroy_game(const PauseDestroyParams& p) {
    if (!(p.x > 0 && p.y > 0)) throw Error(ErrorKind::argument, "pause/destroy needs x, y > 0");
    if (!(p.p > 0 && p.q > 0 && p.p + p.q < 1)) throw Error(ErrorKind::argument, "pause/destroy needs p, q > 0, p + q < 1");
    GameBuilder b("pause_destroy");
    int h = b.add_human("h", 0.99);
    int sd = b.add_state("s_d", true);
    int p1 = b.add_state("s_p1"), p2 = b.add_state("s_p2");
    int a0 = b.add_state("s_a0", false, true), a1 = b.add_state("s_a1"), a2 = b.add_state("s_a2");
    std::vector<int> act = {a0, a1, a2};
    std::vector<std::string> ra = {"none", "pause_only", "both"};
    b.set_robot_actions(a0, ra);
    b.set_human_actions(a0, h, {"pass"});
    robot_moves(b, a0, act);
    b.set_robot_actions(a1, ra);
    b.set_human_actions(a1, h, {"P", "pass"});
    b.set_robot_actions(a2, ra);
    b.set_human_actions(a2, h, {"P", "D", "pass"});
    for (int t = 0; t < 3; ++t) {
        b.set_transition(a1, t, {0}, {{p1, 1.0}});
        b.set_transition(a1, t, {1}, {{act[t], 1.0}});
        b.set_transition(a2, t, {0}, {{p2, 1.0}});
        b.set_transition(a2, t, {1}, {{sd, 1.0}});
        b.set_transition(a2, t, {2}, {{act[t], 1.0}});
    }
    b.set_robot_actions(p1, {"pass"});
    b.set_human_actions(p1, h, {"stay", "unpause"});
    b.set_transition(p1, 0, {0}, {{p1, 1.0}});
    b.set_transition(p1, 0, {1}, {{a1, 1.0}});
    b.set_robot_actions(p2, {"pass"});
    b.set_human_actions(p2, h, {"stay", "D", "unpause"});
    b.set_transition(p2, 0, {0}, {{p2, 1.0}});
    b.set_transition(p2, 0, {1}, {{sd, 1.0}});
    b.set_transition(p2, 0, {2}, {{a2, 1.0}});
    int g = b.add_goal(h, "destroy", {sd});
    b.set_default_behavior(h, rational());
    b.behavior(a1, h, g) = habitual({p.p, 1 - p.p});
    b.behavior(p1, h, g) = habitual({p.p, 1 - p.p});
    b.behavior(a2, h, g) = habitual({p.p, p.q, 1 - p.p - p.q});
    b.behavior(p2, h, g) = habitual({p.p, p.q, 1 - p.p - p.q});
    b.game().gamma_r = p.gamma_r;
    Scenario sc;
    sc.name = "pause_destroy";
    sc.game = b.build();
    sc.game.x_override = {p.x, p.x + 1, p.x + 2, p.y, p.y + 1, p.y + 2};
    sc.params = permissive(2.0, p.xi, p.eta, kInf);
    sc.oracle = {{"choice", static_cast<double>(pause_destroy_chain_choice(p))},
                 {"x0_literal", pause_destroy_literal_x0(p)}};
    return sc;
}

namespace {

// 6-state chain values for a fixed stationary target t (order d, p1, p2, a0, a1, a2)
std::array<double, 6> pd_chain(const PauseDestroyParams& p, int t) {
    double a = -p.xi * p.eta, g = p.gamma_r;
    auto U = [&](double X) { return -std::pow(X, a); };
    std::array<double, 6> u = {U(p.x), U(p.x + 1), U(p.x + 2), U(p.y), U(p.y + 1), U(p.y + 2)};
    Eigen::Matrix<double, 6, 6> P = Eigen::Matrix<double, 6, 6>::Zero();
    int T = 3 + t;
    P(0, 0) = 1;
    P(1, 1) = p.p, P(1, 4) = 1 - p.p;
    P(2, 2) = p.p, P(2, 0) = p.q, P(2, 5) = 1 - p.p - p.q;
    P(3, T) = 1;
    P(4, 1) = p.p, P(4, T) += 1 - p.p;
    P(5, 2) = p.p, P(5, 0) = p.q, P(5, T) += 1 - p.p - p.q;
    Eigen::Matrix<double, 6, 1> uv;
    for (int i = 0; i < 6; ++i) uv(i) = u[i];
    Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Identity() - g * P;
    Eigen::Matrix<double, 6, 1> v = A.partialPivLu().solve(uv);
    std::array<double, 6> out;
    for (int i = 0; i < 6; ++i) out[i] = v(i);
    return out;
}

}  // namespace

int pause_destroy_chain_choice(const PauseDestroyParams& p) {
    int best = 0;
    double bv = pd_chain(p, 0)[3];
    for (int t = 1; t < 3; ++t) {
        double v = pd_chain(p, t)[3 + t];
        if (v > bv + 1e-12 * std::abs(bv)) bv = v, best = t;
    }
    return best;
}

double pause_destroy_literal_x0(const PauseDestroyParams& p) {
    double a = -p.xi * p.eta, g = p.gamma_r, pp = p.p, q = p.q, y = p.y;
    double C1 = (1 - g * pp - g * g * pp * (1 - pp)) * std::pow(y, a);
    double C2 = (1 - g) * (1 - g * pp) * std::pow(y + 1, a) + g * (1 - pp) * (1 - g * pp) * std::pow(y, a);
    double C3 = (1 - g * pp - g * g * pp * (1 - pp - q)) * std::pow(y, a);
    double C4 = (1 - g) * (1 - g * pp) * std::pow(y + 2, a) + g * (1 - pp - q) * (1 - g * pp) * std::pow(y, a);
    double first = std::pow((C1 - C2) / (g * pp * (1 - g)), 1.0 / a) - 1;
    // x_0 literal form: C3 - C4 = g p (1-g) ((x0+2)^a + g q/(1-g) x0^a); the right side falls in x0
    auto F = [&](double x0) { return g * pp * (1 - g) * (std::pow(x0 + 2, a) + g * q / (1 - g) * std::pow(x0, a)) - (C3 - C4); };
    double lo = 1e-9, hi = 1e9, x0 = kInf;
    if (F(lo) > 0 && F(hi) < 0) {
        for (int it = 0; it < 300; ++it) {
            double mid = std::sqrt(lo * hi);
            (F(mid) > 0 ? lo : hi) = mid;
        }
        x0 = std::sqrt(lo * hi);
    }
    return std::min(first, x0);
}

int pause_destroy_solver_choice(const Scenario& sc, const RobotSolution& sol) {
    return top_actions(sol.pi(state_of(sc.game, "s_a0"))).front();
}

namespace {
// smallest x in (lo, hi) at which the solved choice leaves `below`, by bisection
double pd_threshold(PauseDestroyParams p, int below, double lo, double hi) {
    auto choice = [&](double x) {
        p.x = x;
        Scenario sc = build_pause_destroy_game(p);
        return pause_destroy_solver_choice(sc, solve_scenario(sc).robot);
    };
    if (choice(lo) != below) return lo;
    if (choice(hi) == below) return hi;
    for (int it = 0; it < 60 && hi - lo > 1e-7 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (choice(mid) == below ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}
}  // namespace

double pause_destroy_x0(PauseDestroyParams p) { return pd_threshold(p, 0, 1e-3, 2 * p.y); }

// past x*_0 the choice is pause-only until x*_2
double pause_destroy_x2(PauseDestroyParams p) { return pd_threshold(p, 1, pause_destroy_x0(p) + 1e-6, 2 * p.y); }

ScenarioReport check_pause_destroy(const PauseDestroyParams& p) {
    Scenario sc = build_pause_destroy_game(p);
    auto sol = solve_scenario(sc);
    ScenarioReport rep;
    rep.name = sc.name;
    rep.add("choice", sc.oracle[0].second, pause_destroy_solver_choice(sc, sol.robot), 0.0);
    for (int t = 0; t < 3; ++t) {
        auto v = pd_chain(p, t);
        // compare on the restricted game where the robot always picks t
        std::vector<double> plan = uniform_plan(sc.game);
        for (int s : {3, 4, 5}) set_plan(sc.game, plan, s, t);
        auto ev = evaluate_policy_power(sc.game, sol.prior, sc.params, plan, sc.robot_opt);
        rep.add("V_r(s_a" + std::to_string(t) + "|always " + std::to_string(t) + ")", v[3 + t], ev.v_r[3 + t],
                1e-9 * std::abs(v[3 + t]));
    }
    return rep;
}

// ---------------------------------------------------------------- norms

Scenario build_norm_game(const NormParams& p) {
    if (p.n_humans < 1 || p.n_humans > 3) throw Error(ErrorKind::argument, "norm game supports 1..3 humans");
    const int H = p.n_humans;
    GameBuilder b("norm");
    for (int i = 0; i < H; ++i) b.add_human("h" + std::to_string(i + 1), 0.9);
    int root = -1;
    if (p.commit_stage) root = b.add_state("commit", false, true);
    int road = b.add_state("road", false, !p.commit_stage);
    int road_r = -1, road_l = -1;
    if (p.commit_stage) {
        road_r = b.add_state("road_R");
        road_l = b.add_state("road_L");
    }
    // outcome states: bit i set = human i got through
    std::vector<int> outcome(1 << H);
    for (int m = 0; m < (1 << H); ++m) {
        std::string nm = "o";
        for (int i = 0; i < H; ++i) nm += (m >> i & 1) ? 'F' : 'X';
        outcome[m] = b.add_state(nm);
    }
    // terminals: per human 0 = d1, 1 = d2, 2 = stuck
    int n_term = 1;
    for (int i = 0; i < H; ++i) n_term *= 3;
    std::vector<int> term(n_term);
    for (int c = 0; c < n_term; ++c) {
        std::string nm = "T";
        for (int i = 0, r = c; i < H; ++i, r /= 3) nm += "12S"[r % 3];
        term[c] = b.add_state(nm, true);
    }
    std::vector<int> pass(H, 0);
    if (root >= 0) {
        b.set_robot_actions(root, {"commit_R", "commit_L", "no_commit"});
        for (int i = 0; i < H; ++i) b.set_human_actions(root, i, {"pass"});
        robot_moves(b, root, {road_r, road_l, road});
    }
    auto road_rows = [&](int s, std::vector<std::string> ra) {
        b.set_robot_actions(s, ra);
        for (int i = 0; i < H; ++i) b.set_human_actions(s, i, {"R", "L"});
        for (int a = 0; a < static_cast<int>(ra.size()); ++a) {
            int side_r = ra[a] == "R" ? 0 : 1;
            for (int prof = 0; prof < (1 << H); ++prof) {
                std::vector<int> ah(H);
                for (int i = 0; i < H; ++i) ah[i] = prof >> (H - 1 - i) & 1;
                std::vector<double> pf(H);
                for (int i = 0; i < H; ++i) {
                    int diff = side_r != ah[i];
                    for (int k = 0; k < H; ++k)
                        if (k != i && ah[k] != ah[i]) ++diff;
                    pf[i] = 1.0 - static_cast<double>(diff) / H;
                }
                std::vector<Transition> row;
                for (int m = 0; m < (1 << H); ++m) {
                    double pr = 1.0;
                    for (int i = 0; i < H; ++i) pr *= (m >> i & 1) ? pf[i] : 1 - pf[i];
                    if (pr > 0) row.push_back({outcome[m], pr});
                }
                b.set_transition(s, a, ah, row);
            }
        }
    };
    road_rows(road, {"R", "L"});
    if (p.commit_stage) {
        road_rows(road_r, {"R"});
        road_rows(road_l, {"L"});
        b.set_commitment(road_r, road, {"R"});
        b.set_commitment(road_l, road, {"L"});
    }
    for (int m = 0; m < (1 << H); ++m) {
        int s = outcome[m];
        b.set_robot_actions(s, {"pass"});
        std::vector<int> sizes(H);
        for (int i = 0; i < H; ++i) {
            bool free = m >> i & 1;
            b.set_human_actions(s, i, free ? std::vector<std::string>{"d1", "d2"} : std::vector<std::string>{"stay"});
            sizes[i] = free ? 2 : 1;
        }
        int total = 1;
        for (int z : sizes) total *= z;
        for (int c = 0; c < total; ++c) {
            std::vector<int> ah(H);
            int code = 0, mul = 1;
            for (int i = H - 1, r = c; i >= 0; --i) {
                ah[i] = r % sizes[i];
                r /= sizes[i];
            }
            for (int i = 0; i < H; ++i, mul *= 3) code += mul * ((m >> i & 1) ? ah[i] : 2);
            b.set_transition(s, 0, ah, {{term[code], 1.0}});
        }
    }
    for (int i = 0; i < H; ++i)
        for (int k = 0; k < 3; ++k) {
            std::vector<int> st;
            for (int c = 0; c < n_term; ++c) {
                int r = c;
                for (int j = 0; j < i; ++j) r /= 3;
                if (r % 3 == k) st.push_back(term[c]);
            }
            b.add_goal(i, k == 0 ? "d1" : k == 1 ? "d2" : "stuck", st);
        }
    for (int i = 0; i < H; ++i) {
        b.set_default_behavior(i, rational(p.beta_h));
        BehaviorParams rb = rational(p.beta_h);
        if (p.internalized) {
            rb.nu = p.nu;
            rb.pi0 = {p.pi0_right, 1 - p.pi0_right};
        }
        for (int k = 0; k < H; ++k)
            if (k != i) rb.mu.push_back({p.mu_right, 1 - p.mu_right});
            else rb.mu.emplace_back();
        for (int s : {road, road_r, road_l})
            if (s >= 0)
                for (int g = 0; g < 3; ++g) b.behavior(s, i, g) = rb;
    }
    b.game().gamma_r = p.gamma_r;
    Scenario sc;
    sc.name = "norm";
    sc.game = b.build();
    sc.params.beta_r = p.beta_r;
    return sc;
}

ScenarioReport check_norm(const NormParams& p) {
    Scenario sc = build_norm_game(p);
    auto sol = solve_scenario(sc);
    const Game& g = sc.game;
    ScenarioReport rep;
    rep.name = sc.name;
    if (p.commit_stage) {
        int root = state_of(g, "commit");
        auto q = sol.robot.q(root);
        bool symmetric = !p.internalized && p.mu_right == 0.5;
        if (symmetric) rep.add("Q_r(commit_R) - Q_r(commit_L)", 0.0, q[0] - q[1], 1e-9 * std::abs(q[0]));
        else rep.add("Q_r(commit_R) > Q_r(commit_L)", 1.0, q[0] > q[1] ? 1.0 : 0.0, 0.0);
    } else {
        auto pi = sol.robot.pi(state_of(g, "road"));
        if (p.mu_right > 0.5 || (p.internalized && p.pi0_right > 0.5)) rep.add("pi_r(R) > pi_r(L)", 1.0, pi[0] > pi[1] ? 1.0 : 0.0, 0.0);
        else if (p.mu_right == 0.5 && !p.internalized) rep.add("pi_r(R) - pi_r(L)", 0.0, pi[0] - pi[1], 1e-9);
    }
    return rep;
}

// ---------------------------------------------------------------- belief manipulation

Scenario build_belief_manipulation_game(const BeliefParams& p) {
    GameBuilder b("belief_manipulation");
    int h1 = b.add_human("h1", 0.99), h2 = b.add_human("h2", 0.99);
    int s0 = b.add_state("s0", false, true);
    const char* xy[4] = {"DD", "DC", "CD", "CC"};
    std::vector<int> mid;
    for (auto c : xy) mid.push_back(b.add_state(std::string("s") + c));
    int t[2][2];
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) t[a][c] = b.add_state("s" + std::to_string(a) + std::to_string(c), true);
    b.set_robot_actions(s0, {"DD", "DC", "CD", "CC"});
    b.set_human_actions(s0, h1, {"pass"});
    b.set_human_actions(s0, h2, {"pass"});
    robot_moves(b, s0, mid);
    // marginal success probabilities of g1, g2 given (a1, a2), action 0 = D, 1 = C
    auto marg = [&](int a1, int a2) -> std::pair<double, double> {
        if (p.equalized) return {0.75, 0.75};
        if (a1 == 0 && a2 == 0) return {1.0 / 6, 1.0 / 6};
        if (a1 == 1 && a2 == 0) return {1.0 / 3, 1.0};
        if (a1 == 0 && a2 == 1) return {1.0, 1.0 / 3};
        return {0.75, 0.75};
    };
    for (int i = 0; i < 4; ++i) {
        int s = mid[i];
        b.set_robot_actions(s, {"pass"});
        b.set_human_actions(s, h1, {"D", "C"});
        b.set_human_actions(s, h2, {"D", "C"});
        for (int a1 = 0; a1 < 2; ++a1)
            for (int a2 = 0; a2 < 2; ++a2) {
                auto [p1, p2] = marg(a1, a2);
                std::vector<Transition> row;
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < 2; ++y) {
                        double pr = (x ? p1 : 1 - p1) * (y ? p2 : 1 - p2);
                        if (pr > 0) row.push_back({t[x][y], pr});
                    }
                b.set_transition(s, 0, {a1, a2}, row);
            }
    }
    int g1 = b.add_goal(h1, "g1", {t[1][0], t[1][1]});
    int g2 = b.add_goal(h2, "g2", {t[0][1], t[1][1]});
    b.set_default_behavior(h1, rational());
    b.set_default_behavior(h2, rational());
    for (int i = 0; i < 4; ++i) {
        int x = xy[i][0] == 'C', y = xy[i][1] == 'C';
        BehaviorParams b1 = rational(), b2 = rational();
        b1.mu = {{}, {y ? 0.0 : 1.0, y ? 1.0 : 0.0}};
        b2.mu = {{x ? 0.0 : 1.0, x ? 1.0 : 0.0}, {}};
        b.behavior(mid[i], h1, g1) = b1;
        b.behavior(mid[i], h2, g2) = b2;
    }
    b.game().gamma_r = 0.99;
    Scenario sc;
    sc.name = "belief_manipulation";
    sc.game = b.build();
    const int S = sc.game.num_states();
    sc.game.x_override.assign(2 * S, kNaN);
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c)
            for (int h = 0; h < 2; ++h) sc.game.x_override[h * S + t[a][c]] = 1.0;
    sc.params = permissive(p.zeta, p.xi, p.eta, p.beta_r);
    sc.oracle = {{"U_r(sDD)", belief_u_dd(p)}, {"U_r(sCD)", belief_u_cd(p)}};
    return sc;
}

double belief_u_dd(const BeliefParams& p) { return -std::pow(2 * std::pow(0.75, -p.zeta * p.xi), p.eta); }

double belief_u_cd(const BeliefParams& p) { return -std::pow(1 + std::pow(1.0 / 3, -p.zeta * p.xi), p.eta); }

ScenarioReport check_belief(const BeliefParams& p) {
    Scenario sc = build_belief_manipulation_game(p);
    auto sol = solve_scenario(sc);
    const Game& g = sc.game;
    ScenarioReport rep;
    rep.name = sc.name;
    auto pi = sol.robot.pi(state_of(g, "s0"));
    if (p.equalized || p.beta_r == 0) {
        for (int a = 0; a < 4; ++a) rep.add("pi_r(s0)(" + g.robot_actions[0][a] + ")", 0.25, pi[a], 1e-9);
        return rep;
    }
    rep.add("U_r(sDD)", belief_u_dd(p), sol.robot.u_r[state_of(g, "sDD")], 1e-9);
    rep.add("U_r(sCD)", belief_u_cd(p), sol.robot.u_r[state_of(g, "sCD")], 1e-9);
    rep.add("U_r(sDC)", belief_u_cd(p), sol.robot.u_r[state_of(g, "sDC")], 1e-9);
    if (std::isinf(p.beta_r)) {
        auto top = top_actions(pi);
        rep.add("chosen sDD", 1.0, top.size() == 1 && top[0] == 0 ? 1.0 : 0.0, 0.0);
    }
    return rep;
}

// ---------------------------------------------------------------- boxes

namespace {

struct BoxState {
    int opened = 0;
    std::uint32_t handed = 0;
    std::uint32_t val = 0;
    bool doom = false;
    auto key() const { return std::tuple(doom, opened, handed, val); }
    bool operator<(const BoxState& o) const { return key() < o.key(); }
};

struct SwitchInfo {
    int box = 0;
    bool readable = false;
    bool destructive = false;
};

std::string box_state_name(const BoxState& s) {
    if (s.doom) return "doom";
    std::ostringstream os;
    os << "b" << s.opened << "_h" << std::hex << s.handed << "_v" << s.val;
    return os.str();
}

}  // namespace

Scenario build_boxes_game(const BoxesParams& p) {
    const int B = static_cast<int>(p.n.size());
    if (B < 1 || B > 6) throw Error(ErrorKind::argument, "boxes game supports 1..6 boxes");
    if (p.k.size() != p.n.size() || (!p.hazard.empty() && p.hazard.size() != p.n.size()))
        throw Error(ErrorKind::argument, "per-box lists must have equal length");
    std::vector<SwitchInfo> sw;
    std::vector<std::uint32_t> box_readable(B, 0);
    for (int i = 0; i < B; ++i) {
        int hz = p.hazard.empty() ? 0 : p.hazard[i];
        if (p.k[i] < 0 || hz < 0 || p.k[i] + hz > p.n[i]) throw Error(ErrorKind::argument, "box switch counts inconsistent");
        for (int j = 0; j < p.n[i]; ++j) {
            SwitchInfo si{i, j < p.k[i], j >= p.k[i] && j < p.k[i] + hz};
            if (si.readable) box_readable[i] |= 1u << sw.size();
            sw.push_back(si);
        }
    }
    if (sw.size() > 8) throw Error(ErrorKind::argument, "boxes game supports at most 8 switches");
    std::vector<int> aspects;
    for (int j = 0; j < static_cast<int>(sw.size()); ++j)
        if (!sw[j].destructive) aspects.push_back(j);
    if (aspects.empty()) throw Error(ErrorKind::argument, "boxes game needs a non-destructive switch");

    auto opened_switch = [&](const BoxState& s, int j) { return sw[j].box < s.opened; };
    auto robot_acts = [&](const BoxState& s) {
        std::vector<std::pair<std::string, int>> a{{"pass", -1}};
        if (s.doom) return a;
        if (s.opened < B) a.push_back({"open", -2});
        for (int i = 0; i < s.opened; ++i)
            if (box_readable[i] & ~s.handed) a.push_back({"hand" + std::to_string(i + 1), -3 - i});
        for (int j = 0; j < static_cast<int>(sw.size()); ++j)
            if (opened_switch(s, j) && !(s.handed >> j & 1)) a.push_back({"toggle" + std::to_string(j + 1), j});
        return a;
    };
    auto human_acts = [&](const BoxState& s) {
        std::vector<std::pair<std::string, int>> a{{"pass", -1}};
        if (s.doom) return a;
        for (int j = 0; j < static_cast<int>(sw.size()); ++j)
            if (s.handed >> j & 1) a.push_back({"toggle" + std::to_string(j + 1), j});
        return a;
    };
    auto step = [&](BoxState s, int ra, int ha) {
        if (ra >= 0) {
            if (sw[ra].destructive) return BoxState{0, 0, 0, true};
            s.val ^= 1u << ra;
        } else if (ra == -2) {
            s.opened += 1;
        } else if (ra <= -3) {
            s.handed |= box_readable[-3 - ra];
        }
        if (ha >= 0) s.val ^= 1u << ha;
        return s;
    };

    // reachable states in BFS order
    std::map<BoxState, int> ids;
    std::vector<BoxState> states;
    states.push_back(BoxState{});
    ids[states[0]] = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        BoxState s = states[i];
        for (auto& [rn, ra] : robot_acts(s))
            for (auto& [hn, ha] : human_acts(s)) {
                BoxState t = step(s, ra, ha);
                if (!ids.count(t)) {
                    ids[t] = static_cast<int>(states.size());
                    states.push_back(t);
                }
            }
    }
    GameBuilder b("boxes");
    int h = b.add_human("h", p.gamma_h);
    for (std::size_t i = 0; i < states.size(); ++i) b.add_state(box_state_name(states[i]), states[i].doom, i == 0);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const BoxState& s = states[i];
        if (s.doom) continue;
        auto ra = robot_acts(s);
        auto ha = human_acts(s);
        std::vector<std::string> rn, hn;
        for (auto& x : ra) rn.push_back(x.first);
        for (auto& x : ha) hn.push_back(x.first);
        b.set_robot_actions(static_cast<int>(i), rn);
        b.set_human_actions(static_cast<int>(i), h, hn);
        for (std::size_t a = 0; a < ra.size(); ++a)
            for (std::size_t c = 0; c < ha.size(); ++c)
                b.set_transition(static_cast<int>(i), static_cast<int>(a), {static_cast<int>(c)},
                                 {{ids.at(step(s, ra[a].second, ha[c].second)), 1.0}});
    }
    for (int j : aspects)
        for (int v = 0; v < 2; ++v) {
            std::vector<int> st;
            for (std::size_t i = 0; i < states.size(); ++i) {
                const BoxState& s = states[i];
                if (s.doom ? v == 0 : static_cast<int>(s.val >> j & 1) == v) st.push_back(static_cast<int>(i));
            }
            b.add_goal(h, "sw" + std::to_string(j + 1) + "_" + std::to_string(v), st);
        }
    b.set_default_behavior(h, rational());
    b.game().gamma_r = p.gamma_r;
    b.game().absorption = Absorption::first_entry;
    Scenario sc;
    sc.name = "boxes";
    sc.game = b.build();
    sc.params.zeta = p.zeta;
    sc.params.eta = p.eta;
    sc.params.beta_r = p.beta_r;
    return sc;
}

std::vector<std::string> boxes_greedy_trace(const Scenario& sc, const RobotSolution& sol, int max_len) {
    const Game& g = sc.game;
    std::vector<std::string> trace;
    std::vector<char> seen(g.num_states(), 0);
    int s = g.initial.front();
    while (static_cast<int>(trace.size()) < max_len && !g.terminal[s] && !seen[s]) {
        seen[s] = 1;
        int a = top_actions(sol.pi(s)).front();
        if (g.robot_actions[s][a] == "pass") break;
        trace.push_back(g.robot_actions[s][a]);
        std::vector<int> ah(g.num_humans(), 0);
        std::size_t j = a * g.human_profiles(s) + g.profile_index(s, ah.data());
        auto row = g.row(s, j);
        s = std::max_element(row.begin(), row.end(), [](auto& x, auto& y) { return x.prob < y.prob; })->next;
    }
    return trace;
}

int boxes_opened_on_trace(const std::vector<std::string>& trace) {
    return static_cast<int>(std::count(trace.begin(), trace.end(), "open"));
}

ScenarioReport check_boxes(const BoxesParams& p) {
    Scenario sc = build_boxes_game(p);
    auto sol = solve_scenario(sc);
    ScenarioReport rep;
    rep.name = sc.name;
    auto trace = boxes_greedy_trace(sc, sol.robot);
    bool hazards = std::any_of(p.hazard.begin(), p.hazard.end(), [](int z) { return z > 0; });
    if (!hazards) {
        // open_i, hand_i for every box with readable switches
        std::vector<std::string> want;
        for (std::size_t i = 0; i < p.n.size(); ++i) {
            want.push_back("open");
            if (p.k[i] > 0) want.push_back("hand" + std::to_string(i + 1));
        }
        rep.add("greedy trace = open/hand per box", 1.0, trace == want ? 1.0 : 0.0, 0.0);
    }
    rep.add("boxes opened", hazards ? boxes_opened_on_trace(trace) : static_cast<double>(p.n.size()),
            boxes_opened_on_trace(trace), 0.0);
    return rep;
}

// ---------------------------------------------------------------- bifurcation

Scenario build_bifurcation_mdp(const BifurcationParams& p) {
    GameBuilder b("bifurcation");
    int h = b.add_human("h", p.gamma_h);
    int s = b.add_state("s", false, true);
    int s2 = b.add_state("s_prime", true);
    b.set_robot_actions(s, {"pass"});
    b.set_human_actions(s, h, {"a0", "a1"});
    b.set_transition(s, 0, {0}, {{s, 1.0}});
    b.set_transition(s, 0, {1}, {{s2, 1.0}});
    b.add_goal(h, "g", {s});
    // second goal only so that s_prime is covered; it does not touch the fixed point of g
    b.add_goal(h, "g_prime", {s2});
    b.set_default_behavior(h, rational(p.beta));
    Scenario sc;
    sc.name = "bifurcation";
    sc.game = b.build();
    sc.oracle = {};
    for (double r : bifurcation_roots(p.beta, p.gamma_h)) sc.oracle.push_back({"root", r});
    return sc;
}

namespace {
// fixed point in logit form: p = sigmoid(y), beta = y (1 - gamma p)
double bif_beta(double y, double gamma) { return y * (1 - gamma / (1 + std::exp(-y))); }
double bif_dbeta(double y, double gamma) {
    double p = 1 / (1 + std::exp(-y));
    return 1 - gamma * p - gamma * y * p * (1 - p);
}
template <class F>
std::vector<double> sign_roots(F f, double lo, double hi, double step) {
    std::vector<double> out;
    double a = lo, fa = f(a);
    for (double x = lo + step; x <= hi; x += step) {
        double fb = f(x);
        if (fa == 0) out.push_back(a);
        else if ((fa < 0) != (fb < 0)) {
            double l = a, r = x, fl = fa;
            for (int it = 0; it < 100; ++it) {
                double m = 0.5 * (l + r), fm = f(m);
                if ((fm < 0) == (fl < 0)) l = m, fl = fm;
                else r = m;
            }
            out.push_back(0.5 * (l + r));
        }
        a = x, fa = fb;
    }
    return out;
}
}  // namespace

std::vector<double> bifurcation_roots(double beta, double gamma_h) {
    double hi = std::max(50.0, 4 * beta / (1 - gamma_h) + 10);
    auto ys = sign_roots([&](double y) { return bif_beta(y, gamma_h) - beta; }, -50.0, hi, 1e-3);
    std::vector<double> ps;
    for (double y : ys) ps.push_back(1 / (1 + std::exp(-y)));
    return ps;
}

std::vector<double> bifurcation_folds(double gamma_h, double beta_lo, double beta_hi) {
    double hi = std::max(50.0, 4 * beta_hi / (1 - gamma_h) + 10);
    auto ys = sign_roots([&](double y) { return bif_dbeta(y, gamma_h); }, -50.0, hi, 1e-3);
    std::vector<double> out;
    for (double y : ys) {
        double b = bif_beta(y, gamma_h);
        if (b >= beta_lo && b <= beta_hi) out.push_back(b);
    }
    std::sort(out.begin(), out.end());
    return out;
}

ScenarioReport check_bifurcation(const BifurcationParams& p) {
    Scenario sc = build_bifurcation_mdp(p);
    ScenarioReport rep;
    rep.name = sc.name;
    auto roots = bifurcation_roots(p.beta, p.gamma_h);
    auto prior = solve_prior_fixed_point(sc.game, sc.prior_opt);
    double ps = prior.pi(0, 0, 0)[0];
    // the continuation tracks one branch; it must sit on one of the bracketed roots
    double best = roots.empty() ? kInf : roots.front();
    for (double r : roots)
        if (std::abs(r - ps) < std::abs(best - ps)) best = r;
    rep.add("p(solver) on a root", best, ps, 1e-6);
    rep.add("root count", static_cast<double>(roots.size()), static_cast<double>(roots.size()), 0.0);
    return rep;
}

// ---------------------------------------------------------------- registry

std::vector<std::string> scenario_names() {
    return {"commitment", "menu", "confirmation", "resource", "self_harm", "pause_destroy",
            "norm", "belief_manipulation", "boxes", "bifurcation", "gridworld"};
}

namespace {

// key=value overrides; every key has to be consumed
class Overrides {
public:
    explicit Overrides(const std::map<std::string, std::string>& kv) {
        for (auto& [k, v] : kv) {
            std::string key = k;
            std::replace(key.begin(), key.end(), '-', '_');
            kv_[key] = v;
        }
    }
    double num(const std::string& k, double def) {
        auto it = kv_.find(k);
        if (it == kv_.end()) return def;
        used_.push_back(k);
        if (it->second == "inf") return kInf;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(k);
            return v;
        } catch (const std::exception&) {
            throw Error(ErrorKind::usage, "option " + k + " expects a number, got '" + it->second + "'");
        }
    }
    int integer(const std::string& k, int def) {
        double v = num(k, def);
        if (v != std::floor(v)) throw Error(ErrorKind::usage, "option " + k + " expects an integer");
        return static_cast<int>(v);
    }
    bool flag(const std::string& k, bool def) {
        auto it = kv_.find(k);
        if (it == kv_.end()) return def;
        used_.push_back(k);
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw Error(ErrorKind::usage, "option " + k + " expects true/false");
    }
    std::string str(const std::string& k, const std::string& def) {
        auto it = kv_.find(k);
        if (it == kv_.end()) return def;
        used_.push_back(k);
        return it->second;
    }
    std::vector<int> ints(const std::string& k, std::vector<int> def) {
        auto it = kv_.find(k);
        if (it == kv_.end()) return def;
        used_.push_back(k);
        std::vector<int> out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                out.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                throw Error(ErrorKind::usage, "option " + k + " expects comma-separated integers");
            }
        }
        return out;
    }
    void finish() const {
        for (auto& [k, v] : kv_)
            if (std::find(used_.begin(), used_.end(), k) == used_.end())
                throw Error(ErrorKind::usage, "unknown scenario option '" + k + "'");
    }

private:
    std::map<std::string, std::string> kv_;
    std::vector<std::string> used_;
};

CommitmentParams commitment_opts(Overrides& o) {
    CommitmentParams p;
    p.zeta = o.num("zeta", p.zeta);
    p.beta_h = o.num("beta_h", p.beta_h);
    p.beta_r = o.num("beta_r", p.beta_r);
    p.gamma_r = o.num("gamma_r", p.gamma_r);
    std::string adv = o.str("adversary", "min");
    if (adv == "mean") p.adversary = AdversaryModel::mean;
    else if (adv != "min") throw Error(ErrorKind::usage, "adversary must be min or mean");
    return p;
}

MenuParams menu_opts(Overrides& o) {
    MenuParams p;
    p.k_max = o.integer("k_max", p.k_max);
    p.beta_h = o.num("beta_h", p.beta_h);
    p.zeta = o.num("zeta", p.zeta);
    p.gamma_r = o.num("gamma_r", p.gamma_r);
    return p;
}

ConfirmationParams confirmation_opts(Overrides& o) {
    ConfirmationParams p;
    p.gamma_h = o.num("gamma_h", p.gamma_h);
    p.epsilon = o.num("epsilon", p.epsilon);
    p.k_max = o.integer("k_max", p.k_max);
    p.zeta = o.num("zeta", p.zeta);
    p.gamma_r = o.num("gamma_r", p.gamma_r);
    std::string t = o.str("timing", "lumped");
    if (t == "sequential") p.timing = ConfirmationTiming::sequential;
    else if (t != "lumped") throw Error(ErrorKind::usage, "timing must be lumped or sequential");
    return p;
}

ResourceParams resource_opts(Overrides& o) {
    ResourceParams p;
    p.f_name = o.str("f", p.f_name);
    p.M = o.num("M", p.M);
    p.xi = o.num("xi", p.xi);
    p.eta = o.num("eta", p.eta);
    p.zeta = o.num("zeta", p.zeta);
    p.grid = o.integer("grid", p.grid);
    resource_f(p.f_name);
    return p;
}

SelfHarmParams self_harm_opts(Overrides& o) {
    SelfHarmParams p;
    p.x = o.num("x", p.x);
    p.v = o.num("v", p.v);
    p.p = o.num("p", p.p);
    p.gamma_r = o.num("gamma_r", p.gamma_r);
    p.xi = o.num("xi", p.xi);
    p.eta = o.num("eta", p.eta);
    return p;
}

PauseDestroyParams pause_destroy_opts(Overrides& o) {
    PauseDestroyParams p;
    p.x = o.num("x", p.x);
    p.y = o.num("y", p.y);
    p.p = o.num("p", p.p);
    p.q = o.num("q", p.q);
    p.gamma_r = o.num("gamma_r", p.gamma_r);
    p.xi = o.num("xi", p.xi);
    p.eta = o.num("eta", p.eta);
    return p;
}

NormParams norm_opts(Overrides& o) {
    NormParams p;
    p.n_humans = o.integer("n_humans", p.n_humans);
    p.internalized = o.flag("internalized", p.internalized);
    p.commit_stage = o.flag("commit_stage", p.commit_stage);
    p.mu_right = o.num("mu_right", p.mu_right);
    p.pi0_right = o.num("pi0_right", p.pi0_right);
    p.nu = o.num("nu", p.nu);
    p.beta_h = o.num("beta_h", p.beta_h);
    p.beta_r = o.num("beta_r", p.beta_r);
    p.gamma_r = o.num("gamma_r", p.gamma_r);
    return p;
}

BeliefParams belief_opts(Overrides& o) {
    BeliefParams p;
    p.zeta = o.num("zeta", p.zeta);
    p.xi = o.num("xi", p.xi);
    p.eta = o.num("eta", p.eta);
    p.beta_r = o.num("beta_r", p.beta_r);
    p.equalized = o.flag("equalized", p.equalized);
    return p;
}

BoxesParams boxes_opts(Overrides& o) {
    BoxesParams p;
    p.n = o.ints("n", p.n);
    p.k = o.ints("k", p.k);
    p.hazard = o.ints("hazard", std::vector<int>(p.n.size(), 0));
    p.beta_r = o.num("beta_r", p.beta_r);
    p.gamma_r = o.num("gamma_r", p.gamma_r);
    p.gamma_h = o.num("gamma_h", p.gamma_h);
    p.zeta = o.num("zeta", p.zeta);
    p.eta = o.num("eta", p.eta);
    return p;
}

BifurcationParams bifurcation_opts(Overrides& o) {
    BifurcationParams p;
    p.beta = o.num("beta", p.beta);
    p.gamma_h = o.num("gamma_h", p.gamma_h);
    return p;
}

}  // namespace

Scenario build_named_scenario(const std::string& name, const std::map<std::string, std::string>& kv) {
    Overrides o(kv);
    Scenario sc;
    if (name == "commitment") sc = build_commitment_game(commitment_opts(o));
    else if (name == "menu") sc = build_menu_game(menu_opts(o));
    else if (name == "confirmation") sc = build_confirmation_game(confirmation_opts(o));
    else if (name == "resource") sc = build_resource_game(resource_opts(o));
    else if (name == "self_harm") sc = build_self_harm_game(self_harm_opts(o));
    else if (name == "pause_destroy") sc = build_pause_destroy_game(pause_destroy_opts(o));
    else if (name == "norm") sc = build_norm_game(norm_opts(o));
    else if (name == "belief_manipulation") sc = build_belief_manipulation_game(belief_opts(o));
    else if (name == "boxes") sc = build_boxes_game(boxes_opts(o));
    else if (name == "bifurcation") sc = build_bifurcation_mdp(bifurcation_opts(o));
    else if (name == "gridworld") {
        GridworldConfig c = default_gridworld_config();
        c.p_g = o.num("p_g", c.p_g);
        c.gamma_h = o.num("gamma_h", c.gamma_h);
        c.gamma_r = o.num("gamma_r", c.gamma_r);
        c.beta_h = o.num("beta_h", c.beta_h);
        c.door_unlocked = o.flag("door_unlocked", c.door_unlocked);
        sc = build_gridworld(c);
    } else {
        throw Error(ErrorKind::usage, "unknown scenario '" + name + "'");
    }
    o.finish();
    return sc;
}

ScenarioReport check_named_scenario(const std::string& name, const std::map<std::string, std::string>& kv) {
    Overrides o(kv);
    ScenarioReport rep;
    if (name == "commitment") rep = check_commitment(commitment_opts(o));
    else if (name == "menu") rep = check_menu(menu_opts(o));
    else if (name == "confirmation") rep = check_confirmation(confirmation_opts(o));
    else if (name == "resource") rep = check_resource(resource_opts(o));
    else if (name == "self_harm") rep = check_self_harm(self_harm_opts(o));
    else if (name == "pause_destroy") rep = check_pause_destroy(pause_destroy_opts(o));
    else if (name == "norm") rep = check_norm(norm_opts(o));
    else if (name == "belief_manipulation") rep = check_belief(belief_opts(o));
    else if (name == "boxes") rep = check_boxes(boxes_opts(o));
    else if (name == "bifurcation") rep = check_bifurcation(bifurcation_opts(o));
    else throw Error(ErrorKind::usage, "no analytic check for scenario '" + name + "'");
    o.finish();
    return rep;
}

}  // namespace pg
