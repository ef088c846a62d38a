#include "powergame/report_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "powergame/gamespec.hpp"

namespace pg {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t content_hash(const Game& game, const PowerParams& params, std::string_view extra) {
    std::uint64_t h = fnv1a64(serialize_game(game, params));
    return fnv1a64(extra, h);
}

std::string hex64(std::uint64_t h) {
    static const char* d = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) s[i] = d[h & 15];
    return s;
}

json number_json(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

namespace {

json vec_json(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number_json(x));
    return a;
}

std::string csv_num(double x) { return format_double(x); }

}  // namespace

json prior_json(const Game& game, const HumanPrior& prior) {
    json out;
    out["residual"] = number_json(prior.residual);
    json humans = json::object();
    for (int h = 0; h < game.num_humans(); ++h) {
        json goals = json::object();
        for (int k = 0; k < game.num_goals(h); ++k) {
            json states = json::object();
            for (int s = 0; s < game.num_states(); ++s) {
                json st;
                st["v_m"] = number_json(prior.v(h, k, s));
                json q = json::object(), pi = json::object();
                auto qs = prior.q(h, k, s);
                auto ps = prior.pi(h, k, s);
                for (int a = 0; a < game.num_human(s, h); ++a) {
                    q[game.human_actions[s][h][a]] = number_json(qs[a]);
                    pi[game.human_actions[s][h][a]] = number_json(ps[a]);
                }
                st["q_m"] = std::move(q);
                st["pi_h"] = std::move(pi);
                states[game.state_names[s]] = std::move(st);
            }
            goals[game.goals[h][k].name] = std::move(states);
        }
        humans[game.human_names[h]] = std::move(goals);
    }
    out["humans"] = std::move(humans);
    json folds = json::array();
    for (auto& f : prior.folds)
        folds.push_back({{"human", game.human_names.at(f.human)},
                         {"goal", game.goals.at(f.human).at(f.goal).name},
                         {"beta", number_json(f.beta)},
                         {"jump", number_json(f.jump)}});
    out["folds"] = std::move(folds);
    return out;
}

json solution_json(const Game& game, const RobotSolution& sol) {
    json out;
    out["game"] = game.name;
    out["residual"] = number_json(sol.residual);
    out["beta_reached"] = number_json(sol.beta_reached);
    json states = json::object();
    for (int s = 0; s < game.num_states(); ++s) {
        json st;
        st["u_r"] = number_json(sol.u_r[s]);
        st["v_r"] = number_json(sol.v_r[s]);
        json q = json::object(), pi = json::object();
        for (int a = 0; a < game.num_robot(s); ++a) {
            q[game.robot_actions[s][a]] = number_json(sol.q(s)[a]);
            pi[game.robot_actions[s][a]] = number_json(sol.pi(s)[a]);
        }
        st["q_r"] = std::move(q);
        st["pi_r"] = std::move(pi);
        json humans = json::object();
        for (int h = 0; h < game.num_humans(); ++h) {
            json hj;
            double x = sol.x(h, s);
            hj["x"] = number_json(x);
            hj["w_bits"] = number_json(power_bits(x));
            json ve = json::object();
            for (int k = 0; k < game.num_goals(h); ++k) ve[game.goals[h][k].name] = number_json(sol.ve(h, k, s));
            hj["v_e"] = std::move(ve);
            humans[game.human_names[h]] = std::move(hj);
        }
        st["humans"] = std::move(humans);
        states[game.state_names[s]] = std::move(st);
    }
    out["states"] = std::move(states);
    return out;
}

json scenario_report_json(const ScenarioReport& rep) {
    json out;
    out["scenario"] = rep.name;
    out["all_match"] = rep.all_match();
    json rows = json::array();
    for (auto& c : rep.checks)
        rows.push_back({{"quantity", c.quantity},
                        {"oracle", number_json(c.oracle)},
                        {"solver", number_json(c.solver)},
                        {"tol", number_json(c.tol)},
                        {"status", c.match ? "MATCH" : "MISMATCH"}});
    out["checks"] = std::move(rows);
    return out;
}

json horizon_bound_json(const HorizonBound& b) {
    return {{"horizon", b.horizon}, {"bound", number_json(b.bound)}, {"m_u", number_json(b.m_u)},
            {"eps_x", number_json(b.eps_x)}, {"eps_q", number_json(b.eps_q)}, {"normalized", b.normalized}};
}

std::string power_report_csv(const PowerReport& rep) {
    std::ostringstream os;
    os << "state,human,x,w_bits,u_r\n";
    const std::size_t H = rep.human_names.size();
    for (std::size_t s = 0; s < rep.state_names.size(); ++s)
        for (std::size_t h = 0; h < H; ++h)
            os << rep.state_names[s] << "," << rep.human_names[h] << "," << csv_num(rep.x[s * H + h]) << ","
               << csv_num(rep.w[s * H + h]) << "," << csv_num(rep.u_r[s]) << "\n";
    return os.str();
}

std::string scenario_report_csv(const ScenarioReport& rep) {
    std::ostringstream os;
    os << "scenario,quantity,oracle,solver,tol,status\n";
    for (auto& c : rep.checks)
        os << rep.name << "," << c.quantity << "," << csv_num(c.oracle) << "," << csv_num(c.solver) << "," << csv_num(c.tol) << ","
           << (c.match ? "MATCH" : "MISMATCH") << "\n";
    return os.str();
}

std::string learn_metrics_csv(const Phase2Result& res, const std::vector<int>& success) {
    std::ostringstream os;
    os << "episode,td_error,return,success\n";
    for (std::size_t e = 0; e < res.td_curve.size(); ++e) {
        os << e << "," << csv_num(res.td_curve[e]) << "," << csv_num(e < res.returns.size() ? res.returns[e] : 0.0) << ",";
        if (e < success.size()) os << success[e];
        os << "\n";
    }
    return os.str();
}

std::string phase1_metrics_csv(const std::vector<Phase1Result>& runs, const Game& game) {
    std::ostringstream os;
    os << "human,goal,episode,td_error\n";
    for (auto& r : runs)
        for (std::size_t e = 0; e < r.td_curve.size(); ++e)
            os << game.human_names.at(r.human) << "," << game.goals.at(r.human).at(r.goal).name << "," << e << ","
               << csv_num(r.td_curve[e]) << "\n";
    return os.str();
}

std::string trace_ndjson(const Game& game, const std::vector<EpisodeTrace>& traces) {
    std::string out;
    for (auto& tr : traces) {
        for (auto& st : tr.steps) {
            json j;
            j["episode"] = tr.episode;
            j["t"] = st.t;
            j["s"] = game.state_names[st.s];
            json goals = json::array();
            for (std::size_t h = 0; h < st.goals.size(); ++h) goals.push_back(game.goals[h][st.goals[h]].name);
            j["goals"] = std::move(goals);
            j["a_r"] = game.robot_actions[st.s][st.a_r];
            json ah = json::array();
            for (std::size_t h = 0; h < st.a_h.size(); ++h) ah.push_back(game.human_actions[st.s][h][st.a_h[h]]);
            j["a_h"] = std::move(ah);
            j["s_next"] = game.state_names[st.s2];
            j["u_r"] = number_json(st.u_r);
            j["w_h"] = vec_json(st.w_h);
            out += j.dump();
            out += '\n';
        }
        json summary{{"episode", tr.episode}, {"summary", true}, {"steps", tr.steps.size()}, {"return", number_json(tr.ret)}};
        out += summary.dump();
        out += '\n';
    }
    return out;
}

std::string gridworld_rollout_ndjson(const Game& game, const GridRun& run) {
    std::string out;
    for (std::size_t t = 0; t < run.rollout.size(); ++t) {
        json j{{"greedy_step", t}, {"s", game.state_names[run.rollout[t]]}};
        const int ti = static_cast<int>(t);
        if (ti == run.events.key_step) j["event"] = "key";
        else if (ti == run.events.unlock_step) j["event"] = "unlock";
        else if (ti == run.events.aside_step) j["event"] = "aside";
        out += j.dump();
        out += '\n';
    }
    json ev{{"events", json::array()}, {"sequence", run.events.in_order()}};
    if (run.events.key_step >= 0) ev["events"].push_back("key");
    if (run.events.unlock_step >= 0) ev["events"].push_back("unlock");
    if (run.events.aside_step >= 0) ev["events"].push_back("aside");
    out += ev.dump();
    out += '\n';
    return out;
}

// ---------------------------------------------------------------- binary cache

namespace {

constexpr char kMagic[8] = {'P', 'G', 'S', 'O', 'L', '0', '0', '1'};

template <class T>
void put(std::string& buf, const T& v) {
    buf.append(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
void put_vec(std::string& buf, const std::vector<T>& v) {
    put(buf, static_cast<std::uint64_t>(v.size()));
    if (!v.empty()) buf.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
}

struct Reader {
    std::string_view data;
    std::size_t pos = 0;
    template <class T>
    bool get(T& v) {
        if (data.size() - pos < sizeof v) return false;
        std::memcpy(&v, data.data() + pos, sizeof v);
        pos += sizeof v;
        return true;
    }
    template <class T>
    bool get_vec(std::vector<T>& v) {
        std::uint64_t n = 0;
        if (!get(n) || n > (data.size() - pos) / sizeof(T)) return false;
        v.resize(n);
        if (n) std::memcpy(v.data(), data.data() + pos, n * sizeof(T));
        pos += n * sizeof(T);
        return true;
    }
};

}  // namespace

void write_solution_cache(const std::filesystem::path& path, std::uint64_t hash, const RobotSolution& sol) {
    std::string buf(kMagic, sizeof kMagic);
    put(buf, hash);
    put(buf, static_cast<std::int64_t>(sol.num_states));
    put(buf, static_cast<std::int64_t>(sol.num_humans));
    put(buf, sol.residual);
    put(buf, sol.beta_reached);
    std::vector<std::int64_t> go(sol.goal_offset.begin(), sol.goal_offset.end());
    std::vector<std::uint64_t> ro(sol.robot_offset.begin(), sol.robot_offset.end());
    put_vec(buf, go);
    put_vec(buf, ro);
    for (auto* v : {&sol.q_r, &sol.pi_r, &sol.v_e, &sol.x_h, &sol.u_r, &sol.v_r}) put_vec(buf, *v);
    write_text(path, buf);
}

std::optional<RobotSolution> read_solution_cache(const std::filesystem::path& path, std::uint64_t hash) {
    std::string data;
    try {
        data = read_text(path);
    } catch (const Error&) {
        return std::nullopt;
    }
    if (data.size() < sizeof kMagic || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) return std::nullopt;
    Reader r{data, sizeof kMagic};
    std::uint64_t h = 0;
    std::int64_t S = 0, H = 0;
    RobotSolution sol;
    std::vector<std::int64_t> go;
    std::vector<std::uint64_t> ro;
    if (!r.get(h) || h != hash || !r.get(S) || !r.get(H) || !r.get(sol.residual) || !r.get(sol.beta_reached) ||
        !r.get_vec(go) || !r.get_vec(ro))
        return std::nullopt;
    for (auto* v : {&sol.q_r, &sol.pi_r, &sol.v_e, &sol.x_h, &sol.u_r, &sol.v_r})
        if (!r.get_vec(*v)) return std::nullopt;
    if (r.pos != data.size() || S < 0 || H < 0 || ro.size() != static_cast<std::size_t>(S) + 1 ||
        go.size() != static_cast<std::size_t>(H) + 1 || sol.q_r.size() != ro.back() || sol.pi_r.size() != ro.back() ||
        sol.u_r.size() != static_cast<std::size_t>(S) || sol.v_r.size() != static_cast<std::size_t>(S) ||
        sol.x_h.size() != static_cast<std::size_t>(S * H) || go.back() < 0 ||
        sol.v_e.size() != static_cast<std::size_t>(go.back()) * static_cast<std::size_t>(S))
        return std::nullopt;
    sol.num_states = static_cast<int>(S);
    sol.num_humans = static_cast<int>(H);
    sol.goal_offset.assign(go.begin(), go.end());
    sol.robot_offset.assign(ro.begin(), ro.end());
    return sol;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::usage, "cannot write " + path.string());
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw Error(ErrorKind::usage, "write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::usage, "cannot read " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace pg
