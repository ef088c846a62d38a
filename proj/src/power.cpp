#include "powergame/power.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace pg {

PowerParams bounded_preset() {
    PowerParams p;
    p.eps_x = 1.0;
    p.xi = std::log(2.0) / (std::log(3.0) - std::log(2.0));
    p.eta = 1.1;
    p.eps_q = 1.0;
    p.beta_r = 1.0;
    return p;
}

void check_params(const PowerParams& p) {
    if (p.permissive) {
        if (!(p.zeta > 0) || !(p.xi > 0) || !(p.eta > 0)) throw Error(ErrorKind::argument, "zeta, xi, eta must be positive");
    } else {
        if (!(p.zeta > 1)) throw Error(ErrorKind::argument, "zeta must exceed 1");
        if (!(p.xi >= 1)) throw Error(ErrorKind::argument, "xi must be at least 1");
        if (!(p.eta > 1)) throw Error(ErrorKind::argument, "eta must exceed 1");
    }
    if (std::isnan(p.beta_r) || p.beta_r < 0) throw Error(ErrorKind::argument, "beta_r must be >= 0");
    if (!(p.eps_x >= 0) || !(p.eps_q >= 0)) throw Error(ErrorKind::argument, "regularizers must be >= 0");
    if (p.horizon && *p.horizon <= 0) throw Error(ErrorKind::argument, "horizon must be positive");
}

double goal_aggregate(std::span<const double> values, double zeta) {
    if (values.empty()) throw Error(ErrorKind::argument, "goal list is empty");
    double x = 0;
    for (double v : values) {
        if (v < 0) throw Error(ErrorKind::argument, "goal value is negative");
        if (v > 0) x += std::pow(v, zeta);
    }
    if (!(x > 0)) throw Error(ErrorKind::argument, "all goal values are zero (goal cover violated)");
    return x;
}

double intrinsic_reward(std::span<const double> x_values, const PowerParams& p) {
    if (x_values.empty()) throw Error(ErrorKind::argument, "no humans");
    // log of each term: -xi * ln(X + eps)
    double m = -kInf;
    std::vector<double> lt(x_values.size());
    for (std::size_t i = 0; i < x_values.size(); ++i) {
        double x = x_values[i] + p.eps_x;
        if (!(x > 0)) throw Error(ErrorKind::argument, "X_h must be positive when eps_X = 0");
        lt[i] = -p.xi * std::log(x);
        m = std::max(m, lt[i]);
    }
    double acc = 0;
    for (double l : lt) acc += std::exp(l - m);
    double lse = m + std::log(acc);
    return -std::exp(p.eta * lse);
}

// ---------------------------------------------------------------- bandit

namespace {

double entropy_bits(std::span<const double> p) {
    double h = 0;
    for (double x : p)
        if (x > 0) h -= x * std::log2(x);
    return h;
}

std::vector<double> outcome_marginal(const std::vector<std::vector<double>>& rows, std::span<const double> pi) {
    std::vector<double> q(rows.empty() ? 0 : rows[0].size(), 0.0);
    for (std::size_t a = 0; a < rows.size(); ++a)
        for (std::size_t s = 0; s < q.size(); ++s) q[s] += pi[a] * rows[a][s];
    return q;
}

void check_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows[0].empty()) throw Error(ErrorKind::argument, "empty bandit");
    for (auto& r : rows) {
        if (r.size() != rows[0].size()) throw Error(ErrorKind::argument, "ragged bandit rows");
        double s = 0;
        for (double x : r) {
            if (!(x >= 0)) throw Error(ErrorKind::argument, "negative outcome probability");
            s += x;
        }
        if (std::abs(s - 1) > 1e-9) throw Error(ErrorKind::argument, "bandit row is not stochastic");
    }
}

double blahut_arimoto(const std::vector<std::vector<double>>& rows, std::vector<double>& pi) {
    const std::size_t A = rows.size(), S = rows[0].size();
    pi.assign(A, 1.0 / A);
    std::vector<double> c(A);
    for (int it = 0; it < 200000; ++it) {
        auto q = outcome_marginal(rows, pi);
        for (std::size_t a = 0; a < A; ++a) {
            double d = 0;
            for (std::size_t s = 0; s < S; ++s)
                if (rows[a][s] > 0) d += rows[a][s] * std::log(rows[a][s] / q[s]);
            c[a] = std::exp(d);
        }
        double z = 0, mx = 0;
        for (std::size_t a = 0; a < A; ++a) z += pi[a] * c[a], mx = std::max(mx, c[a]);
        // capacity lies in [log z, log max c]
        if (std::log(mx) - std::log(z) < 1e-13) break;
        for (std::size_t a = 0; a < A; ++a) pi[a] = pi[a] * c[a] / z;
    }
    return bandit_objective(rows, pi, 1.0);
}

}  // namespace

double bandit_objective(const std::vector<std::vector<double>>& rows, std::span<const double> pi, double zeta) {
    auto q = outcome_marginal(rows, pi);
    double cond = 0;
    for (std::size_t a = 0; a < rows.size(); ++a)
        if (pi[a] > 0) cond += pi[a] * entropy_bits(rows[a]);
    return entropy_bits(q) - zeta * cond;
}

double bandit_w(const std::vector<std::vector<double>>& rows, double zeta) {
    check_rows(rows);
    double x = 0;
    for (std::size_t s = 0; s < rows[0].size(); ++s) {
        double m = 0;
        for (auto& r : rows) m = std::max(m, r[s]);
        if (m > 0) x += std::pow(m, zeta);
    }
    return std::log2(x);
}

void project_simplex(std::vector<double>& v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0, theta = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        css += u[i];
        double t = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0) theta = t;
    }
    for (double& x : v) x = std::max(0.0, x - theta);
}

BanditResult bandit_empowerment(const std::vector<std::vector<double>>& rows, double zeta, const BanditOptions& opt) {
    check_rows(rows);
    if (!(zeta >= 1)) throw Error(ErrorKind::argument, "zeta must be >= 1 for the empowerment comparison");
    const std::size_t A = rows.size(), S = rows[0].size();
    BanditResult res;
    res.w = bandit_w(rows, zeta);
    if (zeta == 1.0) {
        res.e_zeta = blahut_arimoto(rows, res.policy);
    } else {
        std::vector<double> cond(A);
        for (std::size_t a = 0; a < A; ++a) cond[a] = entropy_bits(rows[a]);
        std::mt19937_64 rng(opt.seed);
        std::gamma_distribution<double> gam(1.0, 1.0);
        const double inv_ln2 = 1.0 / std::log(2.0);
        res.e_zeta = -kInf;
        for (int start = 0; start < opt.starts; ++start) {
            std::vector<double> pi(A);
            if (start == 0) {
                std::fill(pi.begin(), pi.end(), 1.0 / A);
            } else if (static_cast<std::size_t>(start) <= A) {
                pi[start - 1] = 1.0;
            } else {
                double z = 0;
                for (auto& x : pi) z += (x = gam(rng));
                for (auto& x : pi) x /= z;
            }
            double j = bandit_objective(rows, pi, zeta);
            std::vector<double> g(A), cand(A);
            for (int it = 0; it < opt.iterations; ++it) {
                auto q = outcome_marginal(rows, pi);
                for (std::size_t a = 0; a < A; ++a) {
                    double d = 0;
                    for (std::size_t s = 0; s < S; ++s)
                        if (rows[a][s] > 0) d += rows[a][s] * (-std::log2(std::max(q[s], 1e-300)) - inv_ln2);
                    g[a] = d - zeta * cond[a];
                }
                double t = opt.step;
                bool moved = false;
                for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
                    for (std::size_t a = 0; a < A; ++a) cand[a] = pi[a] + t * g[a];
                    project_simplex(cand);
                    double dir = 0;
                    for (std::size_t a = 0; a < A; ++a) dir += g[a] * (cand[a] - pi[a]);
                    double jc = bandit_objective(rows, cand, zeta);
                    if (jc >= j + 1e-4 * dir && jc >= j) {
                        moved = jc > j;
                        pi = cand;
                        j = jc;
                        break;
                    }
                }
                if (!moved) break;
            }
            if (j > res.e_zeta) res.e_zeta = j, res.policy = pi;
        }
    }
    res.bound_holds = res.e_zeta <= res.w + opt.tol;
    return res;
}

}  // namespace pg
