#include "powergame/policy.hpp"

#include <vector>

namespace pg {

namespace {

void uniform_argmax(std::span<const double> v, std::span<double> out) {
    double m = *std::max_element(v.begin(), v.end());
    double tol = tie_tol(m);
    int n = 0;
    for (double x : v) n += (x >= m - tol);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] >= m - tol) ? 1.0 / n : 0.0;
}

void normalize_logits(std::span<const double> l, std::span<double> out) {
    double m = *std::max_element(l.begin(), l.end());
    double z = 0;
    for (std::size_t i = 0; i < l.size(); ++i) z += (out[i] = std::exp(l[i] - m));
    for (auto& x : out) x /= z;
}

}  // namespace

void softmax_policy(std::span<const double> q, double beta, std::span<double> out) {
    if (q.size() == 1) {
        out[0] = 1.0;
        return;
    }
    if (std::isinf(beta)) {
        uniform_argmax(q, out);
        return;
    }
    double m = *std::max_element(q.begin(), q.end());
    double z = 0;
    for (std::size_t i = 0; i < q.size(); ++i) z += (out[i] = std::exp(beta * (q[i] - m)));
    for (auto& x : out) x /= z;
}

void human_policy(std::span<const double> q, const BehaviorParams& b, std::span<double> out) {
    const std::size_t n = q.size();
    if (b.nu >= 1.0) {
        for (std::size_t i = 0; i < n; ++i) out[i] = b.pi0.empty() ? 1.0 / n : b.pi0[i];
        return;
    }
    softmax_policy(q, b.beta, out);
    if (b.nu > 0)
        for (std::size_t i = 0; i < n; ++i) out[i] = b.nu * (b.pi0.empty() ? 1.0 / n : b.pi0[i]) + (1 - b.nu) * out[i];
}

double power_law_logit(double q, double beta_r, double eps_q) {
    double d = -q + eps_q;
    if (!(d > 0)) throw Error(ErrorKind::argument, "zero Q_r with eps_Q = 0 makes the power-law policy undefined");
    return -beta_r * std::log(d);
}

void robot_policy(std::span<const double> q, const PowerParams& p, std::span<double> out) {
    const std::size_t n = q.size();
    if (n == 1) {
        out[0] = 1.0;
        return;
    }
    if (std::isinf(p.beta_r)) {
        uniform_argmax(q, out);
        return;
    }
    if (p.beta_r == 0) {
        for (auto& x : out) x = 1.0 / n;
        return;
    }
    std::vector<double> l(n);
    if (p.form == RobotPolicyForm::normalized_softmax) {
        double mx = *std::max_element(q.begin(), q.end()), mn = *std::min_element(q.begin(), q.end());
        double span = mx - mn;
        if (span <= tie_tol(mx)) {
            for (auto& x : out) x = 1.0 / n;
            return;
        }
        for (std::size_t i = 0; i < n; ++i) l[i] = p.beta_r * (q[i] - mx) / span;
    } else {
        for (std::size_t i = 0; i < n; ++i) l[i] = power_law_logit(q[i], p.beta_r, p.eps_q);
    }
    normalize_logits(l, out);
}

}  // namespace pg
