#pragma once

#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "powergame/common.hpp"

namespace pg::detail {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Solves (I - M) x = b with M given as triplets.
inline std::vector<double> solve_i_minus(int n, const Triplets& m, const std::vector<double>& b) {
    Triplets t;
    t.reserve(m.size() + n);
    for (int i = 0; i < n; ++i) t.emplace_back(i, i, 1.0);
    for (auto& e : m) t.emplace_back(e.row(), e.col(), -e.value());
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(t.begin(), t.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw Error(ErrorKind::convergence, "policy evaluation system is singular");
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n);
    Eigen::VectorXd x = lu.solve(rhs);
    return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace pg::detail
