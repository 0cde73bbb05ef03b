#include <algorithm>
#include <cmath>
#include <numeric>

#include "role_engine/assignment.hpp"

namespace role_engine {

namespace {

// Kuhn-Munkres with row/column potentials on a square matrix; returns the column
// chosen for every row.
std::vector<size_t> solve_square(const Eigen::MatrixXd& a) {
    const size_t n = static_cast<size_t>(a.rows());
    const double inf = std::numeric_limits<double>::max();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<size_t> p(n + 1, 0), way(n + 1, 0);
    for (size_t i = 1; i <= n; ++i) {
        p[0] = i;
        size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const size_t i0 = p[j0];
            double delta = inf;
            size_t j1 = 0;
            for (size_t j = 1; j <= n; ++j) {
                if (used[j])
                    continue;
                const double cur = a(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<size_t> row_to_col(n, 0);
    for (size_t j = 1; j <= n; ++j)
        if (p[j] != 0)
            row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

double optimum(const Eigen::MatrixXd& a) {
    if (a.rows() == 0)
        return 0.0;
    const std::vector<size_t> cols = solve_square(a);
    double total = 0.0;
    for (size_t i = 0; i < cols.size(); ++i)
        total += a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[i]));
    return total;
}

Eigen::MatrixXd drop(const Eigen::MatrixXd& a, Eigen::Index row, Eigen::Index col) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd out(n - 1, n - 1);
    for (Eigen::Index i = 0, oi = 0; i < n; ++i) {
        if (i == row)
            continue;
        for (Eigen::Index j = 0, oj = 0; j < n; ++j) {
            if (j == col)
                continue;
            out(oi, oj++) = a(i, j);
        }
        ++oi;
    }
    return out;
}

} // namespace

std::optional<size_t> Assignment::role_of(size_t a) const {
    for (size_t i = 0; i < t_r.size(); ++i)
        if (t_r[i] == a)
            return t_c[i];
    return std::nullopt;
}

double matching_cost(const Eigen::MatrixXd& q, const Assignment& assignment) {
    double total = 0.0;
    for (size_t i = 0; i < assignment.t_r.size(); ++i)
        total += q(static_cast<Eigen::Index>(assignment.t_r[i]), static_cast<Eigen::Index>(assignment.t_c[i]));
    return total;
}

Assignment hungarian_assign(const Eigen::MatrixXd& cost) {
    const Eigen::Index m = cost.rows();
    const Eigen::Index n = cost.cols();
    if (m < n)
        throw InputError("assignment needs at least as many agents as roles");
    Assignment out;
    if (n == 0)
        return out;

    // Forbidden entries become a sentinel above any finite matching total.
    double finite_sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double c = cost(i, j);
            if (std::isnan(c))
                throw InputError("assignment cost is NaN");
            if (std::isfinite(c))
                finite_sum += std::abs(c);
            else if (c < 0.0)
                throw InputError("assignment cost is -inf");
        }
    const double sentinel = 2.0 * finite_sum + 1.0;

    // Square matrix padded with zero-cost dummy roles.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            a(i, j) = std::isfinite(cost(i, j)) ? cost(i, j) : sentinel;

    const double best = optimum(a);
    if (best >= sentinel)
        throw InfeasibleError("no finite matching covers every role");

    // Fix rows in order, each to the smallest column that keeps the optimum.
    const double tol = 1e-12 * std::max(1.0, std::abs(best));
    std::vector<Eigen::Index> rows(static_cast<size_t>(m)), cols(static_cast<size_t>(m));
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    std::vector<Eigen::Index> chosen(static_cast<size_t>(m), -1);
    Eigen::MatrixXd rest = a;
    double fixed = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        bool placed = false;
        for (Eigen::Index j = 0; j < rest.cols() && !placed; ++j) {
            if (rest(0, j) >= sentinel)
                continue;
            const Eigen::MatrixXd sub = drop(rest, 0, j);
            if (fixed + rest(0, j) + optimum(sub) <= best + tol) {
                chosen[static_cast<size_t>(i)] = cols[static_cast<size_t>(j)];
                fixed += rest(0, j);
                cols.erase(cols.begin() + j);
                rest = sub;
                placed = true;
            }
        }
        if (!placed) {
            // Rounding pushed every candidate above the optimum; fall back to the plain solution.
            const std::vector<size_t> plain = solve_square(rest);
            chosen[static_cast<size_t>(i)] = cols[plain[0]];
            fixed += rest(0, static_cast<Eigen::Index>(plain[0]));
            const Eigen::MatrixXd sub = drop(rest, 0, static_cast<Eigen::Index>(plain[0]));
            cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(plain[0]));
            rest = sub;
        }
    }

    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index j = chosen[static_cast<size_t>(i)];
        if (j < n) {
            out.t_r.push_back(static_cast<size_t>(i));
            out.t_c.push_back(static_cast<size_t>(j));
        }
    }
    out.total_cost = matching_cost(cost, out);
    return out;
}

Assignment gra_solve(const QualificationMatrix& q) {
    return hungarian_assign(q.q);
}

Assignment nn_assign(const std::vector<Vec2>& agent_positions, const std::vector<Vec2>& role_positions) {
    const size_t m = agent_positions.size();
    const size_t n = role_positions.size();
    if (m < n)
        throw InputError("assignment needs at least as many agents as roles");
    std::vector<char> agent_used(m, 0), role_used(n, 0);
    Assignment out;
    for (size_t step = 0; step < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        size_t best_a = 0, best_r = 0;
        for (size_t a = 0; a < m; ++a) {
            if (agent_used[a])
                continue;
            for (size_t r = 0; r < n; ++r) {
                if (role_used[r])
                    continue;
                const double d = (agent_positions[a] - role_positions[r]).norm();
                if (d < best) {
                    best = d;
                    best_a = a;
                    best_r = r;
                }
            }
        }
        agent_used[best_a] = 1;
        role_used[best_r] = 1;
        out.t_r.push_back(best_a);
        out.t_c.push_back(best_r);
        out.total_cost += best;
    }
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return out.t_r[x] < out.t_r[y]; });
    Assignment sorted;
    sorted.total_cost = out.total_cost;
    for (size_t i : order) {
        sorted.t_r.push_back(out.t_r[i]);
        sorted.t_c.push_back(out.t_c[i]);
    }
    return sorted;
}

} // namespace role_engine
