#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "panelcause/errors.hpp"

namespace panelcause {

// Euclidean projection onto the probability simplex (sort-and-threshold).
inline std::vector<double> project_to_simplex(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
        cumulative += u[i];
        const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (u[i] - candidate > 0.0) theta = candidate;
    }
    for (double& x : v) x = std::max(x - theta, 0.0);
    return v;
}

// Clamp stray negatives and renormalize so the entries sum to exactly 1.
inline void snap_to_simplex(std::vector<double>& w) {
    double sum = 0.0;
    for (double& x : w) {
        if (x < 0.0) x = 0.0;
        sum += x;
    }
    if (sum <= 0.0) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
        return;
    }
    for (double& x : w) x /= sum;
}

struct SimplexQpConfig {
    int max_iterations = 10000;          // active-set pivot budget
    double objective_tolerance = 1e-10;  // KKT violation tolerance for admitting donors
};

struct SimplexQpResult {
    std::vector<double> weights;
    double objective = 0.0;
    int iterations = 0;
};

// Minimize sum_k row_weights[k] * (target[k] - dot(rows[k], w))^2 over the
// probability simplex {w >= 0, sum w = 1}.
//
// Exact primal active-set method on the KKT system: grow the support one
// donor at a time from the best single vertex, solving the equality-
// constrained quadratic on the current support and ratio-testing toward
// feasibility. Every tie breaks to the lowest donor index and arithmetic
// order is fixed, so solves are bitwise deterministic. Terminates when no
// off-support donor can lower the objective by more than the tolerance.
inline SimplexQpResult solve_simplex_qp(const std::vector<std::vector<double>>& rows,
                                        const std::vector<double>& target,
                                        const std::vector<double>& row_weights,
                                        const SimplexQpConfig& config = {}) {
    const size_t n_rows = rows.size();
    if (n_rows == 0 || n_rows != target.size() || n_rows != row_weights.size()) {
        raise(errc::solver_failure, "inconsistent quadratic program dimensions");
    }
    const size_t n = rows[0].size();
    if (n == 0) {
        raise(errc::solver_failure, "no donors to weight");
    }
    for (const auto& row : rows) {
        if (row.size() != n) raise(errc::solver_failure, "ragged covariate matrix");
    }

    // Because every feasible w sums to 1, subtracting a row's mean from its
    // entries and from the target leaves the objective unchanged on the
    // simplex. Centering keeps large common offsets (counting stats) from
    // dominating the normal matrix.
    std::vector<std::vector<double>> centered(n_rows);
    std::vector<double> centered_target(n_rows);
    for (size_t k = 0; k < n_rows; ++k) {
        double mean = 0.0;
        for (double value : rows[k]) mean += value;
        mean /= static_cast<double>(n);
        centered[k].reserve(n);
        for (double value : rows[k]) centered[k].push_back(value - mean);
        centered_target[k] = target[k] - mean;
    }

    auto objective_at = [&](const std::vector<double>& w) {
        double f = 0.0;
        for (size_t k = 0; k < n_rows; ++k) {
            double r = centered_target[k];
            const auto& row = centered[k];
            for (size_t j = 0; j < n; ++j) r -= row[j] * w[j];
            f += row_weights[k] * r * r;
        }
        return f;
    };

    SimplexQpResult result;
    if (n == 1) {
        result.weights = {1.0};
        result.objective = objective_at(result.weights);
        return result;
    }

    // Normal matrix B = A^T V A and linear term c = A^T V b on centered data.
    std::vector<std::vector<double>> B(n, std::vector<double>(n, 0.0));
    std::vector<double> c(n, 0.0);
    for (size_t k = 0; k < n_rows; ++k) {
        const auto& row = centered[k];
        const double vk = row_weights[k];
        for (size_t i = 0; i < n; ++i) {
            const double vi = vk * row[i];
            c[i] += vi * centered_target[k];
            for (size_t j = i; j < n; ++j) B[i][j] += vi * row[j];
        }
    }
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < i; ++j) B[i][j] = B[j][i];
    }
    double trace = 0.0;
    for (size_t i = 0; i < n; ++i) trace += B[i][i];
    if (trace <= 1e-300) {
        // Flat objective: every simplex point ties, keep the uniform point.
        result.weights.assign(n, 1.0 / static_cast<double>(n));
        result.objective = objective_at(result.weights);
        return result;
    }
    const double ridge = 1e-12 * (1.0 + trace / static_cast<double>(n));

    // Start from the best single donor.
    size_t start = 0;
    double best_vertex = B[0][0] - 2.0 * c[0];
    for (size_t j = 1; j < n; ++j) {
        const double value = B[j][j] - 2.0 * c[j];
        if (value < best_vertex) {
            best_vertex = value;
            start = j;
        }
    }
    std::vector<bool> active(n, false);
    std::vector<size_t> support = {start};
    active[start] = true;
    std::vector<double> w(n, 0.0);
    w[start] = 1.0;

    // Equality-constrained solve on the support: minimize w'Bw - 2c'w subject
    // to sum(w_S) = 1, via the bordered KKT system with partial pivoting.
    std::vector<double> candidate(n, 0.0);
    auto solve_on_support = [&]() {
        const size_t s = support.size();
        const size_t dim = s + 1;
        std::vector<std::vector<double>> m(dim, std::vector<double>(dim + 1, 0.0));
        for (size_t a = 0; a < s; ++a) {
            for (size_t b = 0; b < s; ++b) m[a][b] = 2.0 * B[support[a]][support[b]];
            m[a][a] += ridge;
            m[a][s] = 1.0;
            m[a][dim] = 2.0 * c[support[a]];
        }
        for (size_t b = 0; b < s; ++b) m[s][b] = 1.0;
        m[s][dim] = 1.0;
        for (size_t col = 0; col < dim; ++col) {
            size_t pivot = col;
            for (size_t r = col + 1; r < dim; ++r) {
                if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
            }
            std::swap(m[col], m[pivot]);
            const double diag = m[col][col];
            if (std::abs(diag) <= 1e-300) {
                raise(errc::solver_failure, "singular KKT system");
            }
            for (size_t r = 0; r < dim; ++r) {
                if (r == col) continue;
                const double factor = m[r][col] / diag;
                if (factor == 0.0) continue;
                for (size_t cc = col; cc <= dim; ++cc) m[r][cc] -= factor * m[col][cc];
            }
        }
        std::fill(candidate.begin(), candidate.end(), 0.0);
        for (size_t a = 0; a < s; ++a) candidate[support[a]] = m[a][dim] / m[a][a];
    };

    std::vector<double> gradient(n, 0.0);
    const int max_pivots = std::min<long long>(config.max_iterations,
                                               40LL * static_cast<long long>(n) + 200);
    for (int iter = 1; iter <= max_pivots; ++iter) {
        result.iterations = iter;
        solve_on_support();

        double most_negative = 0.0;
        for (size_t j : support) most_negative = std::min(most_negative, candidate[j]);
        if (most_negative >= -1e-12) {
            for (size_t j : support) w[j] = std::max(candidate[j], 0.0);
            // KKT check: every off-support donor must price out.
            for (size_t j = 0; j < n; ++j) {
                double gj = -2.0 * c[j];
                const auto& brow = B[j];
                for (size_t i : support) gj += 2.0 * brow[i] * w[i];
                gradient[j] = gj;
            }
            double mu = std::numeric_limits<double>::infinity();
            double scale = 1.0;
            for (size_t j : support) {
                mu = std::min(mu, gradient[j]);
                scale = std::max(scale, std::abs(gradient[j]));
            }
            size_t entering = n;
            double worst = -std::max(config.objective_tolerance, 1e-9 * scale);
            for (size_t j = 0; j < n; ++j) {
                if (active[j]) continue;
                const double violation = gradient[j] - mu;
                if (violation < worst) {
                    worst = violation;
                    entering = j;
                }
            }
            if (entering == n) {
                snap_to_simplex(w);
                result.weights = std::move(w);
                result.objective = objective_at(result.weights);
                return result;
            }
            active[entering] = true;
            support.push_back(entering);
            std::sort(support.begin(), support.end());
            continue;
        }

        // Ratio test toward the equality solution; drop the tightest blocker
        // (lowest index on ties, support is kept sorted).
        double alpha = std::numeric_limits<double>::infinity();
        size_t blocking = n;
        for (size_t j : support) {
            if (candidate[j] < 0.0) {
                const double limit = w[j] / (w[j] - candidate[j]);
                if (limit < alpha) {
                    alpha = limit;
                    blocking = j;
                }
            }
        }
        if (blocking == n) {
            raise(errc::solver_failure, "ratio test failed to find a blocking donor");
        }
        alpha = std::min(alpha, 1.0);
        for (size_t j : support) w[j] += alpha * (candidate[j] - w[j]);
        w[blocking] = 0.0;
        active[blocking] = false;
        support.erase(std::find(support.begin(), support.end(), blocking));
        if (support.empty()) {
            raise(errc::solver_failure, "active set emptied during ratio test");
        }
    }
    raise(errc::solver_failure, "simplex QP did not converge within " +
                                    std::to_string(max_pivots) + " pivots");
}

}  // namespace panelcause
