#include <doctest.h>

#include <cmath>
#include <limits>

#include "panelcause/simplex_qp.hpp"
#include "test_support.hpp"

using namespace panelcause;

namespace {

double direct_objective(const std::vector<std::vector<double>>& rows,
                        const std::vector<double>& target, const std::vector<double>& v,
                        const std::vector<double>& w) {
    double f = 0.0;
    for (size_t k = 0; k < rows.size(); ++k) {
        double r = target[k];
        for (size_t j = 0; j < w.size(); ++j) r -= rows[k][j] * w[j];
        f += v[k] * r * r;
    }
    return f;
}

// Independent check: exhaustive 0.001-step sweep of the simplex, for up to
// three donors.
double grid_search_best(const std::vector<std::vector<double>>& rows,
                        const std::vector<double>& target, const std::vector<double>& v) {
    const size_t n = rows[0].size();
    REQUIRE(n <= 3);
    const int steps = 1000;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> w(n, 0.0);
    if (n == 1) {
        w[0] = 1.0;
        return direct_objective(rows, target, v, w);
    }
    for (int i = 0; i <= steps; ++i) {
        if (n == 2) {
            w[0] = i / 1000.0;
            w[1] = 1.0 - w[0];
            best = std::min(best, direct_objective(rows, target, v, w));
        } else {
            for (int j = 0; j + i <= steps; ++j) {
                w[0] = i / 1000.0;
                w[1] = j / 1000.0;
                w[2] = 1.0 - w[0] - w[1];
                best = std::min(best, direct_objective(rows, target, v, w));
            }
        }
    }
    return best;
}

}  // namespace

TEST_CASE("simplex projection") {
    CHECK(project_to_simplex({2.0, 0.0}) == std::vector<double>{1.0, 0.0});
    auto p = project_to_simplex({0.3, 0.3});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    auto q = project_to_simplex({-5.0, 0.2, 0.1});
    CHECK(q[0] == 0.0);
    double sum = q[0] + q[1] + q[2];
    CHECK(sum == doctest::Approx(1.0));
    // Already-feasible points are fixed points.
    auto r = project_to_simplex({0.25, 0.25, 0.5});
    CHECK(r[0] == doctest::Approx(0.25));
    CHECK(r[2] == doctest::Approx(0.5));
}

TEST_CASE("single donor: the constraint forces w = [1]") {
    SimplexQpResult r = solve_simplex_qp({{0.4}, {0.5}}, {0.3, 0.6}, {0.5, 0.5});
    REQUIRE(r.weights.size() == 1);
    CHECK(r.weights[0] == 1.0);
}

TEST_CASE("target at the midpoint of two distinct donors") {
    // Two identical-scale donors whose mean is the target: w = [0.5, 0.5].
    std::vector<std::vector<double>> rows = {
        {0.30, 0.40}, {0.60, 0.50}, {0.25, 0.35}, {0.80, 0.70}};
    std::vector<double> target = {0.35, 0.55, 0.30, 0.75};
    std::vector<double> v(4, 0.25);
    SimplexQpResult r = solve_simplex_qp(rows, target, v);
    CHECK(std::abs(r.weights[0] - 0.5) < 1e-5);
    CHECK(std::abs(r.weights[1] - 0.5) < 1e-5);
    CHECK(r.objective <= 1e-6);
    CHECK(std::abs(r.objective - grid_search_best(rows, target, v)) <= 1e-5);
}

TEST_CASE("solver matches an exhaustive grid sweep on small random instances") {
    test_support::Rng rng(0x0b5e55ed);
    for (int trial = 0; trial < 12; ++trial) {
        const int n_donors = rng.uniform_int(2, 3);
        const int n_rows = rng.uniform_int(2, 6);
        std::vector<std::vector<double>> rows(n_rows, std::vector<double>(n_donors));
        std::vector<double> target(n_rows);
        std::vector<double> v(n_rows);
        double v_sum = 0.0;
        for (int k = 0; k < n_rows; ++k) {
            for (int j = 0; j < n_donors; ++j) rows[k][j] = rng.uniform(-1.0, 1.0);
            target[k] = rng.uniform(-1.0, 1.0);
            v[k] = rng.uniform(0.1, 1.0);
            v_sum += v[k];
        }
        for (double& x : v) x /= v_sum;
        SimplexQpResult r = solve_simplex_qp(rows, target, v);
        const double oracle = grid_search_best(rows, target, v);
        CHECK(std::abs(r.objective - oracle) <= 1e-5);
        CHECK(r.objective <= oracle + 1e-9);  // grid points are feasible
    }
}

TEST_CASE("weights stay on the simplex") {
    test_support::Rng rng(0x51319);
    for (int trial = 0; trial < 30; ++trial) {
        const int n_donors = rng.uniform_int(2, 12);
        const int n_rows = rng.uniform_int(1, 8);
        std::vector<std::vector<double>> rows(n_rows, std::vector<double>(n_donors));
        std::vector<double> target(n_rows);
        std::vector<double> v(n_rows, 1.0 / n_rows);
        for (int k = 0; k < n_rows; ++k) {
            for (int j = 0; j < n_donors; ++j) rows[k][j] = rng.uniform(-2.0, 2.0);
            target[k] = rng.uniform(-2.0, 2.0);
        }
        SimplexQpResult r = solve_simplex_qp(rows, target, v);
        double sum = 0.0;
        for (double w : r.weights) {
            CHECK(w >= 0.0);
            sum += w;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-8);
    }
}

TEST_CASE("solves are bitwise deterministic") {
    std::vector<std::vector<double>> rows = {{0.1, 0.9, 0.4}, {0.7, 0.2, 0.5}, {0.3, 0.3, 0.8}};
    std::vector<double> target = {0.45, 0.5, 0.4};
    std::vector<double> v = {0.5, 0.25, 0.25};
    SimplexQpResult a = solve_simplex_qp(rows, target, v);
    SimplexQpResult b = solve_simplex_qp(rows, target, v);
    REQUIRE(a.weights.size() == b.weights.size());
    for (size_t j = 0; j < a.weights.size(); ++j) CHECK(a.weights[j] == b.weights[j]);
    CHECK(a.objective == b.objective);
}

TEST_CASE("monotone gating: a larger donor pool never raises the optimum") {
    test_support::Rng rng(0x90a7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n_rows = rng.uniform_int(2, 6);
        const int small_n = rng.uniform_int(2, 4);
        const int extra = rng.uniform_int(1, 3);
        std::vector<std::vector<double>> small_rows(n_rows), large_rows(n_rows);
        std::vector<double> target(n_rows);
        std::vector<double> v(n_rows, 1.0 / n_rows);
        for (int k = 0; k < n_rows; ++k) {
            for (int j = 0; j < small_n; ++j) small_rows[k].push_back(rng.uniform(-1.0, 1.0));
            large_rows[k] = small_rows[k];
            for (int j = 0; j < extra; ++j) large_rows[k].push_back(rng.uniform(-1.0, 1.0));
            target[k] = rng.uniform(-1.0, 1.0);
        }
        SimplexQpResult small = solve_simplex_qp(small_rows, target, v);
        SimplexQpResult large = solve_simplex_qp(large_rows, target, v);
        CHECK(large.objective <= small.objective + 1e-8);
    }
}

TEST_CASE("flat objective falls back to uniform weights") {
    SimplexQpResult r = solve_simplex_qp({{0.0, 0.0, 0.0}}, {0.5}, {1.0});
    for (double w : r.weights) CHECK(w == doctest::Approx(1.0 / 3.0));
}
