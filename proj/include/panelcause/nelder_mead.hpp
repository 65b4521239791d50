#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace panelcause {

struct NelderMeadConfig {
    int max_evaluations = 240;
    double initial_step = 0.5;
    double spread_tolerance_abs = 1e-12;
    double spread_tolerance_rel = 1e-6;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
};

// Standard simplex-reflection search (reflection 1, expansion 2, contraction
// 0.5, shrink 0.5). Fully deterministic: ties in the vertex ordering resolve
// by insertion order via stable sort.
template <typename F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const NelderMeadConfig& config = {}) {
    const size_t dim = x0.size();
    NelderMeadResult result;
    if (dim == 0) {
        result.x = std::move(x0);
        result.value = f(result.x);
        result.evaluations = 1;
        return result;
    }

    int evaluations = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evaluations;
        return f(x);
    };

    std::vector<std::vector<double>> vertices;
    std::vector<double> values;
    vertices.push_back(x0);
    values.push_back(eval(x0));
    for (size_t i = 0; i < dim; ++i) {
        std::vector<double> v = x0;
        v[i] += config.initial_step;
        values.push_back(eval(v));
        vertices.push_back(std::move(v));
    }

    std::vector<size_t> order(vertices.size());
    auto sort_vertices = [&] {
        std::iota(order.begin(), order.end(), size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return values[a] < values[b]; });
    };

    while (evaluations < config.max_evaluations) {
        sort_vertices();
        const size_t best = order.front();
        const size_t worst = order.back();
        const size_t second_worst = order[order.size() - 2];

        const double spread = values[worst] - values[best];
        if (spread <= std::max(config.spread_tolerance_abs,
                               config.spread_tolerance_rel * std::abs(values[best]))) {
            break;
        }

        std::vector<double> centroid(dim, 0.0);
        for (size_t idx : order) {
            if (idx == worst) continue;
            for (size_t j = 0; j < dim; ++j) centroid[j] += vertices[idx][j];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        std::vector<double> reflected(dim);
        for (size_t j = 0; j < dim; ++j) {
            reflected[j] = centroid[j] + (centroid[j] - vertices[worst][j]);
        }
        const double f_reflected = eval(reflected);

        if (f_reflected < values[best]) {
            std::vector<double> expanded(dim);
            for (size_t j = 0; j < dim; ++j) {
                expanded[j] = centroid[j] + 2.0 * (centroid[j] - vertices[worst][j]);
            }
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                vertices[worst] = std::move(expanded);
                values[worst] = f_expanded;
            } else {
                vertices[worst] = std::move(reflected);
                values[worst] = f_reflected;
            }
        } else if (f_reflected < values[second_worst]) {
            vertices[worst] = std::move(reflected);
            values[worst] = f_reflected;
        } else {
            std::vector<double> contracted(dim);
            if (f_reflected < values[worst]) {
                for (size_t j = 0; j < dim; ++j) {
                    contracted[j] = centroid[j] + 0.5 * (reflected[j] - centroid[j]);
                }
            } else {
                for (size_t j = 0; j < dim; ++j) {
                    contracted[j] = centroid[j] + 0.5 * (vertices[worst][j] - centroid[j]);
                }
            }
            const double f_contracted = eval(contracted);
            if (f_contracted < std::min(values[worst], f_reflected)) {
                vertices[worst] = std::move(contracted);
                values[worst] = f_contracted;
            } else {
                // Shrink toward the best vertex.
                for (size_t idx : order) {
                    if (idx == best) continue;
                    for (size_t j = 0; j < dim; ++j) {
                        vertices[idx][j] =
                            vertices[best][j] + 0.5 * (vertices[idx][j] - vertices[best][j]);
                    }
                    values[idx] = eval(vertices[idx]);
                    if (evaluations >= config.max_evaluations) break;
                }
            }
        }
    }

    sort_vertices();
    result.x = vertices[order.front()];
    result.value = values[order.front()];
    result.evaluations = evaluations;
    return result;
}

}  // namespace panelcause
