#pragma once

// Derivative-free local minimisation (Nelder-Mead simplex).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace qsd {

struct NelderMeadOptions {
    std::size_t max_evaluations = 100;
    double initial_step = 0.25;
    double f_tolerance = 1e-10;  // stop when simplex f-spread falls below
    double x_tolerance = 1e-10;  // ... or its diameter does
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
};

/// Minimise f from x0. Returns the best point evaluated; never exceeds
/// max_evaluations function calls. Fully deterministic.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opt = {}) {
    const std::size_t dim = x0.size();
    NelderMeadResult best;
    best.x = x0;
    if (opt.max_evaluations == 0) return best;

    auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        ++best.evaluations;
        if (v < best.f) {
            best.f = v;
            best.x = x;
        }
        return v;
    };
    auto budget_left = [&] { return best.evaluations < opt.max_evaluations; };

    std::vector<std::vector<double>> simplex{x0};
    std::vector<double> fv{eval(x0)};
    for (std::size_t i = 0; i < dim && budget_left(); ++i) {
        auto x = x0;
        x[i] += opt.initial_step;
        simplex.push_back(x);
        fv.push_back(eval(x));
    }
    if (simplex.size() < dim + 1) return best;

    constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);

    while (budget_left()) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        const std::size_t lo = order.front(), hi = order.back(), second = order[dim - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= dim; ++i)
            for (std::size_t d = 0; d < dim; ++d)
                diameter = std::max(diameter, std::abs(simplex[i][d] - simplex[lo][d]));
        if (fv[hi] - fv[lo] <= opt.f_tolerance && diameter <= opt.x_tolerance) break;
        if (fv[hi] - fv[lo] <= opt.f_tolerance * 1e-3) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == hi) continue;
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[i][d] / static_cast<double>(dim);
        }
        for (std::size_t d = 0; d < dim; ++d) xr[d] = centroid[d] + alpha * (centroid[d] - simplex[hi][d]);
        const double fr = eval(xr);
        if (fr < fv[lo]) {
            if (!budget_left()) {
                simplex[hi] = xr;
                fv[hi] = fr;
                break;
            }
            for (std::size_t d = 0; d < dim; ++d) xe[d] = centroid[d] + gamma * (xr[d] - centroid[d]);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[hi] = xe;
                fv[hi] = fe;
            } else {
                simplex[hi] = xr;
                fv[hi] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            simplex[hi] = xr;
            fv[hi] = fr;
            continue;
        }
        if (!budget_left()) break;
        const bool outside = fr < fv[hi];
        for (std::size_t d = 0; d < dim; ++d)
            xc[d] = outside ? centroid[d] + rho * (xr[d] - centroid[d]) : centroid[d] + rho * (simplex[hi][d] - centroid[d]);
        const double fc = eval(xc);
        if (fc < std::min(fr, fv[hi])) {
            simplex[hi] = xc;
            fv[hi] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i <= dim && budget_left(); ++i) {
            if (i == lo) continue;
            for (std::size_t d = 0; d < dim; ++d)
                simplex[i][d] = simplex[lo][d] + sigma * (simplex[i][d] - simplex[lo][d]);
            fv[i] = eval(simplex[i]);
        }
    }
    return best;
}

}  // namespace qsd
