#pragma once

// Central finite-difference check of the output-layer MSE gradient.

#include <algorithm>
#include <cmath>

#include "malurl/rbfn.hpp"

namespace malurl::testing {

struct RandomProblem {
    RbfnModel model;
    LabeledSet batch;
};

inline RandomProblem random_problem(Rng& rng, std::size_t max_centers = 8, std::size_t max_dim = 5) {
    const std::size_t n = 1 + rng.index(max_centers);
    const std::size_t dim = 1 + rng.index(max_dim);
    const std::size_t classes = rng.index(2) ? 2 : 4;
    std::vector<RbfCenter> centers(n);
    for (auto& c : centers) {
        c.mu.resize(dim);
        for (auto& m : c.mu) m = rng.uniform01();
        c.sigma = 0.2 + rng.uniform01();
    }
    RandomProblem p{RbfnModel(std::move(centers), classes), {}};
    for (auto& w : p.model.weights()) w = rng.normal();
    for (auto& b : p.model.bias()) b = 0.5 * rng.normal();
    const std::size_t samples = 1 + rng.index(12);
    for (std::size_t s = 0; s < samples; ++s) {
        Vector x(dim);
        for (auto& v : x) v = rng.uniform01();
        p.batch.inputs.push_back(std::move(x));
        p.batch.labels.push_back(static_cast<int>(rng.index(classes)));
    }
    return p;
}

/// Largest |analytic - numeric| / max(|analytic|, |numeric|, floor) over all
/// weights and biases. The floor keeps rounding noise on near-zero
/// components from dominating.
inline double worst_gradient_error(const RandomProblem& problem, double step = 1e-5, double floor = 1e-4) {
    const auto analytic = mse_gradient(problem.model, problem.batch);
    RbfnModel probe = problem.model;
    double worst = 0.0;
    const auto relative = [&](double a, double n) {
        return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
    };
    for (std::size_t p = 0; p < probe.weights().size(); ++p) {
        const double saved = probe.weights()[p];
        probe.weights()[p] = saved + step;
        const double up = mse_loss(probe, problem.batch);
        probe.weights()[p] = saved - step;
        const double down = mse_loss(probe, problem.batch);
        probe.weights()[p] = saved;
        worst = std::max(worst, relative(analytic.weights[p], (up - down) / (2 * step)));
    }
    for (std::size_t k = 0; k < probe.bias().size(); ++k) {
        const double saved = probe.bias()[k];
        probe.bias()[k] = saved + step;
        const double up = mse_loss(probe, problem.batch);
        probe.bias()[k] = saved - step;
        const double down = mse_loss(probe, problem.batch);
        probe.bias()[k] = saved;
        worst = std::max(worst, relative(analytic.bias[k], (up - down) / (2 * step)));
    }
    return worst;
}

}  // namespace malurl::testing
