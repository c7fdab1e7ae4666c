#include "volcast/nelder_mead.hpp"

#include <algorithm>
#include <cmath>

#include "volcast/errors.hpp"

namespace volcast::opt {

NelderMeadResult minimize(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> x0, const NelderMeadOptions& options) {
    const std::size_t n = x0.size();
    NelderMeadResult result;
    if (n == 0) {
        result.x = {};
        result.fx = f({});
        result.evaluations = 1;
        result.converged = true;
        return result;
    }
    if (!options.steps.empty() && options.steps.size() != n) {
        throw ConfigError("nelder_mead: steps size mismatch");
    }

    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };

    std::vector<std::vector<double>> simplex(n + 1, std::vector<double>(x0.begin(), x0.end()));
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += options.steps.empty() ? options.initial_step : options.steps[i];
    }
    std::vector<double> fx(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fx[i] = eval(simplex[i]);

    std::vector<std::size_t> rank(n + 1);
    std::vector<double> centroid(n), candidate(n);

    while (evals < options.max_evals) {
        for (std::size_t i = 0; i <= n; ++i) rank[i] = i;
        std::sort(rank.begin(), rank.end(),
                  [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        const std::size_t best = rank.front();
        const std::size_t worst = rank.back();
        const std::size_t second_worst = rank[n - 1];

        double f_spread = std::abs(fx[worst] - fx[best]);
        double x_spread = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                x_spread = std::max(x_spread, std::abs(simplex[i][j] - simplex[best][j]));
            }
        }
        if (f_spread <= options.f_tol * (1.0 + std::abs(fx[best])) && x_spread <= options.x_tol) {
            result.converged = true;
            break;
        }

        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i <= n; ++i) {
                if (i != worst) s += simplex[i][j];
            }
            centroid[j] = s / static_cast<double>(n);
        }

        auto blend = [&](double alpha) {
            for (std::size_t j = 0; j < n; ++j) {
                candidate[j] = centroid[j] + alpha * (simplex[worst][j] - centroid[j]);
            }
        };

        blend(-1.0); // reflection
        const double f_reflect = eval(candidate);
        if (f_reflect < fx[best]) {
            auto reflected = candidate;
            blend(-2.0); // expansion
            const double f_expand = eval(candidate);
            if (f_expand < f_reflect) {
                simplex[worst] = candidate;
                fx[worst] = f_expand;
            } else {
                simplex[worst] = reflected;
                fx[worst] = f_reflect;
            }
        } else if (f_reflect < fx[second_worst]) {
            simplex[worst] = candidate;
            fx[worst] = f_reflect;
        } else {
            if (f_reflect < fx[worst]) {
                blend(-0.5); // outside contraction
            } else {
                blend(0.5); // inside contraction
            }
            const double f_contract = eval(candidate);
            if (f_contract < std::min(f_reflect, fx[worst])) {
                simplex[worst] = candidate;
                fx[worst] = f_contract;
            } else {
                // shrink toward the best vertex
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j) {
                        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
                    }
                    fx[i] = eval(simplex[i]);
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (fx[i] < fx[best]) best = i;
    }
    result.x = simplex[best];
    result.fx = fx[best];
    result.evaluations = evals;
    return result;
}

} // namespace volcast::opt
