#include "volcast/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "volcast/errors.hpp"

namespace volcast::marketdata {

std::vector<VolatilitySeries> generate_synthetic_panel(int n_series, int n_days,
                                                       std::uint64_t seed,
                                                       const GeneratorParams& params) {
    if (n_series < 1) throw ConfigError("generate_synthetic_panel: n_series must be >= 1");
    if (n_days < 66) throw ConfigError("generate_synthetic_panel: n_days must be >= 66");
    if (!(params.phi > -1.0 && params.phi < 1.0)) {
        throw ConfigError("generate_synthetic_panel: phi must be in (-1,1)");
    }
    if (!(params.factor_phi > -1.0 && params.factor_phi < 1.0)) {
        throw ConfigError("generate_synthetic_panel: factor_phi must be in (-1,1)");
    }
    if (params.sigma < 0.0 || params.factor_sigma < 0.0) {
        throw ConfigError("generate_synthetic_panel: sigma must be non-negative");
    }
    if (params.mu_min > params.mu_max || params.beta_min > params.beta_max) {
        throw ConfigError("generate_synthetic_panel: empty parameter range");
    }
    if (params.burn_in < 0) throw ConfigError("generate_synthetic_panel: negative burn_in");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mu_dist(params.mu_min, params.mu_max);
    std::uniform_real_distribution<double> beta_dist(params.beta_min, params.beta_max);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const int n = n_series;
    std::vector<double> mu(n), beta(n);
    for (int i = 0; i < n; ++i) mu[i] = mu_dist(rng);
    for (int i = 0; i < n; ++i) beta[i] = beta_dist(rng);

    const int total = params.burn_in + n_days;
    std::vector<double> factor(total);
    double f = 0.0;
    for (int t = 0; t < total; ++t) {
        f = params.factor_phi * f + params.factor_sigma * gauss(rng);
        factor[t] = f;
    }

    std::vector<Date> dates(n_days);
    Date d = params.start_date;
    for (int t = 0; t < n_days; ++t) {
        dates[t] = d;
        d = d.next_day();
    }

    std::vector<VolatilitySeries> panel(n);
    for (int i = 0; i < n; ++i) {
        auto& series = panel[i];
        char name[16];
        std::snprintf(name, sizeof(name), "S%03d", i);
        series.ticker = name;
        series.dates = dates;
        series.values.resize(n_days);
        double z = 0.0; // log v - mu, starts at the series level
        for (int t = 0; t < total; ++t) {
            z = params.phi * z + beta[i] * factor[t] + params.sigma * gauss(rng);
            if (t >= params.burn_in) {
                series.values[t - params.burn_in] = std::exp(mu[i] + z);
            }
        }
    }
    return panel;
}

} // namespace volcast::marketdata
