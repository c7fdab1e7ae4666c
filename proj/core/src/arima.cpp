#include "volcast/arima.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "volcast/errors.hpp"
#include "volcast/nelder_mead.hpp"

namespace volcast::arima {

namespace {

constexpr double kCoefBound = 0.99;
constexpr double kSigma2Floor = 1e-12;
constexpr double kMinRootModulus = 1.01;
constexpr double kMinFactorSeparation = 0.05;

// Durand-Kerner root finder, plenty for the degree <= 3 lag polynomials here.
std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& coeffs) {
    // coeffs ascending: c0 + c1 z + ... + cn z^n, cn != 0
    const std::size_t degree = coeffs.size() - 1;
    std::vector<std::complex<double>> roots(degree);
    std::complex<double> seed(0.4, 0.9);
    std::complex<double> power(1.0, 0.0);
    for (std::size_t i = 0; i < degree; ++i) {
        power *= seed;
        roots[i] = power;
    }
    auto eval = [&](std::complex<double> z) {
        std::complex<double> value(0.0, 0.0);
        for (std::size_t i = coeffs.size(); i-- > 0;) value = value * z + coeffs[i];
        return value;
    };
    const std::complex<double> lead(coeffs.back(), 0.0);
    for (int iter = 0; iter < 200; ++iter) {
        double shift = 0.0;
        for (std::size_t i = 0; i < degree; ++i) {
            std::complex<double> denom = lead;
            for (std::size_t j = 0; j < degree; ++j) {
                if (j != i) denom *= roots[i] - roots[j];
            }
            if (std::abs(denom) < 1e-300) continue;
            const std::complex<double> delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            shift = std::max(shift, std::abs(delta));
        }
        if (shift < 1e-12) break;
    }
    return roots;
}

// Lag-polynomial admissibility: every root of 1 - phi_1 z - ... (AR) and
// 1 + theta_1 z + ... (MA) must lie outside the 1.01 circle, and no AR root
// may sit within 0.05 of an MA root. Overfit ARMA models on featureless
// data materialize as near-canceling AR/MA factor pairs near the unit
// circle; both guards together keep them out of the selection.
bool roots_admissible(const std::vector<double>& ar, const std::vector<double>& ma) {
    auto roots_of = [](std::vector<double> poly) {
        while (!poly.empty() && std::abs(poly.back()) < 1e-12) poly.pop_back();
        if (poly.size() < 2) return std::vector<std::complex<double>>{};
        return polynomial_roots(poly);
    };
    std::vector<double> ar_poly{1.0};
    for (double phi : ar) ar_poly.push_back(-phi);
    std::vector<double> ma_poly{1.0};
    for (double theta : ma) ma_poly.push_back(theta);
    const auto ar_roots = roots_of(std::move(ar_poly));
    const auto ma_roots = roots_of(std::move(ma_poly));
    for (const auto& root : ar_roots) {
        if (std::abs(root) < kMinRootModulus) return false;
    }
    for (const auto& root : ma_roots) {
        if (std::abs(root) < kMinRootModulus) return false;
    }
    for (const auto& a : ar_roots) {
        for (const auto& m : ma_roots) {
            if (std::abs(a - m) < kMinFactorSeparation) return false;
        }
    }
    return true;
}

double to_coef(double u) { return kCoefBound * std::tanh(u); }

double from_coef(double c) {
    const double clamped = std::clamp(c / kCoefBound, -0.999, 0.999);
    return std::atanh(clamped);
}

// Innovations of the CSS recursion over the whole series: pre-sample
// innovations are zero and pre-sample values sit at the mean, so every
// order conditions on the same effective sample and their AICs compare.
std::vector<double> innovations(std::span<const double> w, std::span<const double> ar,
                                std::span<const double> ma, double mean) {
    const std::size_t p = ar.size();
    const std::size_t q = ma.size();
    std::vector<double> eps(w.size(), 0.0);
    for (std::size_t t = 0; t < w.size(); ++t) {
        double value = w[t] - mean;
        for (std::size_t i = 0; i < p && i < t; ++i) value -= ar[i] * (w[t - 1 - i] - mean);
        for (std::size_t j = 0; j < q && j < t; ++j) value -= ma[j] * eps[t - 1 - j];
        eps[t] = value;
    }
    return eps;
}

double sample_mean(std::span<const double> x) {
    double sum = 0.0;
    for (double v : x) sum += v;
    return x.empty() ? 0.0 : sum / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = sample_mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size()));
}

struct CssFit {
    std::vector<double> ar, ma;
    double mean = 0.0;
    double css = 0.0;
    bool converged = false;
};

} // namespace

double css_objective(std::span<const double> w, std::span<const double> ar,
                     std::span<const double> ma, double mean) {
    const auto eps = innovations(w, ar, ma, mean);
    double css = 0.0;
    for (double e : eps) css += e * e;
    return css;
}

std::vector<double> difference(std::span<const double> x, int d) {
    if (d < 0) throw ConfigError("difference: negative order");
    std::vector<double> out(x.begin(), x.end());
    for (int k = 0; k < d; ++k) {
        if (out.empty()) throw DataError("difference: series exhausted");
        std::vector<double> next(out.size() - 1);
        for (std::size_t t = 0; t + 1 < out.size(); ++t) next[t] = out[t + 1] - out[t];
        out = std::move(next);
    }
    return out;
}

std::vector<double> integrate(std::span<const double> w, int d,
                              std::span<const double> initial) {
    if (d < 0) throw ConfigError("integrate: negative order");
    if (initial.size() != static_cast<std::size_t>(d)) {
        throw ConfigError("integrate: need exactly d initial values");
    }
    // head of the level-k differenced series, from the original leading values
    std::vector<double> heads(static_cast<std::size_t>(d));
    std::vector<double> prefix(initial.begin(), initial.end());
    for (int k = 0; k < d; ++k) {
        heads[static_cast<std::size_t>(k)] = prefix.front();
        prefix = difference(prefix, 1);
    }
    std::vector<double> out(w.begin(), w.end());
    for (int k = d - 1; k >= 0; --k) {
        std::vector<double> next(out.size() + 1);
        next[0] = heads[static_cast<std::size_t>(k)];
        for (std::size_t t = 0; t < out.size(); ++t) next[t + 1] = next[t] + out[t];
        out = std::move(next);
    }
    return out;
}

ArimaModel fit_arma_css(std::span<const double> series, ArimaOrder order,
                        const std::vector<std::vector<double>>& warm_starts) {
    if (order.p < 0 || order.q < 0 || order.d < 0) {
        throw ConfigError("fit_arma_css: negative order");
    }
    const auto w = difference(series, order.d);
    const std::size_t p = static_cast<std::size_t>(order.p);
    const std::size_t q = static_cast<std::size_t>(order.q);
    if (w.size() <= p + q + 1) {
        throw DataError("fit_arma_css: differenced series too short for order (" +
                        std::to_string(order.p) + "," + std::to_string(order.d) + "," +
                        std::to_string(order.q) + ")");
    }
    const bool include_mean = order.d == 0;
    const std::size_t n_eff = w.size();

    CssFit best;
    if (p == 0 && q == 0) {
        best.mean = include_mean ? sample_mean(w) : 0.0;
        best.css = css_objective(w, {}, {}, best.mean);
        best.converged = true;
    } else {
        const std::size_t dim = p + q + (include_mean ? 1 : 0);
        const double mean0 = include_mean ? sample_mean(w) : 0.0;

        auto unpack = [&](std::span<const double> x, std::vector<double>& ar,
                          std::vector<double>& ma, double& mean) {
            ar.resize(p);
            ma.resize(q);
            for (std::size_t i = 0; i < p; ++i) ar[i] = to_coef(x[i]);
            for (std::size_t j = 0; j < q; ++j) ma[j] = to_coef(x[p + j]);
            mean = include_mean ? x[p + q] : 0.0;
        };

        std::vector<double> ar_buf, ma_buf;
        auto objective = [&](std::span<const double> x) {
            double mean = 0.0;
            unpack(x, ar_buf, ma_buf, mean);
            return css_objective(w, ar_buf, ma_buf, mean);
        };

        std::vector<std::vector<double>> starts;
        starts.emplace_back(dim, 0.0);
        if (include_mean) starts.back()[p + q] = mean0;
        for (const auto& coefs : warm_starts) {
            if (coefs.size() != p + q) continue;
            std::vector<double> x(dim, 0.0);
            for (std::size_t i = 0; i < p + q; ++i) x[i] = from_coef(coefs[i]);
            if (include_mean) x[p + q] = mean0;
            starts.push_back(std::move(x));
        }

        opt::NelderMeadOptions options;
        options.max_evals = 4000 + 2000 * static_cast<int>(dim);
        options.steps.assign(dim, 0.5);
        if (include_mean) {
            options.steps[p + q] = std::max(0.5 * sample_sd(w), 1e-3);
        }

        bool first = true;
        for (const auto& start : starts) {
            const auto run = opt::minimize(objective, start, options);
            if (first || run.fx < best.css) {
                first = false;
                double mean = 0.0;
                unpack(run.x, best.ar, best.ma, mean);
                best.mean = mean;
                best.css = run.fx;
                best.converged = run.converged;
            }
        }
    }

    ArimaModel model;
    model.order = order;
    model.ar = best.ar;
    model.ma = best.ma;
    model.include_mean = include_mean;
    model.mean = best.mean;
    model.css = best.css;
    model.converged = best.converged;
    model.n_obs = static_cast<int>(n_eff);
    model.sigma2 = best.css / static_cast<double>(n_eff);
    if (model.sigma2 < kSigma2Floor) {
        model.sigma2 = kSigma2Floor;
        model.variance_floored = true;
    }
    const double k = static_cast<double>(p + q + 1 + (include_mean ? 1 : 0));
    const double loglik = -0.5 * static_cast<double>(n_eff) *
                          (std::log(2.0 * M_PI * model.sigma2) + 1.0);
    model.aic = 2.0 * k - 2.0 * loglik;
    return model;
}

ArimaModel auto_arima(std::span<const double> series, std::string_view label, int max_p,
                      int max_q, int max_d) {
    if (series.size() < 30) {
        throw DataError("auto_arima: need at least 30 observations (series '" +
                        std::string(label) + "')");
    }
    const int d = select_differencing(series, max_d);

    // parsimony order: by p+q, then p, then q
    std::vector<ArimaOrder> orders;
    for (int p = 0; p <= max_p; ++p) {
        for (int q = 0; q <= max_q; ++q) orders.push_back({p, d, q});
    }
    std::sort(orders.begin(), orders.end(), [](const ArimaOrder& a, const ArimaOrder& b) {
        if (a.p + a.q != b.p + b.q) return a.p + a.q < b.p + b.q;
        if (a.p != b.p) return a.p < b.p;
        return a.q < b.q;
    });

    std::vector<std::vector<const ArimaModel*>> table(
        static_cast<std::size_t>(max_p + 1),
        std::vector<const ArimaModel*>(static_cast<std::size_t>(max_q + 1), nullptr));
    std::vector<ArimaModel> fits;
    fits.reserve(orders.size());

    const ArimaModel* best = nullptr;
    for (const auto& order : orders) {
        std::vector<std::vector<double>> warm;
        auto add_warm = [&](int p_from, int q_from, bool grow_ar) {
            if (p_from < 0 || q_from < 0) return;
            const ArimaModel* prev =
                table[static_cast<std::size_t>(p_from)][static_cast<std::size_t>(q_from)];
            if (!prev) return;
            std::vector<double> coefs = prev->ar;
            if (grow_ar) coefs.push_back(0.0);
            coefs.insert(coefs.end(), prev->ma.begin(), prev->ma.end());
            if (!grow_ar) coefs.push_back(0.0);
            warm.push_back(std::move(coefs));
        };
        add_warm(order.p - 1, order.q, true);
        add_warm(order.p, order.q - 1, false);

        ArimaModel fit;
        try {
            fit = fit_arma_css(series, order, warm);
        } catch (const DataError&) {
            continue; // too short for this order
        }
        fits.push_back(std::move(fit));
        const ArimaModel* stored = &fits.back();
        table[static_cast<std::size_t>(order.p)][static_cast<std::size_t>(order.q)] = stored;
        if (!stored->converged) continue;
        if (!roots_admissible(stored->ar, stored->ma)) continue;
        if (!best || stored->aic < best->aic) best = stored;
    }

    if (!best) {
        throw NumericError("auto_arima: every candidate fit failed for series '" +
                           std::string(label) + "'");
    }
    return *best;
}

double forecast_one_step(const ArimaModel& model, std::span<const double> history) {
    const std::size_t p = model.ar.size();
    const std::size_t d = static_cast<std::size_t>(model.order.d);
    const std::size_t q = model.ma.size();
    if (history.size() < d + p) {
        throw DataError("forecast_one_step: history shorter than d + p");
    }

    // level-k tails for the final integration
    std::vector<double> tails(d);
    std::vector<double> level(history.begin(), history.end());
    for (std::size_t k = 0; k < d; ++k) {
        tails[k] = level.back();
        level = difference(level, 1);
    }
    const std::vector<double>& w = level;
    const std::size_t m = w.size();

    const double mu = model.include_mean ? model.mean : 0.0;
    const auto eps = innovations(w, model.ar, model.ma, mu);

    double next = mu;
    for (std::size_t i = 0; i < p; ++i) next += model.ar[i] * (w[m - 1 - i] - mu);
    for (std::size_t j = 0; j < q; ++j) {
        if (m >= j + 1) next += model.ma[j] * eps[m - 1 - j];
    }

    for (std::size_t k = d; k-- > 0;) next += tails[k];
    return next;
}

} // namespace volcast::arima
