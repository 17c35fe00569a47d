#include "lfsel/sarima.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lfsel/error.hpp"

namespace lfsel {

namespace {

// Sparse polynomial 1 + sum coef[k] B^lag[k] (the constant term is implicit).
struct SparsePoly {
    std::vector<std::size_t> lags;
    std::vector<double> coef;
    std::size_t degree() const { return lags.empty() ? 0 : lags.back(); }
};

// (1 + sum a_i B^i)(1 + sum b_k B^{ks}) without the leading 1.
SparsePoly multiply(std::span<const double> a, std::span<const double> b, std::size_t s) {
    const std::size_t deg = a.size() + b.size() * s;
    std::vector<double> dense(deg + 1, 0.0);
    for (std::size_t i = 0; i <= a.size(); ++i) {
        const double ai = i == 0 ? 1.0 : a[i - 1];
        for (std::size_t k = 0; k <= b.size(); ++k) {
            const double bk = k == 0 ? 1.0 : b[k - 1];
            dense[i + k * s] += ai * bk;
        }
    }
    SparsePoly out;
    for (std::size_t lag = 1; lag <= deg; ++lag) {
        if (dense[lag] != 0.0) {
            out.lags.push_back(lag);
            out.coef.push_back(dense[lag]);
        }
    }
    return out;
}

// w_t = sum_k a_k w_{t-k} + sum_k m_k e_{t-k} + e_t, i.e. the AR polynomial
// written with a_k = -(coefficient of B^k in phi(B)Phi(B^s)).
struct ArmaForm {
    SparsePoly ar;  // a_k
    SparsePoly ma;  // m_k
};

ArmaForm arma_form(const SarimaParams& prm) {
    std::vector<double> neg_ar(prm.ar.size());
    std::vector<double> neg_sar(prm.seasonal_ar.size());
    std::transform(prm.ar.begin(), prm.ar.end(), neg_ar.begin(), std::negate<>());
    std::transform(prm.seasonal_ar.begin(), prm.seasonal_ar.end(), neg_sar.begin(), std::negate<>());
    ArmaForm form;
    form.ar = multiply(neg_ar, neg_sar, prm.order.s);
    for (auto& c : form.ar.coef) {
        c = -c;
    }
    form.ma = multiply(prm.ma, prm.seasonal_ma, prm.order.s);
    return form;
}

// (1-B)^d (1-B^s)^D as dense coefficients, index = lag, [0] = 1.
std::vector<double> difference_poly(const SarimaOrder& o) {
    std::vector<double> poly{1.0};
    const auto times = [&poly](std::size_t lag) {
        std::vector<double> out(poly.size() + lag, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            out[i] += poly[i];
            out[i + lag] -= poly[i];
        }
        poly = std::move(out);
    };
    for (int i = 0; i < o.d; ++i) {
        times(1);
    }
    for (int i = 0; i < o.D; ++i) {
        times(o.s);
    }
    return poly;
}

std::vector<double> difference(std::span<const double> y, const std::vector<double>& delta, double mean) {
    const std::size_t deg = delta.size() - 1;
    if (y.size() <= deg) {
        return {};
    }
    std::vector<double> w(y.size() - deg);
    for (std::size_t t = deg; t < y.size(); ++t) {
        double v = 0.0;
        for (std::size_t k = 0; k <= deg; ++k) {
            if (delta[k] != 0.0) {
                v += delta[k] * (y[t - k] - mean);
            }
        }
        w[t - deg] = v;
    }
    return w;
}

// Residual recursion with pre-sample values of w and e set to zero.
void arma_residuals(const ArmaForm& f, std::span<const double> w, std::vector<double>& e) {
    const std::size_t m = w.size();
    e.assign(m, 0.0);
    const auto na = f.ar.lags.size();
    const auto nm = f.ma.lags.size();
    for (std::size_t t = 0; t < m; ++t) {
        double v = w[t];
        for (std::size_t k = 0; k < na; ++k) {
            const std::size_t lag = f.ar.lags[k];
            if (lag > t) {
                break;
            }
            v -= f.ar.coef[k] * w[t - lag];
        }
        for (std::size_t k = 0; k < nm; ++k) {
            const std::size_t lag = f.ma.lags[k];
            if (lag > t) {
                break;
            }
            v -= f.ma.coef[k] * e[t - lag];
        }
        e[t] = v;
    }
}

// First residual counted in the CSS; the AR recursion needs its lags, but
// long seasonal polynomials would otherwise consume the whole sample.
std::size_t css_start(const ArmaForm& f, std::size_t m) {
    return std::min(f.ar.degree(), m / 3);
}

double css_of(const ArmaForm& f, std::span<const double> w, std::vector<double>& scratch, std::size_t* count) {
    arma_residuals(f, w, scratch);
    const std::size_t start = css_start(f, w.size());
    double sum = 0.0;
    for (std::size_t t = start; t < w.size(); ++t) {
        sum += scratch[t] * scratch[t];
    }
    if (count != nullptr) {
        *count = w.size() - start;
    }
    return sum;
}

// Least squares with a whisper of ridge so collinear lag sets stay solvable.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd gram = x.transpose() * x;
    const double ridge = 1e-8 * std::max(1.0, gram.diagonal().maxCoeff());
    gram.diagonal().array() += ridge;
    return gram.ldlt().solve(x.transpose() * y);
}

// Unconstrained vector <-> structured coefficients.
struct Layout {
    int p, q, P, Q;
    int size() const { return p + q + P + Q; }
};

void unpack(const Layout& lay, const double* u, SarimaParams& prm) {
    const auto take = [&](int offset, int count) {
        return std::span<const double>(u + offset, static_cast<std::size_t>(count));
    };
    prm.ar = pacf_to_coefficients(take(0, lay.p));
    auto ma = pacf_to_coefficients(take(lay.p, lay.q));
    prm.seasonal_ar = pacf_to_coefficients(take(lay.p + lay.q, lay.P));
    auto sma = pacf_to_coefficients(take(lay.p + lay.q + lay.P, lay.Q));
    for (auto& c : ma) {
        c = -c;
    }
    for (auto& c : sma) {
        c = -c;
    }
    prm.ma = std::move(ma);
    prm.seasonal_ma = std::move(sma);
}

// Coefficients of 1 - sum c_i B^i mapped into unconstrained space, shrinking
// towards zero until the polynomial is safely stationary.
std::vector<double> to_unconstrained(std::vector<double> c) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        const auto r = coefficients_to_pacf(c);
        const bool ok = std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v) && std::abs(v) < 0.98; });
        if (ok) {
            std::vector<double> u(r.size());
            std::transform(r.begin(), r.end(), u.begin(), [](double v) { return std::atanh(v); });
            return u;
        }
        for (auto& v : c) {
            v *= 0.9;
        }
    }
    return std::vector<double>(c.size(), 0.0);
}

struct Objective {
    Layout layout;
    SarimaParams proto;
    std::span<const double> w;
    std::vector<double> scratch;
    int evaluations = 0;
};

double objective_fn(const gsl_vector* x, void* raw) {
    auto& obj = *static_cast<Objective*>(raw);
    ++obj.evaluations;
    SarimaParams prm = obj.proto;
    unpack(obj.layout, x->data, prm);
    const double v = css_of(arma_form(prm), obj.w, obj.scratch, nullptr);
    return std::isfinite(v) ? v : 1e300;
}

struct HrStart {
    std::vector<double> ar, ma, sar, sma;
};

// Hannan-Rissanen: long autoregression for an innovation proxy, then one
// linear regression on lagged values and lagged proxies.
HrStart hannan_rissanen(std::span<const double> w, const SarimaOrder& o) {
    HrStart start{std::vector<double>(o.p, 0.0), std::vector<double>(o.q, 0.0),
                  std::vector<double>(o.P, 0.0), std::vector<double>(o.Q, 0.0)};
    const std::size_t m = w.size();
    const std::size_t limit = m / 3;

    std::vector<std::size_t> long_lags;
    const std::size_t m1 = std::min<std::size_t>(std::max<std::size_t>(8, 2 * static_cast<std::size_t>(o.p + o.q)), limit);
    for (std::size_t l = 1; l <= m1; ++l) {
        long_lags.push_back(l);
    }
    if (o.s > 1 && o.P + o.Q > 0) {
        const int ks = std::max(o.P, o.Q) + 1;
        for (int k = 1; k <= ks; ++k) {
            for (std::size_t i = 0; i <= 2; ++i) {
                const std::size_t lag = static_cast<std::size_t>(k) * o.s + i;
                if (lag <= limit && lag > m1) {
                    long_lags.push_back(lag);
                }
            }
        }
    }
    if (long_lags.empty()) {
        return start;
    }
    const std::size_t long_max = long_lags.back();
    if (m < long_max + 2 * long_lags.size() + 10) {
        return start;
    }
    const auto rows = static_cast<Eigen::Index>(m - long_max);
    Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(long_lags.size()));
    Eigen::VectorXd target(rows);
    for (std::size_t t = long_max; t < m; ++t) {
        const auto r = static_cast<Eigen::Index>(t - long_max);
        target(r) = w[t];
        for (std::size_t c = 0; c < long_lags.size(); ++c) {
            x(r, static_cast<Eigen::Index>(c)) = w[t - long_lags[c]];
        }
    }
    const Eigen::VectorXd beta = least_squares(x, target);
    std::vector<double> ehat(m, 0.0);
    const Eigen::VectorXd fitted = x * beta;
    for (Eigen::Index r = 0; r < rows; ++r) {
        ehat[static_cast<std::size_t>(r) + long_max] = target(r) - fitted(r);
    }

    // Second stage; seasonal columns are dropped when the sample cannot support them.
    struct Column {
        bool from_residual;
        std::size_t lag;
        std::vector<double>* dest;
        std::size_t index;
    };
    std::vector<Column> cols;
    for (int i = 1; i <= o.p; ++i) cols.push_back({false, static_cast<std::size_t>(i), &start.ar, static_cast<std::size_t>(i - 1)});
    for (int i = 1; i <= o.q; ++i) cols.push_back({true, static_cast<std::size_t>(i), &start.ma, static_cast<std::size_t>(i - 1)});
    const auto add_seasonal = [&](int count, bool resid, std::vector<double>* dest) {
        for (int k = 1; k <= count; ++k) {
            const std::size_t lag = static_cast<std::size_t>(k) * o.s;
            if (lag + long_max <= limit) {
                cols.push_back({resid, lag, dest, static_cast<std::size_t>(k - 1)});
            }
        }
    };
    if (o.s > 1) {
        add_seasonal(o.P, false, &start.sar);
        add_seasonal(o.Q, true, &start.sma);
    }
    if (cols.empty()) {
        return start;
    }
    std::size_t first = long_max;
    for (const auto& c : cols) {
        first = std::max(first, c.from_residual ? long_max + c.lag : c.lag);
    }
    if (m < first + 2 * cols.size() + 10) {
        return start;
    }
    const auto rows2 = static_cast<Eigen::Index>(m - first);
    Eigen::MatrixXd x2(rows2, static_cast<Eigen::Index>(cols.size()));
    Eigen::VectorXd y2(rows2);
    for (std::size_t t = first; t < m; ++t) {
        const auto r = static_cast<Eigen::Index>(t - first);
        y2(r) = w[t];
        for (std::size_t c = 0; c < cols.size(); ++c) {
            x2(r, static_cast<Eigen::Index>(c)) = cols[c].from_residual ? ehat[t - cols[c].lag] : w[t - cols[c].lag];
        }
    }
    const Eigen::VectorXd coef = least_squares(x2, y2);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const double v = coef(static_cast<Eigen::Index>(c));
        (*cols[c].dest)[cols[c].index] = std::isfinite(v) ? v : 0.0;
    }
    return start;
}

void validate_order(const SarimaOrder& o) {
    if (o.p < 0 || o.d < 0 || o.q < 0 || o.P < 0 || o.D < 0 || o.Q < 0) {
        fail(ErrorCode::InvalidArgument, "SARIMA orders must be non-negative");
    }
    if ((o.P + o.D + o.Q) > 0 && o.s < 2) {
        fail(ErrorCode::InvalidArgument, "seasonal terms need a period of at least 2");
    }
}

}  // namespace

std::vector<double> pacf_to_coefficients(std::span<const double> u) {
    const std::size_t p = u.size();
    std::vector<double> work(p), out(p);
    for (std::size_t j = 0; j < p; ++j) {
        work[j] = out[j] = std::tanh(u[j]);
    }
    for (std::size_t j = 1; j < p; ++j) {
        const double a = out[j];
        for (std::size_t k = 0; k < j; ++k) {
            work[k] -= a * out[j - k - 1];
        }
        std::copy(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(j), out.begin());
    }
    return out;
}

std::vector<double> coefficients_to_pacf(std::span<const double> c) {
    const std::size_t p = c.size();
    std::vector<double> work(c.begin(), c.end()), out(c.begin(), c.end());
    for (std::size_t j = p; j-- > 1;) {
        const double a = out[j];
        const double denom = 1.0 - a * a;
        if (!(std::abs(denom) > 1e-12)) {
            std::fill(out.begin(), out.end(), std::numeric_limits<double>::infinity());
            return out;
        }
        for (std::size_t k = 0; k < j; ++k) {
            work[k] = (out[k] + a * out[j - k - 1]) / denom;
        }
        std::copy(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(j), out.begin());
    }
    return out;
}

double sarima_css(const SarimaParams& params, std::span<const double> y) {
    const auto w = difference(y, difference_poly(params.order), params.mean);
    std::vector<double> scratch;
    return css_of(arma_form(params), w, scratch, nullptr);
}

SarimaParams fit_sarima(std::span<const double> y, const SarimaOrder& order, const SarimaFitOptions& options) {
    validate_order(order);
    const auto delta = difference_poly(order);
    const std::size_t deg = delta.size() - 1;
    if (y.size() < deg + static_cast<std::size_t>(order.parameter_count()) + 10) {
        fail(ErrorCode::TooShort, "not enough data for the requested SARIMA orders");
    }
    SarimaParams prm;
    prm.order = order;
    if (order.d == 0 && order.D == 0) {
        prm.mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    }
    std::vector<double> w = difference(y, delta, prm.mean);
    double ss = 0.0;
    for (const double v : w) {
        ss += v * v;
    }
    const double scale = std::sqrt(ss / static_cast<double>(w.size()));
    prm.ar.assign(order.p, 0.0);
    prm.ma.assign(order.q, 0.0);
    prm.seasonal_ar.assign(order.P, 0.0);
    prm.seasonal_ma.assign(order.Q, 0.0);
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        if (!std::isfinite(scale)) {
            fail(ErrorCode::NonConvergence, "non-finite differenced series");
        }
        return prm;  // deterministic after differencing: zero innovations
    }
    for (auto& v : w) {
        v /= scale;
    }

    const Layout layout{order.p, order.q, order.P, order.Q};
    if (layout.size() > 0) {
        const HrStart hr = hannan_rissanen(w, order);
        std::vector<double> neg_ma(hr.ma.size()), neg_sma(hr.sma.size());
        std::transform(hr.ma.begin(), hr.ma.end(), neg_ma.begin(), std::negate<>());
        std::transform(hr.sma.begin(), hr.sma.end(), neg_sma.begin(), std::negate<>());
        std::vector<double> u;
        for (const auto& part : {to_unconstrained(hr.ar), to_unconstrained(neg_ma), to_unconstrained(hr.sar),
                                 to_unconstrained(neg_sma)}) {
            u.insert(u.end(), part.begin(), part.end());
        }

        Objective obj{layout, prm, w, {}, 0};
        const auto n = static_cast<std::size_t>(layout.size());
        gsl_multimin_function fn{&objective_fn, n, &obj};
        gsl_vector* x = gsl_vector_alloc(n);
        gsl_vector* step = gsl_vector_alloc(n);
        for (std::size_t i = 0; i < n; ++i) {
            gsl_vector_set(x, i, u[i]);
        }
        gsl_vector_set_all(step, 0.15);
        gsl_multimin_fminimizer* solver = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
        gsl_multimin_fminimizer_set(solver, &fn, x, step);
        while (obj.evaluations < options.max_evaluations) {
            if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) {
                break;
            }
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), options.simplex_tolerance) == GSL_SUCCESS) {
                break;
            }
        }
        const double best = gsl_multimin_fminimizer_minimum(solver);
        std::vector<double> best_u(n);
        for (std::size_t i = 0; i < n; ++i) {
            best_u[i] = gsl_vector_get(solver->x, i);
        }
        gsl_multimin_fminimizer_free(solver);
        gsl_vector_free(step);
        gsl_vector_free(x);
        if (!std::isfinite(best) || best >= 1e300) {
            fail(ErrorCode::NonConvergence, "CSS refinement found no finite objective");
        }
        unpack(layout, best_u.data(), prm);
    }

    std::vector<double> scratch;
    std::size_t count = 0;
    const double css = css_of(arma_form(prm), w, scratch, &count);
    prm.sigma2 = count > 0 ? css / static_cast<double>(count) * scale * scale : 0.0;
    if (!std::isfinite(prm.sigma2)) {
        fail(ErrorCode::NonConvergence, "non-finite innovation variance");
    }
    return prm;
}

std::vector<double> sarima_residuals(const SarimaParams& params, std::span<const double> y) {
    const auto delta = difference_poly(params.order);
    const std::size_t deg = delta.size() - 1;
    std::vector<double> out(y.size(), 0.0);
    const auto w = difference(y, delta, params.mean);
    if (w.empty()) {
        return out;
    }
    std::vector<double> e;
    arma_residuals(arma_form(params), w, e);
    std::copy(e.begin(), e.end(), out.begin() + static_cast<std::ptrdiff_t>(deg));
    return out;
}

std::vector<double> sarima_forecast(const SarimaParams& params, std::span<const double> history, std::size_t horizon) {
    const auto delta = difference_poly(params.order);
    const std::size_t deg = delta.size() - 1;
    if (history.size() <= deg) {
        fail(ErrorCode::TooShort, "history shorter than the differencing order");
    }
    const auto form = arma_form(params);
    std::vector<double> w = difference(history, delta, params.mean);
    std::vector<double> e;
    arma_residuals(form, w, e);

    std::vector<double> y(history.begin(), history.end());
    for (auto& v : y) {
        v -= params.mean;
    }
    std::vector<double> out(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t t = w.size();
        double wt = 0.0;
        for (std::size_t k = 0; k < form.ar.lags.size(); ++k) {
            const std::size_t lag = form.ar.lags[k];
            if (lag > t) break;
            wt += form.ar.coef[k] * w[t - lag];
        }
        for (std::size_t k = 0; k < form.ma.lags.size(); ++k) {
            const std::size_t lag = form.ma.lags[k];
            if (lag > t) break;
            wt += form.ma.coef[k] * e[t - lag];
        }
        w.push_back(wt);
        e.push_back(0.0);
        const std::size_t ty = y.size();
        double yt = wt;
        for (std::size_t k = 1; k <= deg; ++k) {
            if (delta[k] != 0.0) {
                yt -= delta[k] * y[ty - k];
            }
        }
        y.push_back(yt);
        out[h] = yt + params.mean;
    }
    return out;
}

std::vector<double> simulate_sarima(const SarimaParams& params, std::size_t n, Rng& rng, std::size_t burn_in) {
    const auto form = arma_form(params);
    const auto delta = difference_poly(params.order);
    const std::size_t deg = delta.size() - 1;
    const std::size_t total = n + burn_in;
    const double sd = std::sqrt(params.sigma2);
    std::vector<double> w(total), e(total), y(total, 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        e[t] = sd * standard_normal(rng);
        double v = e[t];
        for (std::size_t k = 0; k < form.ar.lags.size(); ++k) {
            const std::size_t lag = form.ar.lags[k];
            if (lag > t) break;
            v += form.ar.coef[k] * w[t - lag];
        }
        for (std::size_t k = 0; k < form.ma.lags.size(); ++k) {
            const std::size_t lag = form.ma.lags[k];
            if (lag > t) break;
            v += form.ma.coef[k] * e[t - lag];
        }
        w[t] = v;
        double yt = v;
        for (std::size_t k = 1; k <= deg && k <= t; ++k) {
            yt -= delta[k] * y[t - k];
        }
        y[t] = yt;
    }
    std::vector<double> out(y.begin() + static_cast<std::ptrdiff_t>(burn_in), y.end());
    for (auto& v : out) {
        v += params.mean;
    }
    return out;
}

}  // namespace lfsel
