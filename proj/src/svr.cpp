#include "lfsel/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lfsel/error.hpp"

namespace lfsel {

namespace {

constexpr double kTau = 1e-12;

std::pair<double, double> moments(std::span<const double> v) {
    double mean = 0.0;
    for (const double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size()));
    return {mean, sd > 0.0 ? sd : 1.0};
}

void fill_row(const SvrState& m, std::span<const double> history, std::span<const std::span<const double>> weather,
              std::size_t t, std::span<double> row) {
    std::size_t k = 0;
    for (const std::size_t lag : m.lags) {
        row[k++] = (history[t - lag] - m.load_mean) / m.load_scale;
    }
    for (std::size_t c = 0; c < weather.size(); ++c) {
        row[k++] = (weather[c][t] - m.weather_mean[c]) / m.weather_scale[c];
    }
}

}  // namespace

SmoResult solve_svr_dual(const Eigen::MatrixXd& kernel, std::span<const double> target, const SmoOptions& options) {
    const auto n = static_cast<std::size_t>(kernel.rows());
    if (kernel.cols() != kernel.rows() || target.size() != n || n == 0) {
        fail(ErrorCode::LengthMismatch, "kernel matrix and targets disagree in size");
    }
    const double C = options.C;
    const std::size_t l = 2 * n;
    std::vector<double> alpha(l, 0.0), grad(l);
    std::vector<signed char> y(l);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = 1;
        y[i + n] = -1;
        grad[i] = options.epsilon - target[i];
        grad[i + n] = options.epsilon + target[i];
    }
    const auto K = [&](std::size_t a, std::size_t b) { return kernel(static_cast<Eigen::Index>(a % n),
                                                                     static_cast<Eigen::Index>(b % n)); };
    const auto upper = [&](std::size_t i) { return alpha[i] >= C; };
    const auto lower = [&](std::size_t i) { return alpha[i] <= 0.0; };

    SmoResult res;
    for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = l;
        for (std::size_t t = 0; t < l; ++t) {
            if (y[t] == 1 ? !upper(t) : !lower(t)) {
                const double v = -y[t] * grad[t];
                if (v >= gmax) {
                    gmax = v;
                    i = t;
                }
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        double obj_min = std::numeric_limits<double>::infinity();
        std::size_t j = l;
        for (std::size_t t = 0; t < l; ++t) {
            if (y[t] == 1 ? !lower(t) : !upper(t)) {
                const double v = y[t] * grad[t];
                gmax2 = std::max(gmax2, v);
                const double diff = gmax + v;
                if (i < l && diff > 0.0) {
                    double quad = K(i, i) + K(t, t) - 2.0 * K(i, t);
                    if (quad <= 0.0) quad = kTau;
                    const double obj = -diff * diff / quad;
                    if (obj <= obj_min) {
                        obj_min = obj;
                        j = t;
                    }
                }
            }
        }
        if (i == l || j == l || gmax + gmax2 < options.tolerance) {
            res.converged = true;
            break;
        }

        const double Qii = K(i, i), Qjj = K(j, j);
        const double Qij = y[i] * y[j] * K(i, j);
        const double old_i = alpha[i], old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = Qii + Qjj + 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
            }
            if (diff > 0.0) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
            } else {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
            }
        } else {
            double quad = Qii + Qjj - 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
            } else {
                if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
            }
            if (sum > C) {
                if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
            } else {
                if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
            }
        }
        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < l; ++t) {
            grad[t] += y[t] * (y[i] * K(t, i) * di + y[j] * K(t, j) * dj);
        }
    }

    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < l; ++t) {
        const double yg = y[t] * grad[t];
        if (upper(t)) {
            if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    res.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    res.beta.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        res.beta[t] = alpha[t] - alpha[t + n];
    }
    return res;
}

double gaussian_kernel(std::span<const double> a, std::span<const double> b, double bandwidth) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        d2 += d * d;
    }
    return std::exp(-d2 / (2.0 * bandwidth * bandwidth));
}

double median_pairwise_distance(const Eigen::MatrixXd& x) {
    std::vector<double> d;
    const auto n = x.rows();
    d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            d.push_back((x.row(i) - x.row(j)).norm());
        }
    }
    if (d.empty()) {
        return 1.0;
    }
    const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid > 0.0 ? *mid : 1.0;
}

double SvrRegressor::predict(std::span<const double> x) const {
    double f = -rho;
    for (Eigen::Index s = 0; s < support.rows(); ++s) {
        double d2 = 0.0;
        for (Eigen::Index k = 0; k < support.cols(); ++k) {
            const double d = support(s, k) - x[static_cast<std::size_t>(k)];
            d2 += d * d;
        }
        f += coef[static_cast<std::size_t>(s)] * std::exp(-d2 / (2.0 * bandwidth * bandwidth));
    }
    return f;
}

SvrRegressor fit_svr_regressor(const Eigen::MatrixXd& x, std::span<const double> target, const SmoOptions& options,
                               double bandwidth) {
    const auto n = x.rows();
    SvrRegressor reg;
    reg.C = options.C;
    reg.epsilon = options.epsilon;
    reg.bandwidth = bandwidth > 0.0 ? bandwidth : median_pairwise_distance(x);
    Eigen::MatrixXd k(n, n);
    const double inv = 1.0 / (2.0 * reg.bandwidth * reg.bandwidth);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            k(i, j) = k(j, i) = std::exp(-(x.row(i) - x.row(j)).squaredNorm() * inv);
        }
    }
    const auto sol = solve_svr_dual(k, target, options);
    if (!sol.converged) {
        fail(ErrorCode::NonConvergence, "SMO hit its iteration limit");
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (sol.beta[static_cast<std::size_t>(i)] != 0.0) {
            keep.push_back(i);
        }
    }
    reg.support.resize(static_cast<Eigen::Index>(keep.size()), x.cols());
    for (std::size_t s = 0; s < keep.size(); ++s) {
        reg.support.row(static_cast<Eigen::Index>(s)) = x.row(keep[s]);
        reg.coef.push_back(sol.beta[static_cast<std::size_t>(keep[s])]);
    }
    reg.rho = sol.rho;
    return reg;
}

std::vector<std::size_t> svr_lags(std::size_t period, std::size_t max_lags) {
    const std::size_t count = std::max<std::size_t>(1, std::min(period, max_lags));
    std::vector<std::size_t> lags;
    for (std::size_t l = 1; l <= count; ++l) {
        lags.push_back(l);
    }
    if (period > count) {
        lags.push_back(period);
    }
    return lags;
}

SvrState fit_svr(std::span<const double> y, std::span<const std::span<const double>> weather, std::size_t period,
                 const SvrConfig& config) {
    SvrState m;
    m.config = config;
    m.lags = svr_lags(period, config.max_lags);
    const std::size_t max_lag = m.lags.back();
    if (y.size() < max_lag + 30) {
        fail(ErrorCode::Infeasible, "SVR needs at least 30 training samples");
    }
    const std::size_t count = std::min(config.max_samples, y.size() - max_lag);
    const std::size_t first = y.size() - count;
    std::tie(m.load_mean, m.load_scale) = moments(y.subspan(first - max_lag));
    for (const auto& channel : weather) {
        const auto [mu, sd] = moments(channel.subspan(first, count));
        m.weather_mean.push_back(mu);
        m.weather_scale.push_back(sd);
    }
    const std::size_t dim = m.lags.size() + weather.size();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x(count, dim);
    std::vector<double> target(count);
    for (std::size_t r = 0; r < count; ++r) {
        const std::size_t t = first + r;
        fill_row(m, y, weather, t, std::span<double>(x.row(static_cast<Eigen::Index>(r)).data(), dim));
        target[r] = (y[t] - m.load_mean) / m.load_scale;
    }
    SmoOptions opt{config.C, config.epsilon_fraction, config.tolerance, config.max_iterations};
    m.regressor = fit_svr_regressor(x, target, opt);
    return m;
}

std::vector<double> svr_forecast(const SvrState& model, std::span<const double> y,
                                 std::span<const std::span<const double>> weather, std::size_t origin,
                                 std::size_t horizon) {
    const std::size_t max_lag = model.lags.back();
    if (origin < max_lag || origin > y.size()) {
        fail(ErrorCode::InvalidArgument, "forecast origin leaves too little history for the lag window");
    }
    for (const auto& channel : weather) {
        if (channel.size() < origin + horizon) {
            fail(ErrorCode::GridMismatch, "weather does not cover the forecast range");
        }
    }
    std::vector<double> hist(y.begin() + static_cast<std::ptrdiff_t>(origin - max_lag),
                             y.begin() + static_cast<std::ptrdiff_t>(origin));
    hist.resize(max_lag + horizon);
    std::vector<double> row(model.lags.size() + weather.size());
    std::vector<std::span<const double>> wshift;
    for (const auto& channel : weather) {
        wshift.push_back(channel.subspan(origin - max_lag));
    }
    for (std::size_t h = 0; h < horizon; ++h) {
        const std::size_t t = max_lag + h;
        fill_row(model, hist, wshift, t, row);
        hist[t] = model.regressor.predict(row) * model.load_scale + model.load_mean;
    }
    return {hist.begin() + static_cast<std::ptrdiff_t>(max_lag), hist.end()};
}

}  // namespace lfsel
