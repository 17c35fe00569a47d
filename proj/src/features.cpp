#include "lfsel/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lfsel/csv_io.hpp"
#include "lfsel/error.hpp"

namespace lfsel {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames{
    "data_length", "n_weather", "granularity", "horizon", "n_customers", "load_type",
    "mean",        "max",       "min",         "std",     "kurtosis",    "skewness",
    "fickleness",  "h_acf",     "h_pacf",      "periodicity",
};

struct Moments {
    double mean = 0.0;
    double sigma = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
};

Moments central_moments(std::span<const double> y) {
    if (y.empty()) {
        fail(ErrorCode::InvalidArgument, "empty series");
    }
    Moments m;
    m.mean = mean(y);
    double m2 = 0.0;
    for (const double v : y) {
        const double d = v - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m.m3 += d2 * d;
        m.m4 += d2 * d2;
    }
    const double n = static_cast<double>(y.size());
    m.sigma = std::sqrt(m2 / n);
    m.m3 /= n;
    m.m4 /= n;
    return m;
}

bool degenerate(const Moments& m) {
    return m.sigma == 0.0 || m.sigma <= 1e-12 * std::abs(m.mean);
}

int sign_of(double v) {
    return (v > 0.0) - (v < 0.0);
}

std::size_t lag_bound(std::size_t n, std::size_t expected_period) {
    return std::min(n / 2, 2 * expected_period);
}

std::size_t best_acf_peak(std::span<const double> r, std::size_t lo, std::size_t hi) {
    std::size_t best = 0;
    double best_value = -2.0;
    for (std::size_t lag = std::max<std::size_t>(lo, 1); lag <= hi && lag + 1 < r.size(); ++lag) {
        const bool peak = r[lag] > r[lag - 1] && r[lag] >= r[lag + 1];
        if (peak && r[lag] > best_value) {
            best_value = r[lag];
            best = lag;
        }
    }
    return best == 0 ? 1 : best;
}

}  // namespace

std::string_view feature_name(Feature f) noexcept {
    return kFeatureNames[static_cast<std::size_t>(f)];
}

double mean(std::span<const double> y) {
    if (y.empty()) {
        fail(ErrorCode::InvalidArgument, "empty series");
    }
    return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

double stddev(std::span<const double> y) {
    return central_moments(y).sigma;
}

double kurtosis(std::span<const double> y) {
    const auto m = central_moments(y);
    if (degenerate(m)) {
        fail(ErrorCode::DegenerateSeries, "kurtosis undefined for a constant series");
    }
    const double s2 = m.sigma * m.sigma;
    return m.m4 / (s2 * s2);
}

double skewness(std::span<const double> y) {
    const auto m = central_moments(y);
    if (degenerate(m)) {
        fail(ErrorCode::DegenerateSeries, "skewness undefined for a constant series");
    }
    return m.m3 / (m.sigma * m.sigma * m.sigma);
}

double fickleness(std::span<const double> y) {
    if (y.size() < 2) {
        fail(ErrorCode::TooShort, "fickleness needs at least two samples");
    }
    const double ybar = mean(y);
    std::size_t same = 0;
    int prev = sign_of(y[0] - ybar);
    for (std::size_t n = 1; n < y.size(); ++n) {
        const int cur = sign_of(y[n] - ybar);
        same += static_cast<std::size_t>(cur == prev);
        prev = cur;
    }
    return static_cast<double>(same) / static_cast<double>(y.size());
}

std::vector<double> acf_sequence(std::span<const double> y, std::size_t max_lag) {
    const std::size_t n = y.size();
    if (max_lag > n / 2) {
        fail(ErrorCode::LagOutOfRange, "lag " + std::to_string(max_lag) + " exceeds N/2 = " + std::to_string(n / 2));
    }
    const auto m = central_moments(y);
    if (degenerate(m)) {
        fail(ErrorCode::DegenerateSeries, "autocorrelation undefined for a constant series");
    }
    std::vector<double> centred(n);
    for (std::size_t i = 0; i < n; ++i) {
        centred[i] = y[i] - m.mean;
    }
    const double c0 = std::inner_product(centred.begin(), centred.end(), centred.begin(), 0.0);
    std::vector<double> r(max_lag + 1);
    r[0] = 1.0;
    for (std::size_t lag = 1; lag <= max_lag; ++lag) {
        const double c = std::inner_product(centred.begin() + static_cast<std::ptrdiff_t>(lag), centred.end(),
                                            centred.begin(), 0.0);
        r[lag] = c / c0;
    }
    return r;
}

std::vector<double> pacf_from_acf(std::span<const double> r, std::size_t max_lag) {
    if (r.size() < max_lag + 1) {
        fail(ErrorCode::LagOutOfRange, "ACF sequence shorter than requested PACF lag");
    }
    std::vector<double> out(max_lag);
    std::vector<double> phi(max_lag + 1, 0.0);
    std::vector<double> prev(max_lag + 1, 0.0);
    double v = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = r[k];
        for (std::size_t j = 1; j < k; ++j) {
            num -= prev[j] * r[k - j];
        }
        const double kk = v > 0.0 ? num / v : 0.0;
        phi[k] = kk;
        for (std::size_t j = 1; j < k; ++j) {
            phi[j] = prev[j] - kk * prev[k - j];
        }
        v *= (1.0 - kk * kk);
        out[k - 1] = kk;
        std::copy(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(k + 1), prev.begin());
    }
    return out;
}

double acf(std::span<const double> y, std::size_t lag) {
    return acf_sequence(y, lag)[lag];
}

double pacf(std::span<const double> y, std::size_t lag) {
    if (lag == 0) {
        fail(ErrorCode::LagOutOfRange, "PACF lags start at 1");
    }
    const auto r = acf_sequence(y, lag);
    return pacf_from_acf(r, lag)[lag - 1];
}

double h_acf(std::span<const double> y, std::size_t expected_period) {
    if (y.size() < 8) {
        fail(ErrorCode::TooShort, "H-ACF needs at least 8 samples");
    }
    const std::size_t bound = std::max<std::size_t>(1, lag_bound(y.size(), expected_period));
    const auto r = acf_sequence(y, bound);
    double best = 0.0;
    for (std::size_t lag = 1; lag <= bound; ++lag) {
        best = std::max(best, std::abs(r[lag]));
    }
    return best;
}

double h_pacf(std::span<const double> y, std::size_t expected_period) {
    if (y.size() < 8) {
        fail(ErrorCode::TooShort, "H-PACF needs at least 8 samples");
    }
    const std::size_t bound = std::max<std::size_t>(1, lag_bound(y.size(), expected_period));
    const auto r = acf_sequence(y, bound);
    const auto p = pacf_from_acf(r, bound);
    double best = 0.0;
    for (const double v : p) {
        best = std::max(best, std::abs(v));
    }
    return std::min(best, 1.0);
}

std::vector<std::size_t> candidate_periods(double granularity_hours) {
    if (granularity_hours >= 24.0) {
        return {7, 30};
    }
    const auto per_hour = 1.0 / granularity_hours;
    return {static_cast<std::size_t>(std::lround(24.0 * per_hour)),
            static_cast<std::size_t>(std::lround(168.0 * per_hour))};
}

std::size_t periodicity_among(std::span<const double> y, std::span<const std::size_t> candidates) {
    const std::size_t n = y.size();
    if (n < 6) {
        fail(ErrorCode::TooShort, "periodicity needs at least 6 samples");
    }
    std::vector<std::size_t> usable;
    for (const auto c : candidates) {
        if (c >= 1 && 3 * c <= n) {
            usable.push_back(c);
        }
    }
    const std::size_t largest = usable.empty() ? 0 : *std::max_element(usable.begin(), usable.end());
    const std::size_t search_max = usable.empty() ? n / 3 : std::min(n / 3, 2 * largest);
    const std::size_t max_lag = std::min(n / 2, std::max(largest, search_max + 1));
    const auto r = acf_sequence(y, max_lag);

    std::size_t best = 0;
    double best_value = 0.2;
    for (const auto c : usable) {
        if (r[c] > best_value) {
            best_value = r[c];
            best = c;
        }
    }
    if (best != 0) {
        return best;
    }
    return best_acf_peak(r, 2, search_max);
}

std::size_t periodicity(std::span<const double> y, double granularity_hours) {
    const auto candidates = candidate_periods(granularity_hours);
    const std::size_t largest = *std::max_element(candidates.begin(), candidates.end());
    if (y.size() < 3 * largest) {
        fail(ErrorCode::TooShort, "periodicity needs at least 3x the largest candidate period");
    }
    return periodicity_among(y, candidates);
}

FeatureVector extract_features(const LFTask& task) {
    const auto& req = task.requirements;
    const auto y = task.load.values();
    FeatureVector f;
    f[Feature::DataLength] = req.history_days;
    f[Feature::WeatherCount] = req.n_weather;
    f[Feature::Granularity] = req.granularity_hours;
    f[Feature::Horizon] = req.horizon_hours;
    f[Feature::Customers] = req.n_customers;
    f[Feature::LoadType] = static_cast<double>(static_cast<int>(req.load_type));

    const auto m = central_moments(y);
    if (degenerate(m)) {
        fail(ErrorCode::DegenerateSeries, "task " + task.id + ": constant load series");
    }
    f[Feature::Mean] = m.mean;
    f[Feature::Max] = *std::max_element(y.begin(), y.end());
    f[Feature::Min] = *std::min_element(y.begin(), y.end());
    f[Feature::StdDev] = m.sigma;
    f[Feature::Kurtosis] = kurtosis(y);
    f[Feature::Skewness] = skewness(y);
    f[Feature::Fickleness] = fickleness(y);

    const auto candidates = candidate_periods(req.granularity_hours);
    const std::size_t expected = *std::max_element(candidates.begin(), candidates.end());
    f[Feature::HAcf] = h_acf(y, expected);
    f[Feature::HPacf] = h_pacf(y, expected);
    f[Feature::Periodicity] = static_cast<double>(periodicity_among(y, candidates));
    return f;
}

std::string feature_csv_header() {
    std::string out = "task_id";
    for (const auto name : kFeatureNames) {
        out += ',';
        out += name;
    }
    return out;
}

std::string feature_csv_row(std::string_view task_id, const FeatureVector& f) {
    std::string out(task_id);
    for (const double v : f.values) {
        out += ',';
        out += format_double(v);
    }
    return out;
}

}  // namespace lfsel
