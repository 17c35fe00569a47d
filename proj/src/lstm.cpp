#include "lfsel/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lfsel/error.hpp"
#include "lfsel/random.hpp"

namespace lfsel {

namespace {

using Eigen::Index;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Offsets {
    Index wx, wh, b, v, c, total;
};

Offsets offsets(int hidden, int input_dim) {
    const Index h4 = 4 * static_cast<Index>(hidden);
    Offsets o{};
    o.wx = 0;
    o.wh = o.wx + h4 * input_dim;
    o.b = o.wh + h4 * hidden;
    o.v = o.b + h4;
    o.c = o.v + hidden;
    o.total = o.c + 1;
    return o;
}

inline double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

struct Adam {
    VectorXd m, v;
    int t = 0;
    void step(VectorXd& theta, const VectorXd& g, double lr) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        if (m.size() != theta.size()) {
            m = VectorXd::Zero(theta.size());
            v = VectorXd::Zero(theta.size());
        }
        ++t;
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(b1, t);
        const double c2 = 1.0 - std::pow(b2, t);
        theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
};

double zscore(double v, double mean, double scale) {
    return (v - mean) / scale;
}

void fill_input(const LstmState& m, std::span<const std::span<const double>> weather, std::size_t t, double y_t,
                Eigen::Ref<VectorXd> x) {
    x(0) = zscore(y_t, m.load_mean, m.load_scale);
    const std::size_t next = t + 1;
    for (std::size_t c = 0; c < weather.size(); ++c) {
        x(static_cast<Index>(1 + c)) = zscore(weather[c][next], m.weather_mean[c], m.weather_scale[c]);
    }
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(next % m.period) / static_cast<double>(m.period);
    const auto base = static_cast<Index>(1 + weather.size());
    x(base) = std::sin(phase);
    x(base + 1) = std::cos(phase);
}

std::pair<double, double> moments(std::span<const double> v) {
    double mean = 0.0;
    for (const double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size()));
    return {mean, sd > 0.0 ? sd : 1.0};
}

}  // namespace

LstmNetwork::LstmNetwork(int hidden, int input_dim)
    : hidden_(hidden), input_dim_(input_dim), theta_(VectorXd::Zero(offsets(hidden, input_dim).total)) {
    if (hidden < 1 || input_dim < 1) {
        fail(ErrorCode::InvalidArgument, "LSTM needs at least one hidden unit and one input");
    }
}

void LstmNetwork::initialize(std::uint64_t seed) {
    const auto o = offsets(hidden_, input_dim_);
    Rng rng(seed);
    const double gate_bound = 1.0 / std::sqrt(static_cast<double>(input_dim_ + hidden_));
    const double head_bound = 1.0 / std::sqrt(static_cast<double>(hidden_));
    for (Index k = 0; k < o.total; ++k) {
        const double bound = k < o.v ? gate_bound : head_bound;
        theta_(k) = (2.0 * uniform01(rng) - 1.0) * bound;
    }
}

LstmNetwork::State LstmNetwork::zero_state() const {
    return {VectorXd::Zero(hidden_), VectorXd::Zero(hidden_)};
}

double LstmNetwork::step(const VectorXd& x, State& state) const {
    const auto o = offsets(hidden_, input_dim_);
    const Index H = hidden_;
    const Map<const MatrixXd> wx(theta_.data() + o.wx, 4 * H, input_dim_);
    const Map<const MatrixXd> wh(theta_.data() + o.wh, 4 * H, H);
    const Map<const VectorXd> b(theta_.data() + o.b, 4 * H);
    const Map<const VectorXd> v(theta_.data() + o.v, H);
    VectorXd z = wx * x + wh * state.h + b;
    for (Index k = 0; k < H; ++k) {
        const double i = sigmoid(z(k));
        const double f = sigmoid(z(H + k));
        const double g = std::tanh(z(2 * H + k));
        const double og = sigmoid(z(3 * H + k));
        state.c(k) = f * state.c(k) + i * g;
        state.h(k) = og * std::tanh(state.c(k));
    }
    return v.dot(state.h) + theta_(o.c);
}

double LstmNetwork::loss(const MatrixXd& x, std::span<const double> target, State state) const {
    double sum = 0.0;
    for (Index t = 0; t < x.cols(); ++t) {
        const double e = step(x.col(t), state) - target[static_cast<std::size_t>(t)];
        sum += e * e;
    }
    return sum / static_cast<double>(x.cols());
}

double LstmNetwork::loss_and_gradient(const MatrixXd& x, std::span<const double> target, State& state,
                                      VectorXd& grad) const {
    const auto o = offsets(hidden_, input_dim_);
    const Index H = hidden_;
    const Index T = x.cols();
    if (static_cast<Index>(target.size()) != T || x.rows() != input_dim_) {
        fail(ErrorCode::LengthMismatch, "LSTM inputs and targets disagree in shape");
    }
    const Map<const MatrixXd> wx(theta_.data() + o.wx, 4 * H, input_dim_);
    const Map<const MatrixXd> wh(theta_.data() + o.wh, 4 * H, H);
    const Map<const VectorXd> b(theta_.data() + o.b, 4 * H);
    const Map<const VectorXd> v(theta_.data() + o.v, H);
    const double c0 = theta_(o.c);

    MatrixXd gates = wx * x;
    gates.colwise() += b;
    MatrixXd hs(H, T + 1), cs(H, T + 1), tc(H, T);
    hs.col(0) = state.h;
    cs.col(0) = state.c;
    VectorXd err(T);
    double sum = 0.0;
    for (Index t = 0; t < T; ++t) {
        gates.col(t).noalias() += wh * hs.col(t);
        for (Index k = 0; k < H; ++k) {
            const double i = sigmoid(gates(k, t));
            const double f = sigmoid(gates(H + k, t));
            const double g = std::tanh(gates(2 * H + k, t));
            const double og = sigmoid(gates(3 * H + k, t));
            gates(k, t) = i;
            gates(H + k, t) = f;
            gates(2 * H + k, t) = g;
            gates(3 * H + k, t) = og;
            const double c = f * cs(k, t) + i * g;
            cs(k, t + 1) = c;
            tc(k, t) = std::tanh(c);
            hs(k, t + 1) = og * tc(k, t);
        }
        const double e = v.dot(hs.col(t + 1)) + c0 - target[static_cast<std::size_t>(t)];
        err(t) = e;
        sum += e * e;
    }

    grad.setZero(o.total);
    Map<VectorXd> gv(grad.data() + o.v, H);
    MatrixXd dz(4 * H, T);
    VectorXd dh_next = VectorXd::Zero(H);
    VectorXd dc_next = VectorXd::Zero(H);
    const double scale = 2.0 / static_cast<double>(T);
    for (Index t = T; t-- > 0;) {
        const double dy = scale * err(t);
        gv.noalias() += dy * hs.col(t + 1);
        grad(o.c) += dy;
        for (Index k = 0; k < H; ++k) {
            const double i = gates(k, t);
            const double f = gates(H + k, t);
            const double g = gates(2 * H + k, t);
            const double og = gates(3 * H + k, t);
            const double dh = dy * v(k) + dh_next(k);
            const double dc = dh * og * (1.0 - tc(k, t) * tc(k, t)) + dc_next(k);
            dz(k, t) = dc * g * i * (1.0 - i);
            dz(H + k, t) = dc * cs(k, t) * f * (1.0 - f);
            dz(2 * H + k, t) = dc * i * (1.0 - g * g);
            dz(3 * H + k, t) = dh * tc(k, t) * og * (1.0 - og);
            dc_next(k) = dc * f;
        }
        dh_next.noalias() = wh.transpose() * dz.col(t);
    }
    Map<MatrixXd>(grad.data() + o.wx, 4 * H, input_dim_).noalias() = dz * x.transpose();
    Map<MatrixXd>(grad.data() + o.wh, 4 * H, H).noalias() = dz * hs.leftCols(T).transpose();
    Map<VectorXd>(grad.data() + o.b, 4 * H) = dz.rowwise().sum();

    state.h = hs.col(T);
    state.c = cs.col(T);
    return sum / static_cast<double>(T);
}

LstmState fit_lstm(std::span<const double> y, std::span<const std::span<const double>> weather, std::size_t period,
                   const LstmConfig& config, std::uint64_t seed) {
    const std::size_t n = y.size();
    if (period < 1) {
        fail(ErrorCode::InvalidArgument, "LSTM period must be positive");
    }
    LstmState m;
    m.config = config;
    m.seed = seed;
    m.period = period;
    m.window = std::clamp<std::size_t>(period, 1, std::max<std::size_t>(1, config.window_cap));
    if (n < 10 * m.window || n < 3) {
        fail(ErrorCode::Infeasible, "LSTM needs at least ten input windows of training data");
    }
    const std::size_t start = config.max_fit_samples > 0 && n > config.max_fit_samples ? n - config.max_fit_samples : 0;
    const auto span_fit = y.subspan(start);
    std::tie(m.load_mean, m.load_scale) = moments(span_fit);
    for (const auto& channel : weather) {
        if (channel.size() < n) {
            fail(ErrorCode::GridMismatch, "weather channel shorter than the training range");
        }
        const auto [mu, sd] = moments(channel.subspan(start, n - start));
        m.weather_mean.push_back(mu);
        m.weather_scale.push_back(sd);
    }

    const int input_dim = static_cast<int>(3 + weather.size());
    m.net = LstmNetwork(config.hidden_units, input_dim);
    m.net.initialize(seed);

    const auto T = static_cast<Index>(n - start - 1);
    MatrixXd x(input_dim, T);
    std::vector<double> target(static_cast<std::size_t>(T));
    for (Index k = 0; k < T; ++k) {
        const std::size_t t = start + static_cast<std::size_t>(k);
        fill_input(m, weather, t, y[t], x.col(k));
        target[static_cast<std::size_t>(k)] = zscore(y[t + 1], m.load_mean, m.load_scale);
    }

    Adam adam;
    VectorXd grad;
    const auto chunk = static_cast<Index>(std::max<std::size_t>(1, config.tbptt));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto state = m.net.zero_state();
        for (Index s = 0; s < T; s += chunk) {
            const Index len = std::min(chunk, T - s);
            const MatrixXd xc = x.middleCols(s, len);
            m.net.loss_and_gradient(xc, std::span<const double>(target).subspan(static_cast<std::size_t>(s),
                                                                                static_cast<std::size_t>(len)),
                                    state, grad);
            const double norm = grad.norm();
            if (!std::isfinite(norm)) {
                fail(ErrorCode::NonConvergence, "LSTM gradient became non-finite");
            }
            if (norm > config.clip_norm) {
                grad *= config.clip_norm / norm;
            }
            adam.step(m.net.parameters(), grad, config.learning_rate);
        }
    }
    if (!m.net.parameters().allFinite()) {
        fail(ErrorCode::NonConvergence, "LSTM parameters became non-finite");
    }
    return m;
}

std::vector<double> lstm_forecast(const LstmState& model, std::span<const double> y,
                                  std::span<const std::span<const double>> weather, std::size_t origin,
                                  std::size_t horizon) {
    if (origin < 2 || origin > y.size()) {
        fail(ErrorCode::InvalidArgument, "forecast origin outside the observed series");
    }
    if (weather.size() != model.weather_mean.size()) {
        fail(ErrorCode::GridMismatch, "weather channel count differs from training");
    }
    for (const auto& channel : weather) {
        if (channel.size() < origin + horizon) {
            fail(ErrorCode::GridMismatch, "weather does not cover the forecast range");
        }
    }
    const std::size_t warm = std::min(model.window, origin - 1);
    auto state = model.net.zero_state();
    VectorXd x(model.net.input_dim());
    for (std::size_t t = origin - 1 - warm; t + 1 < origin; ++t) {
        fill_input(model, weather, t, y[t], x);
        model.net.step(x, state);
    }
    std::vector<double> out(horizon);
    double last = y[origin - 1];
    for (std::size_t h = 0; h < horizon; ++h) {
        fill_input(model, weather, origin - 1 + h, last, x);
        const double z = model.net.step(x, state);
        last = z * model.load_scale + model.load_mean;
        out[h] = last;
    }
    return out;
}

}  // namespace lfsel
