#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lfsel {

/// Single-layer LSTM with a scalar linear head.
/// Parameters live in one flat vector laid out as
/// [W_x (4H x D, column-major) | W_h (4H x H) | b (4H) | v (H) | c (1)],
/// gate order i, f, g, o.
class LstmNetwork {
public:
    LstmNetwork() = default;
    LstmNetwork(int hidden, int input_dim);

    int hidden() const noexcept { return hidden_; }
    int input_dim() const noexcept { return input_dim_; }
    Eigen::Index parameter_count() const noexcept { return theta_.size(); }

    Eigen::VectorXd& parameters() noexcept { return theta_; }
    const Eigen::VectorXd& parameters() const noexcept { return theta_; }

    /// Uniform in +-1/sqrt(fan_in) (fan_in = D + H for gates, H for the head).
    void initialize(std::uint64_t seed);

    struct State {
        Eigen::VectorXd h;
        Eigen::VectorXd c;
    };
    State zero_state() const;

    /// Mean squared error of the one-step outputs over the columns of x
    /// against `target`, starting from `state`. Writes d(loss)/d(theta) into
    /// `grad` (resized) and advances `state` to the end of the sequence.
    double loss_and_gradient(const Eigen::MatrixXd& x, std::span<const double> target, State& state,
                             Eigen::VectorXd& grad) const;

    /// Same loss without gradients.
    double loss(const Eigen::MatrixXd& x, std::span<const double> target, State state) const;

    /// One recurrent step; returns the head output for the new state.
    double step(const Eigen::VectorXd& x, State& state) const;

private:
    int hidden_ = 0;
    int input_dim_ = 0;
    Eigen::VectorXd theta_;
};

struct LstmConfig {
    int hidden_units = 125;
    int epochs = 50;
    double learning_rate = 1e-3;
    /// Truncation length of back-propagation through time (one Adam step per chunk).
    std::size_t tbptt = 24;
    double clip_norm = 5.0;
    /// Upper bound on the input/warm-up window in samples.
    std::size_t window_cap = 168;
    /// Only the most recent samples of the training range are used.
    std::size_t max_fit_samples = 0;  // 0 = all
};

/// A trained forecaster over z-scored load and weather.
struct LstmState {
    LstmConfig config;
    std::uint64_t seed = 0;
    std::size_t window = 0;
    std::size_t period = 0;
    LstmNetwork net;
    double load_mean = 0.0;
    double load_scale = 1.0;
    std::vector<double> weather_mean;
    std::vector<double> weather_scale;
};

/// Inputs at step t predicting y[t+1]: z(y[t]), z(weather[t+1]), sin/cos of the
/// period phase of t+1. `weather` holds one span per channel covering at least
/// the training range (index-aligned with y).
LstmState fit_lstm(std::span<const double> y, std::span<const std::span<const double>> weather, std::size_t period,
                   const LstmConfig& config, std::uint64_t seed);

/// Forecast y[origin .. origin+horizon) from y[0, origin); weather must cover
/// the forecast range. Warms up from the zero state over the last `window`
/// observations, then rolls out recursively.
std::vector<double> lstm_forecast(const LstmState& model, std::span<const double> y,
                                  std::span<const std::span<const double>> weather, std::size_t origin,
                                  std::size_t horizon);

}  // namespace lfsel
