#include "lfsel/taskgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "lfsel/csv_io.hpp"
#include "lfsel/error.hpp"

namespace lfsel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kComfortC = 18.0;

constexpr std::array<std::string_view, 4> kLevelNames{"building", "transformer", "microgrid", "feeder"};

constexpr std::array<std::string_view, 12> kChannelNames{
    "temperature",   "humidity",   "dew_point",  "wind_speed", "cloud_cover",          "irradiance",
    "pressure",      "precipitation", "heat_index", "wind_chill", "apparent_temperature", "visibility",
};

double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Stationary AR(1) path with the given marginal std and per-hour coefficient.
std::vector<double> ar1_path(std::size_t n, double hourly_phi, double sd, double step_hours, Rng& rng) {
    const double phi = std::pow(hourly_phi, step_hours);
    const double innov = sd * std::sqrt(1.0 - phi * phi);
    std::vector<double> out(n);
    double x = sd * standard_normal(rng);
    for (std::size_t i = 0; i < n; ++i) {
        x = phi * x + innov * standard_normal(rng);
        out[i] = x;
    }
    return out;
}

double circular_gap(double a, double b) {
    double d = std::fmod(std::abs(a - b), 24.0);
    return std::min(d, 24.0 - d);
}

long day_number(TimePoint t) {
    return std::chrono::floor<std::chrono::days>(t).time_since_epoch().count();
}

// 0 = Monday .. 6 = Sunday (1970-01-01 was a Thursday).
int weekday(long day) {
    return static_cast<int>(((day + 3) % 7 + 7) % 7);
}

double week_factor(LoadType type, double weekend_factor, int dow) {
    if (dow < 5) {
        return 1.0;
    }
    if (type == LoadType::Residential) {
        return weekend_factor;
    }
    return dow == 5 ? weekend_factor : 0.7 * weekend_factor;
}

std::string format_hours(double g) {
    return format_double(g);
}

WeatherSeries resample_weather(const WeatherSeries& w, TimePoint start, double from, double to) {
    std::vector<WeatherChannel> out;
    for (const auto& c : w.channels()) {
        const LoadSeries s(start, from, c.values);
        const auto r = resample(s, to);
        out.push_back({c.name, std::vector<double>(r.values().begin(), r.values().end())});
    }
    return WeatherSeries(std::move(out));
}

void require_file(std::ifstream& in, const std::filesystem::path& path) {
    if (!in) {
        fail(ErrorCode::Io, "cannot open " + path.string());
    }
}

}  // namespace

std::string_view level_name(AggregationLevel level) noexcept {
    return kLevelNames[static_cast<std::size_t>(level)];
}

AggregationLevel level_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kLevelNames.size(); ++i) {
        if (kLevelNames[i] == name) {
            return static_cast<AggregationLevel>(i);
        }
    }
    fail(ErrorCode::InvalidArgument, "unknown aggregation level '" + std::string(name) + "'");
}

std::pair<int, int> customer_range(AggregationLevel level, LoadType type) {
    switch (level) {
        case AggregationLevel::Building: return {1, 1};
        case AggregationLevel::Transformer: return type == LoadType::Residential ? std::pair{3, 10} : std::pair{2, 4};
        case AggregationLevel::Microgrid: return {50, 300};
        case AggregationLevel::Feeder: return {1000, 2000};
    }
    return {1, 1};
}

double daily_shape(LoadType type, double hour) {
    if (type == LoadType::Residential) {
        const double morning = std::exp(-0.5 * std::pow(circular_gap(hour, 7.5) / 1.2, 2));
        const double evening = std::exp(-0.5 * std::pow(circular_gap(hour, 19.5) / 2.0, 2));
        return std::min(1.0, 0.35 * morning + evening);
    }
    const double rise = 1.0 / (1.0 + std::exp(-2.0 * (hour - 8.0)));
    const double fall = 1.0 / (1.0 + std::exp(2.0 * (hour - 18.0)));
    return rise * fall;
}

SynthProfileParams draw_profile(LoadType type, Rng& rng) {
    SynthProfileParams p;
    if (type == LoadType::Residential) {
        p.base_kw = uniform(rng, 0.5, 1.5);
        p.daily_amplitude = uniform(rng, 0.8, 1.5);
        p.phase_shift_hours = uniform(rng, -1.0, 1.0);
        p.weekend_factor = uniform(rng, 1.0, 1.2);
        p.temp_sensitivity = uniform(rng, 0.02, 0.1) * p.base_kw;
        p.noise_std = uniform(rng, 0.15, 0.4);
        p.spike_rate = uniform(rng, 0.05, 0.2);
        p.spike_kw = uniform(rng, 1.0, 3.0) * p.base_kw;
    } else {
        p.base_kw = uniform(rng, 10.0, 40.0);
        p.daily_amplitude = uniform(rng, 0.8, 1.2);
        p.phase_shift_hours = uniform(rng, -0.5, 0.5);
        p.weekend_factor = uniform(rng, 0.3, 0.6);
        p.temp_sensitivity = uniform(rng, 0.03, 0.12) * p.base_kw;
        p.noise_std = uniform(rng, 0.05, 0.12);
    }
    p.noise_ar = uniform(rng, 0.6, 0.9);
    p.seed = rng();
    return p;
}

WeatherSeries synth_weather(int days, double granularity_hours, std::size_t channels, std::uint64_t seed,
                            TimePoint start) {
    if (days < 1) {
        fail(ErrorCode::InvalidArgument, "weather needs at least one day");
    }
    if (channels != 0 && channels != 1 && channels != 12) {
        fail(ErrorCode::InvalidArgument, "weather channel count must be 0, 1 or 12");
    }
    if (!(granularity_hours > 0.0 && granularity_hours <= 24.0)) {
        fail(ErrorCode::InvalidArgument, "weather granularity must lie in (0, 24] hours");
    }
    if (channels == 0) {
        return {};
    }
    Rng rng(seed);
    const auto n = static_cast<std::size_t>(std::lround(days * 24.0 / granularity_hours));
    const double g = granularity_hours;
    const double mean_t = uniform(rng, 10.0, 20.0);
    const double season_amp = uniform(rng, 8.0, 12.0);
    const double day_amp = uniform(rng, 3.0, 6.0);
    const auto t_noise = ar1_path(n, 0.97, 2.5, g, rng);
    const double day0 = static_cast<double>(day_number(start));
    const double hour0 = static_cast<double>((start - std::chrono::floor<std::chrono::days>(start)).count()) / 3600.0;

    std::vector<std::vector<double>> v(channels, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double hours = hour0 + static_cast<double>(i) * g;
        const double doy = std::fmod(day0 + hours / 24.0, 365.25);
        const double hod = std::fmod(hours, 24.0);
        v[0][i] = mean_t + season_amp * std::sin(kTwoPi * (doy - 105.0) / 365.25) +
                  day_amp * std::sin(kTwoPi * (hod - 9.0) / 24.0) + t_noise[i];
    }
    if (channels == 12) {
        const auto hum_noise = ar1_path(n, 0.95, 5.0, g, rng);
        const auto wind_noise = ar1_path(n, 0.9, 1.5, g, rng);
        const auto cloud_noise = ar1_path(n, 0.95, 0.2, g, rng);
        const auto press_noise = ar1_path(n, 0.995, 6.0, g, rng);
        for (std::size_t i = 0; i < n; ++i) {
            const double hod = std::fmod(hour0 + static_cast<double>(i) * g, 24.0);
            const double t = v[0][i];
            const double hum = std::clamp(65.0 - 1.2 * (t - mean_t) + hum_noise[i], 5.0, 100.0);
            const double wind = std::max(0.0, 3.0 + wind_noise[i]);
            const double cloud = std::clamp(0.5 + cloud_noise[i], 0.0, 1.0);
            const double precip = std::max(0.0, cloud - 0.75) * 10.0;
            v[1][i] = hum;
            v[2][i] = t - (100.0 - hum) / 5.0;
            v[3][i] = wind;
            v[4][i] = cloud;
            v[5][i] = std::max(0.0, std::sin(std::numbers::pi * (hod - 6.0) / 12.0)) * 800.0 * (1.0 - 0.7 * cloud);
            v[6][i] = 1013.0 + press_noise[i];
            v[7][i] = precip;
            v[8][i] = t + 0.1 * std::max(0.0, t - 20.0) * hum / 50.0;
            v[9][i] = t < 10.0 ? t - 0.7 * wind : t;
            v[10][i] = t + 0.02 * hum - 0.7 * wind;
            v[11][i] = 20.0 - 15.0 * cloud - 0.5 * precip;
        }
    }
    std::vector<WeatherChannel> out;
    for (std::size_t c = 0; c < channels; ++c) {
        out.push_back({std::string(kChannelNames[c]), std::move(v[c])});
    }
    return WeatherSeries(std::move(out));
}

LoadSeries synth_building(LoadType type, const SynthProfileParams& params, const WeatherSeries& weather,
                          TimePoint start, double granularity_hours, std::size_t samples) {
    if (weather.channel_count() > 0 && weather.length() != samples) {
        fail(ErrorCode::GridMismatch, "weather grid does not match the requested load grid");
    }
    if (!(granularity_hours > 0.0 && granularity_hours <= 24.0)) {
        fail(ErrorCode::InvalidArgument, "building granularity must lie in (0, 24] hours");
    }
    Rng rng(params.seed);
    const double g = granularity_hours;
    const auto per_day = static_cast<std::size_t>(std::max(1L, std::lround(24.0 / g)));
    const double hour0 = static_cast<double>((start - std::chrono::floor<std::chrono::days>(start)).count()) / 3600.0;
    const long day0 = day_number(start);

    std::vector<double> shape(per_day);
    for (std::size_t p = 0; p < per_day; ++p) {
        shape[p] = daily_shape(type, std::fmod(static_cast<double>(p) * g + 24.0 - params.phase_shift_hours, 24.0));
    }
    const double phi = std::pow(params.noise_ar, g);
    const double innov = params.noise_std * params.base_kw * std::sqrt(1.0 - phi * phi);
    const double spike_p = 1.0 - std::exp(-params.spike_rate * g);
    const auto spike_len = static_cast<std::size_t>(std::max(1.0, std::ceil(1.0 / g)));
    double noise = params.noise_std * params.base_kw * standard_normal(rng);
    std::size_t spike_left = 0;

    std::vector<double> y(samples);
    const auto offset = static_cast<std::size_t>(std::lround(hour0 / g));
    for (std::size_t i = 0; i < samples; ++i) {
        const std::size_t slot = offset + i;
        const long day = day0 + static_cast<long>(slot / per_day);
        const double temp = weather.channel_count() > 0 ? weather.channel(0).values[i] : kComfortC;
        noise = phi * noise + innov * standard_normal(rng);
        if (spike_left == 0 && params.spike_rate > 0.0 && uniform01(rng) < spike_p) {
            spike_left = spike_len;
        }
        double v = params.base_kw * (0.3 + params.daily_amplitude * shape[slot % per_day]) *
                       week_factor(type, params.weekend_factor, weekday(day)) +
                   params.temp_sensitivity * std::abs(temp - kComfortC) + noise;
        if (spike_left > 0) {
            v += params.spike_kw;
            --spike_left;
        }
        y[i] = std::max(0.0, v);
    }
    return LoadSeries(start, g, std::move(y));
}

void CorpusSpec::validate() const {
    if (levels.empty() || load_types.empty() || weather_counts.empty() || history_days.empty() || horizons.empty() ||
        granularities.empty()) {
        fail(ErrorCode::EmptySpec, "every corpus dimension needs at least one value");
    }
    for (const int w : weather_counts) {
        if (w != 0 && w != 1 && w != 12) fail(ErrorCode::InvalidArgument, "weather counts must be 0, 1 or 12");
    }
    for (const int h : history_days) {
        if (h != 30 && h != 180 && h != 360) fail(ErrorCode::InvalidArgument, "history must be 30, 180 or 360 days");
    }
    for (const int k : horizons) {
        if (k != 4 && k != 24 && k != 168 && k != 720) fail(ErrorCode::InvalidArgument, "horizon must be 4, 24, 168 or 720 h");
    }
    for (const double g : granularities) {
        if (g != 0.25 && g != 0.5 && g != 1.0 && g != 24.0) {
            fail(ErrorCode::InvalidArgument, "granularity must be 0.25, 0.5, 1 or 24 h");
        }
    }
}

std::vector<std::string> corpus_constraints() {
    return {
        "12 weather channels only at feeder level",
        "30-day (720 h) horizons only at feeder level with daily granularity",
        "daily granularity only at feeder level, with 24, 168 or 720 h horizons",
        "feeder level uses hourly or daily granularity",
        "history must cover at least two horizons (N >= 2K)",
        "horizon must be a whole number of samples",
    };
}

bool admissible(AggregationLevel level, int n_weather, int history_days, int horizon_hours, double granularity_hours) {
    const bool feeder = level == AggregationLevel::Feeder;
    if (history_days * 24 < 2 * horizon_hours) return false;
    if (n_weather == 12 && !feeder) return false;
    if (horizon_hours == 720 && (!feeder || granularity_hours != 24.0)) return false;
    if (granularity_hours == 24.0 && (!feeder || horizon_hours == 4)) return false;
    if (feeder && granularity_hours != 1.0 && granularity_hours != 24.0) return false;
    return true;
}

std::vector<TaskCombination> enumerate_corpus(const CorpusSpec& spec) {
    spec.validate();
    std::vector<TaskCombination> out;
    std::size_t index = 0;
    for (const auto level : spec.levels) {
        for (const auto type : spec.load_types) {
            for (const int w : spec.weather_counts) {
                for (const int days : spec.history_days) {
                    for (const int k : spec.horizons) {
                        for (const double g : spec.granularities) {
                            const double samples = k / g;
                            if (std::abs(samples - std::round(samples)) > 1e-9 || days * 24 < 2 * k) {
                                continue;
                            }
                            if (spec.constrained && !admissible(level, w, days, k, g)) {
                                continue;
                            }
                            TaskCombination c;
                            char id[16];
                            std::snprintf(id, sizeof id, "t%04zu", out.size());
                            c.id = id;
                            c.level = level;
                            c.load_type = type;
                            c.n_weather = w;
                            c.history_days = days;
                            c.horizon_hours = k;
                            c.granularity_hours = g;
                            c.seed = derive_seed(spec.seed, index);
                            out.push_back(std::move(c));
                            ++index;
                        }
                    }
                }
            }
        }
    }
    return out;
}

LFTask generate_task(const TaskCombination& combo) {
    Rng rng(combo.seed);
    const auto [lo, hi] = customer_range(combo.level, combo.load_type);
    const int customers = std::uniform_int_distribution<int>(lo, hi)(rng);
    using namespace std::chrono;
    const TimePoint start = sys_days{year{2019} / January / 1} + days{std::uniform_int_distribution<int>(0, 364)(rng)};

    const double fine = std::min(combo.granularity_hours, 1.0);
    const auto samples = static_cast<std::size_t>(std::lround(combo.history_days * 24.0 / fine));
    const auto wchannels = static_cast<std::size_t>(std::max(1, combo.n_weather));
    WeatherSeries weather = synth_weather(combo.history_days, fine, wchannels, derive_seed(combo.seed, 1), start);

    std::vector<double> total(samples, 0.0);
    Rng brng(derive_seed(combo.seed, 2));
    for (int b = 0; b < customers; ++b) {
        const auto params = draw_profile(combo.load_type, brng);
        const auto one = synth_building(combo.load_type, params, weather, start, fine, samples);
        for (std::size_t i = 0; i < samples; ++i) {
            total[i] += one[i];
        }
    }
    LoadSeries load(start, fine, std::move(total));
    if (combo.n_weather == 0) {
        weather = WeatherSeries{};
    }
    if (combo.granularity_hours > fine) {
        load = resample(load, combo.granularity_hours);
        weather = resample_weather(weather, start, fine, combo.granularity_hours);
    }
    TaskRequirements req;
    req.granularity_hours = combo.granularity_hours;
    req.history_days = combo.history_days;
    req.horizon_hours = combo.horizon_hours;
    req.n_weather = combo.n_weather;
    req.n_customers = customers;
    req.load_type = combo.load_type;
    return LFTask(combo.id, std::move(load), std::move(weather), req);
}

std::vector<LFTask> generate_corpus(const CorpusSpec& spec) {
    const auto combos = enumerate_corpus(spec);
    if (combos.empty()) {
        fail(ErrorCode::EmptySpec, "the corpus grid admits no task");
    }
    std::vector<LFTask> tasks;
    tasks.reserve(combos.size());
    for (const auto& c : combos) {
        tasks.push_back(generate_task(c));
    }
    return tasks;
}

void write_requirements(const std::filesystem::path& path, const TaskRequirements& req) {
    std::ofstream out(path);
    if (!out) {
        fail(ErrorCode::Io, "cannot write " + path.string());
    }
    out << "granularity_hours=" << format_hours(req.granularity_hours) << '\n'
        << "history_days=" << req.history_days << '\n'
        << "horizon_hours=" << req.horizon_hours << '\n'
        << "n_weather=" << req.n_weather << '\n'
        << "n_customers=" << req.n_customers << '\n'
        << "load_type=" << (req.load_type == LoadType::Residential ? "residential" : "commercial") << '\n';
}

TaskRequirements read_requirements(const std::filesystem::path& path) {
    std::ifstream in(path);
    require_file(in, path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(ErrorCode::MalformedRow, path.string() + ": expected key=value, got '" + line + "'");
        }
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    const auto get = [&](const char* key) -> const std::string& {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            fail(ErrorCode::MalformedRow, path.string() + ": missing key '" + key + "'");
        }
        return it->second;
    };
    TaskRequirements req;
    try {
        req.granularity_hours = std::stod(get("granularity_hours"));
        req.history_days = std::stoi(get("history_days"));
        req.horizon_hours = std::stoi(get("horizon_hours"));
        req.n_weather = std::stoi(get("n_weather"));
        req.n_customers = std::stoi(get("n_customers"));
    } catch (const std::logic_error&) {
        fail(ErrorCode::MalformedRow, path.string() + ": non-numeric requirement value");
    }
    const auto& type = get("load_type");
    if (type == "residential" || type == "0") {
        req.load_type = LoadType::Residential;
    } else if (type == "commercial" || type == "1") {
        req.load_type = LoadType::Commercial;
    } else {
        fail(ErrorCode::MalformedRow, path.string() + ": unknown load_type '" + type + "'");
    }
    for (const auto& [key, value] : kv) {
        static const std::array<std::string_view, 6> known{"granularity_hours", "history_days", "horizon_hours",
                                                           "n_weather",         "n_customers",  "load_type"};
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            fail(ErrorCode::MalformedRow, path.string() + ": unknown key '" + key + "'");
        }
    }
    req.validate();
    return req;
}

void write_corpus(const std::filesystem::path& dir, const std::vector<TaskCombination>& combos,
                  const std::vector<LFTask>& tasks) {
    if (combos.size() != tasks.size()) {
        fail(ErrorCode::LengthMismatch, "combination and task lists differ in length");
    }
    std::filesystem::create_directories(dir);
    std::ofstream index(dir / "index.csv");
    if (!index) {
        fail(ErrorCode::Io, "cannot write " + (dir / "index.csv").string());
    }
    for (const auto& rule : corpus_constraints()) {
        index << "# constraint: " << rule << '\n';
    }
    index << "id,level,load_type,n_customers,n_weather,history_days,horizon_hours,granularity_hours,seed\n";
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& c = combos[i];
        const auto& t = tasks[i];
        index << t.id << ',' << level_name(c.level) << ','
              << (c.load_type == LoadType::Residential ? "residential" : "commercial") << ','
              << t.requirements.n_customers << ',' << c.n_weather << ',' << c.history_days << ',' << c.horizon_hours
              << ',' << format_hours(c.granularity_hours) << ',' << c.seed << '\n';
        write_requirements(dir / (t.id + ".req"), t.requirements);
        write_csv(dir / (t.id + ".csv"), t.load, t.weather);
    }
}

std::vector<std::string> read_corpus_index(const std::filesystem::path& dir) {
    const auto path = dir / "index.csv";
    std::ifstream in(path);
    require_file(in, path);
    std::vector<std::string> ids;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        ids.push_back(line.substr(0, line.find(',')));
    }
    return ids;
}

LFTask read_task(const std::filesystem::path& dir, const std::string& id) {
    auto req = read_requirements(dir / (id + ".req"));
    auto data = ingest_csv(dir / (id + ".csv"));
    return LFTask(id, std::move(data.load), std::move(data.weather), req);
}

std::vector<LFTask> read_corpus(const std::filesystem::path& dir) {
    std::vector<LFTask> tasks;
    for (const auto& id : read_corpus_index(dir)) {
        tasks.push_back(read_task(dir, id));
    }
    return tasks;
}

}  // namespace lfsel
