#include "lfsel/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lfsel/error.hpp"

namespace lfsel {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos ? std::string{} : field.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

bool parse_number(const std::string& text, double& out) {
    if (text.empty()) {
        return false;
    }
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (*begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end && std::isfinite(out);
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        fail(ErrorCode::MalformedRow, "column '" + name + "' not found in header");
    }
    return static_cast<std::size_t>(it - header.begin());
}

struct Row {
    TimePoint time;
    double load;
    std::vector<double> weather;
};

}  // namespace

std::optional<TimePoint> parse_timestamp(std::string_view text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    std::string buf(text);
    if (!buf.empty() && (buf.back() == 'Z' || buf.back() == 'z')) {
        buf.pop_back();
    }
    char sep = 0;
    int consumed = 0;
    const int got = std::sscanf(buf.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed);
    if (got < 6 || (sep != 'T' && sep != ' ')) {
        return std::nullopt;
    }
    std::string_view rest = std::string_view(buf).substr(static_cast<std::size_t>(consumed));
    if (!rest.empty()) {
        if (rest.front() != ':' || rest.size() != 3) {
            return std::nullopt;
        }
        const auto [ptr, ec] = std::from_chars(rest.data() + 1, rest.data() + rest.size(), s);
        if (ec != std::errc{} || ptr != rest.data() + rest.size()) {
            return std::nullopt;
        }
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) {
        return std::nullopt;
    }
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(TimePoint t) {
    using namespace std::chrono;
    const auto day_point = floor<days>(t);
    const year_month_day ymd{day_point};
    const hh_mm_ss hms{t - day_point};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

SeriesData parse_csv(std::istream& in, const CsvSchema& schema) {
    std::string line;
    if (!std::getline(in, line) || split_fields(line).empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
        fail(ErrorCode::EmptyFile, "no header row");
    }
    const auto header = split_fields(line);
    const std::size_t ts_col = schema.timestamp_column ? column_index(header, *schema.timestamp_column) : 0;
    const std::size_t load_col = schema.load_column ? column_index(header, *schema.load_column) : 1;
    if (header.size() < 2 || load_col >= header.size()) {
        fail(ErrorCode::MalformedRow, "header needs at least a timestamp and a load column");
    }
    std::vector<std::size_t> weather_cols;
    if (schema.weather_columns) {
        for (const auto& name : *schema.weather_columns) {
            weather_cols.push_back(column_index(header, name));
        }
    } else {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c != ts_col && c != load_col) {
                weather_cols.push_back(c);
            }
        }
    }

    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            fail(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(header.size()) + " fields");
        }
        Row row;
        const auto t = parse_timestamp(fields[ts_col]);
        if (!t) {
            fail(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": bad timestamp '" + fields[ts_col] + "'");
        }
        row.time = *t;
        if (!parse_number(fields[load_col], row.load)) {
            fail(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": bad load value");
        }
        row.weather.resize(weather_cols.size());
        for (std::size_t w = 0; w < weather_cols.size(); ++w) {
            if (!parse_number(fields[weather_cols[w]], row.weather[w])) {
                fail(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": bad value in column '" +
                                                  header[weather_cols[w]] + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        fail(ErrorCode::EmptyFile, "no data rows");
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.time < b.time; });

    std::chrono::seconds step{3600};
    if (rows.size() >= 2) {
        step = rows[1].time - rows[0].time;
        if (step.count() <= 0) {
            fail(ErrorCode::NonUniformGrid, "duplicate timestamp " + format_timestamp(rows[0].time));
        }
        for (std::size_t i = 2; i < rows.size(); ++i) {
            const auto gap = rows[i].time - rows[i - 1].time;
            if (gap != step) {
                fail(ErrorCode::NonUniformGrid, (gap.count() == 0 ? "duplicate timestamp " : "gap before ") +
                                                    format_timestamp(rows[i].time));
            }
        }
    }

    std::vector<double> load(rows.size());
    std::vector<WeatherChannel> channels(weather_cols.size());
    for (std::size_t w = 0; w < weather_cols.size(); ++w) {
        channels[w].name = header[weather_cols[w]];
        channels[w].values.resize(rows.size());
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        load[i] = rows[i].load;
        for (std::size_t w = 0; w < weather_cols.size(); ++w) {
            channels[w].values[i] = rows[i].weather[w];
        }
    }
    const double step_hours = static_cast<double>(step.count()) / 3600.0;
    return SeriesData{LoadSeries(rows.front().time, step_hours, std::move(load)), WeatherSeries(std::move(channels))};
}

SeriesData ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::Io, "cannot open " + path.string());
    }
    return parse_csv(in, schema);
}

void write_csv(std::ostream& out, const LoadSeries& load, const WeatherSeries& weather) {
    if (weather.channel_count() > 0 && weather.length() != load.size()) {
        fail(ErrorCode::GridMismatch, "weather and load lengths differ");
    }
    out << "timestamp,load";
    for (const auto& c : weather.channels()) {
        out << ',' << c.name;
    }
    out << '\n';
    for (std::size_t n = 0; n < load.size(); ++n) {
        out << format_timestamp(load.time_at(n)) << ',' << format_double(load[n]);
        for (const auto& c : weather.channels()) {
            out << ',' << format_double(c.values[n]);
        }
        out << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const LoadSeries& load, const WeatherSeries& weather) {
    std::ofstream out(path);
    if (!out) {
        fail(ErrorCode::Io, "cannot write " + path.string());
    }
    write_csv(out, load, weather);
}

}  // namespace lfsel
