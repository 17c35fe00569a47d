#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lfsel/series.hpp"

namespace lfsel {

/// Column selection for ingest. Unset names fall back to position: timestamp
/// in column 1, load in column 2, and every remaining column as weather.
struct CsvSchema {
    std::optional<std::string> timestamp_column;
    std::optional<std::string> load_column;
    std::optional<std::vector<std::string>> weather_columns;
};

struct SeriesData {
    LoadSeries load;
    WeatherSeries weather;
};

SeriesData ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
SeriesData parse_csv(std::istream& in, const CsvSchema& schema = {});

void write_csv(std::ostream& out, const LoadSeries& load, const WeatherSeries& weather);
void write_csv(const std::filesystem::path& path, const LoadSeries& load, const WeatherSeries& weather);

/// "YYYY-MM-DDTHH:MM[:SS]" (a space may replace the T, a trailing Z is accepted).
std::optional<TimePoint> parse_timestamp(std::string_view text);
std::string format_timestamp(TimePoint t);

/// Shortest text that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace lfsel
