#pragma once

#include "seisnoise/pipeline.hpp"
#include "seisnoise/series.hpp"
#include "seisnoise/synth.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace seisnoise {

// ---------------------------------------------------------------------------
// CSV: one value per line, optional "# sample_rate=<sps>" header.

/// `rate` overrides the header; one of the two must be present.
Series read_csv(const std::filesystem::path& path, std::optional<double> rate = std::nullopt);
Series parse_csv(const std::string& text, std::optional<double> rate = std::nullopt);
/// Values written with 17 significant digits, so read_csv(write_csv(s)) restores them exactly.
void write_csv(const Series& s, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// FDSN timeseries client

struct DatasetRequest {
    std::string network;
    std::string station;
    std::string channel;
    std::string location = "00";
    std::string start;  // UTC, YYYY-MM-DDTHH:MM:SS[.fff]
    std::string end;
    double sample_rate = 20.0;  // expected

    void validate() const;
    [[nodiscard]] double duration_seconds() const;
};

/// Seconds since the Unix epoch for a UTC timestamp "YYYY-MM-DD[THH:MM:SS[.fff]]".
double parse_utc(const std::string& ts);

inline constexpr const char* kDefaultFdsnEndpoint = "https://service.iris.edu/irisws/timeseries/1/query";

struct FetchOptions {
    std::string endpoint = kDefaultFdsnEndpoint;
    std::filesystem::path cache_dir = ".seisnoise_cache";
    bool use_cache = true;
    int timeout_seconds = 120;
};

/// Hex SHA-256 of the request fields; names the cache file.
std::string cache_key(const DatasetRequest& req);
/// Query string appended to the endpoint (net/sta/cha/loc/starttime/endtime/output=ascii).
std::string fdsn_query(const DatasetRequest& req);

/// Parses an ASCII timeseries payload (a header line, then one sample per line;
/// several segments are concatenated) and checks count and rate against `req`.
Series parse_fdsn_ascii(const std::string& payload, const DatasetRequest& req);

/// Cached fetch. A cache hit never touches the network; misses are written to a
/// temporary file and renamed into place, so concurrent writers are safe.
Series fetch_fdsn(const DatasetRequest& req, const FetchOptions& opts = {});

// ---------------------------------------------------------------------------
// key = value configuration files. '#' starts a comment; values may be quoted
// and lists may be bracketed, so simple TOML files parse too.

PipelineConfig parse_pipeline_config(const std::string& text, PipelineConfig base = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path, PipelineConfig base = {});
std::string format_pipeline_config(const PipelineConfig& cfg);

ProcessSpec parse_process_spec(const std::string& text);
ProcessSpec load_process_spec(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Reports

/// Single JSON document; keys sorted, numbers rounded to 6 significant digits,
/// non-finite numbers written as the strings "inf", "-inf", "nan".
std::string report_to_json(const CharacterizationReport& r);
CharacterizationReport report_from_json(const std::string& json);

void write_report(const CharacterizationReport& r, const std::filesystem::path& path);
CharacterizationReport read_report(const std::filesystem::path& path);

/// One two-column CSV per plot series: "<key>.csv" with a header naming x and y.
std::vector<std::filesystem::path> emit_plot_data(const CharacterizationReport& r, const std::filesystem::path& dir);

/// Writes report_<index>.json per entry that produced a report, summary.csv with one
/// row per entry, aggregate.json with the percentages, and trajectory.csv.
std::vector<std::filesystem::path> write_batch(const BatchResult& b, const std::filesystem::path& dir);

}  // namespace seisnoise
