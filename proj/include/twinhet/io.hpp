#pragma once

// File formats. Every writer embeds the configuration hash; CSV numbers use
// fixed round-trip formatting so identical inputs give identical bytes.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "twinhet/fitter.hpp"
#include "twinhet/spectral.hpp"
#include "twinhet/synth.hpp"

namespace twinhet {

/// Whole file as a string. Throws IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& path, const std::string& content);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

std::string sha256_hex(const std::string& data);

enum class TimeSeriesFormat { csv, binary };

/// CSV: "# config_hash=..." and "# sample_rate_hz=..." comment lines, a header
/// "time_s,i_inphase,i_quadrature", one row per sample.
/// Binary (little-endian): magic "TWHTS001", uint64 n, float64 sample rate,
/// 64-byte ASCII hash, then n records of three float64.
void write_time_series(const std::filesystem::path& path, const TimeSeriesPair& series,
                       TimeSeriesFormat format, const std::string& config_hash);

struct TimeSeriesFile {
  TimeSeriesPair series;
  std::string config_hash;
};

/// Detects the format from the magic bytes. Throws IoError naming the path
/// for missing, empty or malformed files.
TimeSeriesFile read_time_series(const std::filesystem::path& path);

/// CSV (freq_hz, psd_db) plus `<path>.json` with rbw, averages, window and
/// whatever `extra` holds.
void write_spectrum(const std::filesystem::path& path, const SpectrumRecord& spectrum,
                    const std::string& config_hash, const nlohmann::json& extra = {});

/// Columns x, quadrature (squeezed | antisqueezed), noise_db, weight and an
/// optional replicates column. Lines starting with '#' are skipped.
SqueezingDataset read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const SqueezingDataset& data,
                   const std::string& config_hash);

nlohmann::json fit_to_json(const FitResult& fit);

/// Shortest string that round-trips the double.
std::string format_number(double value);

}  // namespace twinhet
