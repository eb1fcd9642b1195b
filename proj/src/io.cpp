#include "twinhet/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "twinhet/errors.hpp"

namespace twinhet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<char, 8> kMagic = {'T', 'W', 'H', 'T', 'S', '0', '0', '1'};
constexpr std::size_t kHashLen = 64;

static_assert(std::endian::native == std::endian::little, "binary format assumes little-endian");

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError(fmt::format("{}: cannot create directory: {}", parent.string(), ec.message()));
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  ensure_parent(path);
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
  return out;
}

void close_checked(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

std::string padded_hash(const std::string& hash) {
  std::string h = hash.substr(0, kHashLen);
  h.resize(kHashLen, '0');
  return h;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  return out;
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw IoError(fmt::format("{}:{}: not a number: '{}'", path.string(), line, s));
}

TimeSeriesFile read_binary(const std::string& bytes, const fs::path& path) {
  constexpr std::size_t header = kMagic.size() + 8 + 8 + kHashLen;
  if (bytes.size() < header) throw IoError(fmt::format("{}: truncated header", path.string()));
  std::uint64_t n = 0;
  double fs_hz = 0.0;
  std::memcpy(&n, bytes.data() + 8, 8);
  std::memcpy(&fs_hz, bytes.data() + 16, 8);
  TimeSeriesFile file;
  file.config_hash = bytes.substr(24, kHashLen);
  if (bytes.size() != header + n * 24) {
    throw IoError(fmt::format("{}: expected {} records, file size disagrees", path.string(), n));
  }
  auto& s = file.series;
  s.sample_rate = fs_hz;
  s.i_inphase.resize(n);
  s.i_quadrature.resize(n);
  const char* p = bytes.data() + header;
  for (std::uint64_t k = 0; k < n; ++k, p += 24) {
    std::memcpy(&s.i_inphase[k], p + 8, 8);
    std::memcpy(&s.i_quadrature[k], p + 16, 8);
  }
  return file;
}

TimeSeriesFile read_csv(const std::string& text, const fs::path& path) {
  TimeSeriesFile file;
  auto& s = file.series;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  double first_t = 0.0, second_t = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(line.substr(1, eq - 1));
      const std::string value = trim(line.substr(eq + 1));
      if (key == "config_hash") file.config_hash = value;
      if (key == "sample_rate_hz") s.sample_rate = parse_double(value, path, lineno);
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("time", 0) == 0) continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 3) throw IoError(fmt::format("{}:{}: expected 3 columns", path.string(), lineno));
    const double t = parse_double(f[0], path, lineno);
    if (s.size() == 0) first_t = t;
    if (s.size() == 1) second_t = t;
    s.i_inphase.push_back(parse_double(f[1], path, lineno));
    s.i_quadrature.push_back(parse_double(f[2], path, lineno));
  }
  if (s.size() == 0) throw IoError(fmt::format("{}: no samples", path.string()));
  if (s.sample_rate <= 0.0) {
    if (s.size() < 2 || !(second_t > first_t)) {
      throw IoError(fmt::format("{}: cannot infer the sample rate", path.string()));
    }
    s.sample_rate = 1.0 / (second_t - first_t);
  }
  return file;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("{}: cannot open for reading", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << content;
  close_checked(out, path);
}

void write_json_file(const fs::path& path, const json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string format_number(double value) { return fmt::format("{}", value); }

void write_time_series(const fs::path& path, const TimeSeriesPair& series, TimeSeriesFormat format,
                       const std::string& config_hash) {
  const std::size_t n = series.size();
  const double dt = 1.0 / series.sample_rate;
  if (format == TimeSeriesFormat::binary) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    const std::uint64_t n64 = n;
    out.write(kMagic.data(), kMagic.size());
    out.write(reinterpret_cast<const char*>(&n64), 8);
    out.write(reinterpret_cast<const char*>(&series.sample_rate), 8);
    out.write(padded_hash(config_hash).data(), kHashLen);
    std::vector<double> buf(3 * n);
    for (std::size_t k = 0; k < n; ++k) {
      buf[3 * k] = static_cast<double>(k) * dt;
      buf[3 * k + 1] = series.i_inphase[k];
      buf[3 * k + 2] = series.i_quadrature[k];
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 8));
    close_checked(out, path);
    return;
  }
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "# config_hash={}\n# sample_rate_hz={}\n", config_hash,
                 format_number(series.sample_rate));
  fmt::format_to(std::back_inserter(buf), "time_s,i_inphase,i_quadrature\n");
  for (std::size_t k = 0; k < n; ++k) {
    fmt::format_to(std::back_inserter(buf), "{},{},{}\n", static_cast<double>(k) * dt,
                   series.i_inphase[k], series.i_quadrature[k]);
  }
  write_text_file(path, fmt::to_string(buf));
}

TimeSeriesFile read_time_series(const fs::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.empty()) throw IoError(fmt::format("{}: file is empty", path.string()));
  if (bytes.size() >= kMagic.size() && std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    return read_binary(bytes, path);
  }
  return read_csv(bytes, path);
}

void write_spectrum(const fs::path& path, const SpectrumRecord& spectrum,
                    const std::string& config_hash, const json& extra) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "# config_hash={}\nfreq_hz,psd_db\n", config_hash);
  for (std::size_t k = 0; k < spectrum.freqs.size(); ++k) {
    fmt::format_to(std::back_inserter(buf), "{},{}\n", spectrum.freqs[k], spectrum.psd_db[k]);
  }
  write_text_file(path, fmt::to_string(buf));

  json meta = extra.is_object() ? extra : json::object();
  meta["config_hash"] = config_hash;
  meta["rbw_hz"] = spectrum.rbw;
  meta["averages"] = spectrum.averages;
  meta["window"] = spectrum.window;
  meta["bins"] = spectrum.freqs.size();
  meta["clamped_bins"] = spectrum.clamped_bins;
  write_json_file(fs::path(path.string() + ".json"), meta);
}

SqueezingDataset read_dataset(const fs::path& path) {
  const std::string text = read_text_file(path);
  if (text.empty()) throw IoError(fmt::format("{}: file is empty", path.string()));
  SqueezingDataset data;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("x,", 0) == 0) continue;
    }
    const auto f = split(line, ',');
    if (f.size() < 3 || f.size() > 5) {
      throw IoError(fmt::format("{}:{}: expected 3 to 5 columns", path.string(), lineno));
    }
    SqueezingPoint p;
    p.x = parse_double(f[0], path, lineno);
    if (f[1] == "squeezed") {
      p.quadrature = Quadrature::squeezed;
    } else if (f[1] == "antisqueezed") {
      p.quadrature = Quadrature::antisqueezed;
    } else {
      throw IoError(fmt::format("{}:{}: unknown quadrature '{}'", path.string(), lineno, f[1]));
    }
    p.noise_db = parse_double(f[2], path, lineno);
    if (f.size() >= 4) p.weight = parse_double(f[3], path, lineno);
    if (f.size() == 5) p.replicates = static_cast<int>(parse_double(f[4], path, lineno));
    data.points.push_back(p);
  }
  if (data.points.empty()) throw IoError(fmt::format("{}: no data rows", path.string()));
  return data;
}

void write_dataset(const fs::path& path, const SqueezingDataset& data, const std::string& config_hash) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "# config_hash={}\nx,quadrature,noise_db,weight,replicates\n",
                 config_hash);
  for (const auto& p : data.points) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{},{}\n", p.x,
                   p.quadrature == Quadrature::squeezed ? "squeezed" : "antisqueezed", p.noise_db,
                   p.weight, p.replicates);
  }
  write_text_file(path, fmt::to_string(buf));
}

json fit_to_json(const FitResult& fit) {
  json j = {
      {"eta_c", fit.eta_c},
      {"eta_c_error", fit.eta_c_error},
      {"xi_prime", fit.xi_prime},
      {"xi_prime_error", fit.xi_prime_error},
      {"xi_prime_lower", fit.xi_prime_lower},
      {"xi_prime_upper", fit.xi_prime_upper},
      {"residual_norm_db", fit.residual_norm},
      {"residual_variance_db2", fit.residual_variance},
      {"covariance",
       {{fit.covariance[0][0], fit.covariance[0][1]}, {fit.covariance[1][0], fit.covariance[1][1]}}},
      {"iterations", fit.iterations},
      {"converged", fit.converged},
      {"joint", fit.joint},
      {"points", fit.points},
  };
  if (fit.bootstrap_eta_c_sd) j["bootstrap_eta_c_sd"] = *fit.bootstrap_eta_c_sd;
  if (fit.bootstrap_xi_prime_sd) j["bootstrap_xi_prime_sd"] = *fit.bootstrap_xi_prime_sd;
  return j;
}

}  // namespace twinhet
