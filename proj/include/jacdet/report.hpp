#pragma once

// Report emission: deterministic artifact naming from the config hash,
// versioned JSON records, CSV tables, and write-only SVG heatmaps.
// Timestamps live exclusively inside the "meta" object so that identical
// (config, seed) runs produce byte-identical payloads elsewhere.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jacdet/core.hpp"
#include "jacdet/grid.hpp"

namespace jacdet {

inline std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

class ReportWriter {
 public:
  ReportWriter(std::string out_dir, std::string command, const nlohmann::json& config,
               std::uint64_t seed)
      : out_dir_(std::move(out_dir)), command_(std::move(command)), config_(config), seed_(seed) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir_, ec);
    if (ec || !std::filesystem::is_directory(out_dir_))
      throw config_error("output directory is not writable: " + out_dir_);
    stem_ = command_ + "_" + fnv1a64_hex(config_.dump());
  }

  const std::string& stem() const { return stem_; }
  std::string path(const std::string& ext) const { return out_dir_ + "/" + stem_ + ext; }

  nlohmann::json meta() const {
    return {{"schema", 1},
            {"command", command_},
            {"seed", seed_},
            {"config", config_},
            {"timestamp", iso_timestamp()}};
  }

  std::string write_json(nlohmann::json body) const {
    body["meta"] = meta();
    const std::string p = path(".json");
    write_json_file(p, body);
    return p;
  }

  std::string write_csv(const std::string& header,
                        const std::vector<std::string>& rows) const {
    const std::string p = path(".csv");
    std::ofstream out(p);
    if (!out) throw config_error("cannot open for writing: " + p);
    out << header << "\n";
    for (const auto& r : rows) out << r << "\n";
    return p;
  }

  /// Write-only convenience heatmap; no check depends on it.
  std::string write_svg(const ScalarField& f) const {
    const GridSpec& g = f.grid();
    double lo = f.values()[0], hi = f.values()[0];
    for (double v : f.values()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi <= lo) hi = lo + 1.0;
    const int cell = std::max(1, 768 / std::max(g.nx, g.ny));
    const std::string p = path(".svg");
    std::ofstream out(p);
    if (!out) throw config_error("cannot open for writing: " + p);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (g.nx + 1) * cell
        << "\" height=\"" << (g.ny + 1) * cell << "\">\n";
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        const double t = (f(i, j) - lo) / (hi - lo);
        // Cold-to-warm ramp.
        const int r = static_cast<int>(255.0 * t);
        const int b = static_cast<int>(255.0 * (1.0 - t));
        const int gg = static_cast<int>(80.0 + 100.0 * (1.0 - std::abs(2.0 * t - 1.0)));
        out << "<rect x=\"" << i * cell << "\" y=\"" << (g.ny - j) * cell << "\" width=\""
            << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << r << "," << gg << "," << b
            << ")\"/>\n";
      }
    out << "</svg>\n";
    return p;
  }

 private:
  std::string out_dir_;
  std::string command_;
  nlohmann::json config_;
  std::uint64_t seed_;
  std::string stem_;
};

inline std::string csv_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace jacdet
