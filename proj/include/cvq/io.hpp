#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cvq/virtual_lab.hpp"
#include "cvq/wigner.hpp"

namespace cvq::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form, '.' separator regardless of locale.
std::string format_double(double v);

/// Column-oriented CSV; all columns must have the same length.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

/// "<stem>.json" next to an image.
std::filesystem::path sidecar_path(const std::filesystem::path& image);

nlohmann::json to_json(const CcdConfig& cfg);
nlohmann::json to_json(const PlaneSpec& plane);
CcdConfig ccd_config_from_json(const nlohmann::json& j);
PlaneSpec plane_from_json(const nlohmann::json& j);

/// Binary PGM (8-bit for maxval < 256, 16-bit big-endian otherwise) plus a
/// JSON sidecar with config, plane and seed.
void write_pgm(const std::filesystem::path& path, const CcdImage& image);
/// Reads a P5 image; the sidecar, when present, restores config and plane.
CcdImage read_pgm(const std::filesystem::path& path);

/// Long-format CSV: x, p, w (grid units).
void write_wigner_csv(const std::filesystem::path& path, const WignerMap& map);
/// 16-bit PGM with value = offset + scale * level; offset and scale go to the
/// sidecar. Row 0 is the largest p.
void write_wigner_pgm(const std::filesystem::path& path, const WignerMap& map, const nlohmann::json& extra = {});

}  // namespace cvq::io
