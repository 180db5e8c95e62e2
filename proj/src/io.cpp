#include "cvq/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cvq::io {

namespace fs = std::filesystem;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

void write_pgm_raw(const fs::path& path, std::size_t nx, std::size_t ny, std::uint32_t maxval,
                   const std::vector<std::uint16_t>& data) {
  auto out = open_out(path, true);
  out << "P5\n" << nx << ' ' << ny << '\n' << maxval << '\n';
  if (maxval < 256) {
    std::vector<char> bytes(data.size());
    std::transform(data.begin(), data.end(), bytes.begin(), [](std::uint16_t v) { return static_cast<char>(v); });
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  } else {
    std::vector<char> bytes(2 * data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      bytes[2 * i] = static_cast<char>(data[i] >> 8);
      bytes[2 * i + 1] = static_cast<char>(data[i] & 0xff);
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("write_csv: header/column count mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw std::invalid_argument("write_csv: ragged columns");
  std::string text;
  for (std::size_t i = 0; i < header.size(); ++i) text += (i ? "," : "") + header[i];
  text += '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) text += ',';
      text += format_double(columns[c][r]);
    }
    text += '\n';
  }
  auto out = open_out(path);
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

fs::path sidecar_path(const fs::path& image) {
  fs::path p = image;
  p.replace_extension(".json");
  return p;
}

nlohmann::json to_json(const CcdConfig& cfg) {
  return {{"nx", cfg.nx},
          {"ny", cfg.ny},
          {"pitch", cfg.pitch},
          {"bit_depth", cfg.bit_depth},
          {"background", cfg.background},
          {"exposure_scale", cfg.exposure_scale},
          {"visibility", cfg.visibility},
          {"seed", cfg.seed},
          {"shot_noise", cfg.shot_noise}};
}

nlohmann::json to_json(const PlaneSpec& plane) {
  return {{"kind", plane.kind == PlaneKind::Position ? "position" : "momentum"},
          {"focal_length", plane.focal_length},
          {"theta_l", plane.theta_l}};
}

CcdConfig ccd_config_from_json(const nlohmann::json& j) {
  CcdConfig cfg;
  cfg.nx = j.value("nx", cfg.nx);
  cfg.ny = j.value("ny", cfg.ny);
  cfg.pitch = j.value("pitch", cfg.pitch);
  cfg.bit_depth = j.value("bit_depth", cfg.bit_depth);
  cfg.background = j.value("background", cfg.background);
  cfg.exposure_scale = j.value("exposure_scale", cfg.exposure_scale);
  cfg.visibility = j.value("visibility", cfg.visibility);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.shot_noise = j.value("shot_noise", cfg.shot_noise);
  return cfg;
}

PlaneSpec plane_from_json(const nlohmann::json& j) {
  PlaneSpec plane;
  plane.kind = j.value("kind", std::string("momentum")) == "position" ? PlaneKind::Position : PlaneKind::Momentum;
  plane.focal_length = j.value("focal_length", plane.focal_length);
  plane.theta_l = j.value("theta_l", plane.theta_l);
  return plane;
}

void write_pgm(const fs::path& path, const CcdImage& image) {
  write_pgm_raw(path, image.config.nx, image.config.ny, image.config.max_count(), image.counts);
  write_json(sidecar_path(path), {{"format", "pgm_p5"},
                                  {"config", to_json(image.config)},
                                  {"plane", to_json(image.plane)},
                                  {"seed", image.config.seed},
                                  {"saturated", image.saturated}});
}

namespace {

std::string next_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok += c;
  }
  return tok;
}

}  // namespace

CcdImage read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  if (next_token(in) != "P5") throw IoError("'" + path.string() + "' is not a binary PGM (P5)");
  std::size_t nx = 0, ny = 0;
  unsigned long maxval = 0;
  try {
    nx = std::stoul(next_token(in));
    ny = std::stoul(next_token(in));
    maxval = std::stoul(next_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed PGM header in '" + path.string() + "'");
  }
  if (nx == 0 || ny == 0 || maxval == 0 || maxval > 65535) throw IoError("unsupported PGM geometry in '" + path.string() + "'");

  CcdImage image;
  const fs::path side = sidecar_path(path);
  if (fs::exists(side)) {
    const auto j = read_json(side);
    if (j.contains("config")) image.config = ccd_config_from_json(j["config"]);
    if (j.contains("plane")) image.plane = plane_from_json(j["plane"]);
  } else {
    image.config.bit_depth = maxval < 256 ? 8 : (maxval < 4096 ? 12 : 16);
  }
  image.config.nx = nx;
  image.config.ny = ny;
  if (image.config.max_count() != maxval && fs::exists(side))
    throw IoError("PGM maxval " + std::to_string(maxval) + " disagrees with sidecar bit depth");

  const std::size_t bytes_per = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> raw(nx * ny * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw IoError("truncated PGM data in '" + path.string() + "'");
  image.counts.resize(nx * ny);
  for (std::size_t i = 0; i < nx * ny; ++i)
    image.counts[i] = bytes_per == 1 ? raw[i] : static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
  image.saturated = std::any_of(image.counts.begin(), image.counts.end(),
                                [&](std::uint16_t c) { return c >= maxval; });
  return image;
}

void write_wigner_csv(const fs::path& path, const WignerMap& map) {
  std::vector<double> xs, ps, ws;
  xs.reserve(map.values.size());
  ps.reserve(map.values.size());
  ws.reserve(map.values.size());
  for (std::size_t ip = 0; ip < map.grid.np; ++ip)
    for (std::size_t ix = 0; ix < map.grid.nx; ++ix) {
      xs.push_back(map.grid.x_at(ix));
      ps.push_back(map.grid.p_at(ip));
      ws.push_back(map.at(ix, ip));
    }
  write_csv(path, {"x", "p", "w"}, {xs, ps, ws});
}

void write_wigner_pgm(const fs::path& path, const WignerMap& map, const nlohmann::json& extra) {
  const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
  const double offset = *lo;
  const double scale = *hi > *lo ? (*hi - *lo) / 65535.0 : 1.0;
  std::vector<std::uint16_t> levels(map.values.size());
  for (std::size_t ip = 0; ip < map.grid.np; ++ip)
    for (std::size_t ix = 0; ix < map.grid.nx; ++ix) {
      const double level = std::round((map.at(ix, ip) - offset) / scale);
      levels[(map.grid.np - 1 - ip) * map.grid.nx + ix] = static_cast<std::uint16_t>(std::clamp(level, 0.0, 65535.0));
    }
  write_pgm_raw(path, map.grid.nx, map.grid.np, 65535, levels);
  nlohmann::json side = {{"format", "pgm_p5"},
                         {"value", "offset + scale * level"},
                         {"offset", offset},
                         {"scale", scale},
                         {"x_min", map.grid.x_min},
                         {"x_max", map.grid.x_max},
                         {"p_min", map.grid.p_min},
                         {"p_max", map.grid.p_max},
                         {"units", map.grid.units == PhaseUnits::Scaled ? "scaled" : "si"},
                         {"row0", "p_max"}};
  if (extra.is_object())
    for (auto it = extra.begin(); it != extra.end(); ++it) side[it.key()] = it.value();
  write_json(sidecar_path(path), side);
}

}  // namespace cvq::io
