#include "cvq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cvq/applications.hpp"
#include "cvq/error.hpp"
#include "cvq/io.hpp"
#include "cvq/propagation.hpp"
#include "cvq/virtual_lab.hpp"
#include "cvq/wigner.hpp"

#ifndef CVQ_VERSION
#define CVQ_VERSION "0.0.0"
#endif

namespace cvq::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string w0 = "0.12mm";
  std::string wavelength = "780nm";
};

struct StateOpts {
  std::string T, phi, d, d_over_w0, alpha, theta_d, typical, bloch;
};

struct CcdOpts {
  std::string plane = "momentum";
  std::string focal = "145mm";
  std::size_t nx = 720, ny = 480;
  std::string pitch = "6.5um";
  int bit_depth = 8;
  double background = 0.0;
  double exposure = 0.0;
  double visibility = 1.0;
  bool shot_noise = false;
};

std::string fmt(double v) { return io::format_double(v); }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s.rfind("-0.", 0) == 0 && std::strtod(buf, nullptr) == 0.0) s.erase(0, 1);
  return s;
}

std::string in_pi(double angle) { return fixed(angle / kPi, 4) + "pi"; }

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out-dir", c.out_dir, "Output directory (default: $CVQ_OUTPUT_DIR or .)");
  app->add_option("--seed", c.seed, "Random seed");
  app->add_option("--w0", c.w0, "Beam waist radius (e.g. 0.12mm)");
  app->add_option("--wavelength", c.wavelength, "Wavelength (e.g. 780nm)");
}

void add_state(CLI::App* app, StateOpts& s) {
  app->add_option("--T", s.T, "Transmittance in [0, 1] (default 0.5)");
  app->add_option("--phi", s.phi, "Relative phase, radians or multiples of pi (0.98pi)");
  app->add_option("--d", s.d, "Beam separation (e.g. 0.12mm)");
  app->add_option("--d-over-w0", s.d_over_w0, "Beam separation in units of w0");
  app->add_option("--alpha", s.alpha, "Coherent amplitude of the displaced beam (default 1.1)");
  app->add_option("--theta-d", s.theta_d, "Overlap angle in (0, pi/2)");
  app->add_option("--typical", s.typical, "vac, coh, cat_plus, cat_minus, x_minus, x_plus, p_minus, p_plus");
  app->add_option("--bloch", s.bloch, "Bloch vector x,y,z in the {|x->, |x+>} frame");
}

void add_ccd(CLI::App* app, CcdOpts& c) {
  app->add_option("--plane", c.plane, "position or momentum");
  app->add_option("--f", c.focal, "Lens focal length for the momentum plane");
  app->add_option("--nx", c.nx, "Sensor columns");
  app->add_option("--ny", c.ny, "Sensor rows");
  app->add_option("--pitch", c.pitch, "Pixel pitch");
  app->add_option("--bit-depth", c.bit_depth, "8, 12 or 16");
  app->add_option("--background", c.background, "Background counts");
  app->add_option("--exposure", c.exposure, "Counts per unit pixel power fraction (<= 0: auto)");
  app->add_option("--visibility", c.visibility, "Interferometer visibility in [0, 1]");
  app->add_flag("--shot-noise", c.shot_noise, "Poisson shot noise keyed by the seed");
}

ModeFrame make_frame(const Common& c) { return ModeFrame(parse_length(c.w0), parse_length(c.wavelength)); }

fs::path out_dir(const Common& c) {
  if (!c.out_dir.empty()) return c.out_dir;
  if (const char* env = std::getenv("CVQ_OUTPUT_DIR"); env && *env) return env;
  return ".";
}

fs::path resolve_out(const Common& c, const std::string& given, const std::string& fallback) {
  if (given.empty()) return out_dir(c) / fallback;
  fs::path p(given);
  return p.is_absolute() || c.out_dir.empty() ? p : out_dir(c) / p;
}

fs::path manifest_for(const fs::path& output) {
  fs::path p = output;
  p.replace_extension();
  return p.string() + ".manifest.json";
}

struct ResolvedState {
  QubitParams params{1.0, 0.0, 0.0};
  std::optional<OverlapAngle> theta;
  SuperpositionState state;
  json echo;
};

double resolve_d(const StateOpts& s, const ModeFrame& frame) {
  const int given = !s.d.empty() + !s.d_over_w0.empty() + !s.alpha.empty() + !s.theta_d.empty();
  if (given > 1) throw UsageError("give at most one of --d, --d-over-w0, --alpha, --theta-d");
  if (!s.d.empty()) return parse_length(s.d);
  if (!s.d_over_w0.empty()) return parse_real(s.d_over_w0) * frame.w0();
  if (!s.theta_d.empty()) return OverlapAngle::from_theta(parse_angle(s.theta_d)).displacement(frame);
  const double alpha = s.alpha.empty() ? 1.1 : parse_real(s.alpha);
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  return frame.displacement(alpha);
}

ResolvedState resolve_state(const StateOpts& s, const ModeFrame& frame) {
  const double d = resolve_d(s, frame);
  std::optional<OverlapAngle> theta;
  if (d > 0.0) theta = OverlapAngle::from_displacement(d, frame);
  auto need_theta = [&](const char* what) -> OverlapAngle {
    if (!theta) throw std::invalid_argument(std::string(what) + " requires d > 0");
    return *theta;
  };
  const int modes = !s.typical.empty() + !s.bloch.empty() + (!s.T.empty() || !s.phi.empty());
  if (modes > 1) throw UsageError("give either --typical, --bloch, or --T/--phi");

  std::optional<QubitParams> params;
  std::optional<SuperpositionState> state;
  if (!s.typical.empty()) {
    auto r = make_typical_state(typical_state_from_string(s.typical), need_theta("--typical"), frame);
    params = r.params;
    state = r.state;
  } else if (!s.bloch.empty()) {
    const auto b = parse_triplet(s.bloch);
    params = bloch_to_params(BlochVector::checked(b[0], b[1], b[2]), need_theta("--bloch"), frame);
  } else {
    params = QubitParams(s.T.empty() ? 0.5 : parse_real(s.T), s.phi.empty() ? 0.0 : parse_angle(s.phi), d);
  }
  if (!state) state = make_qubit_state(*params, frame);
  json echo = {{"T", params->T()}, {"phi", params->phi_signed()}, {"d", params->d()}, {"w0", frame.w0()},
               {"wavelength", frame.wavelength()}};
  if (theta) echo["theta_d"] = theta->theta();
  return {*params, theta, *state, echo};
}

CcdConfig make_ccd(const CcdOpts& o, std::uint64_t seed) {
  CcdConfig cfg;
  cfg.nx = o.nx;
  cfg.ny = o.ny;
  cfg.pitch = parse_length(o.pitch);
  cfg.bit_depth = o.bit_depth;
  cfg.background = o.background;
  cfg.exposure_scale = o.exposure;
  cfg.visibility = o.visibility;
  cfg.seed = seed;
  cfg.shot_noise = o.shot_noise;
  cfg.validate();
  return cfg;
}

PlaneSpec make_plane(const CcdOpts& o) {
  if (o.plane == "position") return PlaneSpec::position();
  if (o.plane == "momentum") return PlaneSpec::momentum(parse_length(o.focal));
  throw UsageError("--plane must be 'position' or 'momentum'");
}

json option_echo(const CLI::App* app) {
  json j = json::object();
  for (const auto* opt : app->get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
    const std::string& key = opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& r = opt->results();
      j[key] = r.empty() ? std::string("true") : r.back();
    } else {
      j[key] = opt->get_default_str();
    }
  }
  return j;
}

void write_manifest(const fs::path& path, const std::string& command, const CLI::App* sub, std::uint64_t seed,
                    const json& resolved, const std::vector<fs::path>& outputs) {
  json files = json::array();
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  for (const auto& p : outputs) {
    const fs::path rel = p.lexically_relative(base);
    files.push_back((rel.empty() ? p : rel).generic_string());
  }
  io::write_json(path, {{"tool", "cvq"},
                        {"version", CVQ_VERSION},
                        {"command", command},
                        {"options", option_echo(sub)},
                        {"resolved", resolved},
                        {"seed", seed},
                        {"outputs", files}});
}

// --- subcommands ------------------------------------------------------------

int cmd_state(const Common& c, const StateOpts& s, const CLI::App* sub, std::ostream& out) {
  const auto frame = make_frame(c);
  const auto r = resolve_state(s, frame);
  out << "T = " << fixed(r.params.T(), 4) << '\n';
  out << "phi = " << in_pi(r.params.phi_signed()) << " (" << fixed(r.params.phi_signed(), 6) << " rad)\n";
  out << "d = " << fmt(r.params.d()) << " m\n";
  json resolved = r.echo;
  if (r.theta) {
    const double n_arb = normalization_factor(r.params.T(), r.params.phi(), *r.theta);
    const auto b = params_to_bloch(r.params, *r.theta);
    out << "alpha = " << fixed(r.theta->alpha(), 6) << '\n';
    out << "theta_d = " << in_pi(r.theta->theta()) << '\n';
    out << "N_arb = " << fixed(n_arb, 6) << '\n';
    out << "bloch = " << fixed(b.x, 6) << ',' << fixed(b.y, 6) << ',' << fixed(b.z, 6) << '\n';
    resolved["N_arb"] = n_arb;
    resolved["bloch"] = {b.x, b.y, b.z};
  } else {
    out << "N_arb = " << fixed(1.0 + 2.0 * std::sqrt(r.params.T() * (1.0 - r.params.T())) * std::cos(r.params.phi()), 6)
        << '\n';
  }
  write_manifest(out_dir(c) / "state.manifest.json", "state", sub, c.seed, resolved, {});
  return kExitOk;
}

struct WignerOpts {
  std::size_t grid = 256;
  std::string method = "analytic";
  std::string units = "scaled";
  std::string out, pgm;
};

int cmd_wigner(const Common& c, const StateOpts& s, const WignerOpts& w, const CLI::App* sub, std::ostream& out) {
  const auto frame = make_frame(c);
  const auto r = resolve_state(s, frame);
  if (w.units != "scaled" && w.units != "si") throw UsageError("--units must be 'scaled' or 'si'");
  if (w.method != "analytic" && w.method != "numeric") throw UsageError("--method must be 'analytic' or 'numeric'");
  const auto grid = auto_grid(r.state, w.grid, w.units == "si" ? PhaseUnits::SI : PhaseUnits::Scaled, r.params.d() / 2.0);
  const auto map = w.method == "numeric" ? wigner_numeric(r.state, grid) : wigner_analytic_map(r.state, grid);
  const auto csv = resolve_out(c, w.out, "wigner.csv");
  io::write_wigner_csv(csv, map);
  std::vector<fs::path> outputs{csv};
  if (!w.pgm.empty()) {
    const auto pgm = resolve_out(c, w.pgm, "wigner.pgm");
    io::write_wigner_pgm(pgm, map);
    outputs.push_back(pgm);
    outputs.push_back(io::sidecar_path(pgm));
  }
  const auto neg = negativity_scan(map);
  json resolved = r.echo;
  resolved["grid"] = {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"p_min", grid.p_min}, {"p_max", grid.p_max},
                      {"n", w.grid}, {"units", w.units}};
  resolved["integral"] = map.integral();
  resolved["min_value"] = neg.min_value;
  resolved["negative_volume"] = neg.negative_volume;
  write_manifest(manifest_for(csv), "wigner", sub, c.seed, resolved, outputs);
  out << "wrote " << csv.generic_string() << " (integral " << fixed(map.integral(), 8) << ", min " << fmt(neg.min_value)
      << ")\n";
  return kExitOk;
}

int cmd_marginals(const Common& c, const StateOpts& s, std::size_t samples, const std::string& out_path,
                  const CLI::App* sub, std::ostream& out) {
  const auto frame = make_frame(c);
  const auto r = resolve_state(s, frame);
  if (samples < 2) throw std::invalid_argument("--samples must be >= 2");
  const double w0 = frame.w0();
  const double d = r.params.d();
  const double x_span = d / 2.0 + 5.0 * w0;
  const double p_span = 5.0 * kHbar / w0 * 2.0;
  std::vector<double> xs(samples), ix(samples), ps(samples), ip(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
    xs[i] = d / 2.0 - x_span + 2.0 * x_span * t;
    ps[i] = -p_span + 2.0 * p_span * t;
    ix[i] = marginal_position(r.params, frame, xs[i]);
    ip[i] = marginal_momentum(r.params, frame, ps[i]);
  }
  const auto csv = resolve_out(c, out_path, "marginals.csv");
  io::write_csv(csv, {"x_m", "position_density_per_m", "p_kg_m_per_s", "momentum_density_per_kg_m_per_s"},
                {xs, ix, ps, ip});
  write_manifest(manifest_for(csv), "marginals", sub, c.seed, r.echo, {csv});
  out << "wrote " << csv.generic_string() << '\n';
  return kExitOk;
}

int cmd_beam(const Common& c, const std::string& z_max_text, std::size_t steps, const std::string& theta_l_text,
             const std::string& focal_text, const std::string& out_path, const CLI::App* sub, std::ostream& out) {
  const auto frame = make_frame(c);
  const double z_max = z_max_text.empty() ? 3.0 * frame.rayleigh_range() : parse_length(z_max_text);
  if (!(z_max > 0.0) || steps < 1) throw std::invalid_argument("--z-max must be > 0 and --steps >= 1");
  std::vector<double> zs, ws, rs, gs;
  for (std::size_t i = 0; i <= steps; ++i) {
    const auto b = beam_params_at(frame, z_max * static_cast<double>(i) / static_cast<double>(steps));
    zs.push_back(b.z);
    ws.push_back(b.w);
    rs.push_back(b.R);
    gs.push_back(b.gouy);
  }
  const auto csv = resolve_out(c, out_path, "beam.csv");
  io::write_csv(csv, {"z_m", "w_m", "R_m", "gouy_rad"}, {zs, ws, rs, gs});
  json resolved = {{"w0", frame.w0()}, {"wavelength", frame.wavelength()}, {"z_R", frame.rayleigh_range()}};
  out << "z_R = " << fmt(frame.rayleigh_range()) << " m\n";
  if (!theta_l_text.empty()) {
    const LensSystem lens(parse_length(focal_text), parse_angle(theta_l_text));
    const auto m = lens.matrix();
    resolved["lens"] = {{"theta_l", lens.theta()}, {"focal_length", lens.focal_length()}, {"spacing", lens.spacing()},
                        {"matrix", {m.a, m.b, m.c, m.d}}};
    out << "lens spacing = " << fmt(lens.spacing()) << " m\n";
    out << "ABCD = [[" << fmt(m.a) << ", " << fmt(m.b) << "], [" << fmt(m.c) << ", " << fmt(m.d) << "]]\n";
  }
  write_manifest(manifest_for(csv), "beam", sub, c.seed, resolved, {csv});
  out << "wrote " << csv.generic_string() << '\n';
  return kExitOk;
}

int cmd_ccd(const Common& c, const StateOpts& s, const CcdOpts& o, double tilt, const std::string& out_path,
            const CLI::App* sub, std::ostream& out) {
  const auto frame = make_frame(c);
  auto r = resolve_state(s, frame);
  if (tilt != 0.0) {
    // Imaginary part added to the displaced beam's amplitude only.
    std::vector<CoherentTerm> terms(r.state.terms().begin(), r.state.terms().end());
    for (auto& t : terms)
      if (t.alpha_x != cplx(0.0)) t.alpha_x += cplx(0.0, tilt);
    r.state = SuperpositionState(frame, std::move(terms), r.state.collapsed());
  }
  const auto plane = make_plane(o);
  const auto image = render_ccd(r.state, plane, make_ccd(o, c.seed));
  const auto pgm = resolve_out(c, out_path, "ccd.pgm");
  io::write_pgm(pgm, image);
  json resolved = r.echo;
  resolved["tilt"] = tilt;
  resolved["exposure_scale"] = image.config.exposure_scale;
  resolved["saturated"] = image.saturated;
  write_manifest(manifest_for(pgm), "ccd", sub, c.seed, resolved, {pgm, io::sidecar_path(pgm)});
  out << "wrote " << pgm.generic_string() << (image.saturated ? " (saturated pixels present)" : "") << '\n';
  return kExitOk;
}

int cmd_fit(const Common& c, const std::string& image_path, const StateOpts& s, bool phase, double visibility,
            const std::string& out_path, const CLI::App* sub, std::ostream& out) {
  if (image_path.empty()) throw UsageError("--image is required");
  const auto image = io::read_pgm(image_path);
  const auto profile = profile_from_image(image);
  const double pitch = image.config.pitch;
  const auto coords = profile_coordinates(profile.size(), pitch);
  const auto csv = resolve_out(c, out_path, "profile.csv");
  io::write_csv(csv, {"x_m", "profile"}, {coords, profile});

  json summary = {{"image", fs::path(image_path).generic_string()}, {"pitch", pitch}};
  const auto g = fit_gaussian_profile(profile, pitch);
  summary["gaussian"] = {{"center_m", g.center},      {"radius_1e2_m", g.radius},   {"radius_px", g.radius / pitch},
                         {"amplitude", g.amplitude},  {"rss", g.rss},               {"relative_rss", g.relative_rss},
                         {"poor", g.poor},            {"iterations", g.iterations}};
  out << "gaussian: center = " << fmt(g.center) << " m, radius = " << fixed(g.radius / pitch, 3) << " px"
      << (g.poor ? " (poor fit)" : "") << '\n';
  if (phase) {
    if (image.plane.kind != PlaneKind::Momentum) throw std::invalid_argument("phase estimation needs a momentum-plane image");
    const auto frame = make_frame(c);
    const auto r = resolve_state(s, frame);
    FringeModel model{r.params.d(), frame.w0(), r.params.T(), image.plane.focal_length, frame.wavelength(), pitch,
                      visibility};
    const auto est = estimate_relative_phase(profile, model);
    summary["phase"] = {{"phi", est.phi}, {"phi_over_pi", est.phi / kPi}, {"rss", est.rss},
                        {"noise_rms", est.noise_rms}, {"fringe_amplitude", est.fringe_amplitude}};
    out << "phi = " << in_pi(est.phi) << '\n';
  }
  fs::path json_path = csv;
  json_path.replace_extension(".json");
  io::write_json(json_path, summary);
  write_manifest(manifest_for(csv), "fit", sub, c.seed, summary, {csv, json_path});
  return kExitOk;
}

std::vector<std::pair<double, double>> parse_path(const std::string& text) {
  std::vector<std::pair<double, double>> path;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("sweep point '" + item + "' is not T:phi");
    path.emplace_back(parse_real(item.substr(0, colon)), parse_angle(item.substr(colon + 1)));
  }
  return path;
}

int cmd_sweep(const Common& c, const StateOpts& s, const std::string& path_text, std::size_t steps,
              const std::string& out_path, const CLI::App* sub, std::ostream& out) {
  const auto frame = make_frame(c);
  const double d = resolve_d(s, frame);
  std::vector<std::pair<double, double>> path;
  if (!path_text.empty()) {
    path = parse_path(path_text);
  } else {
    // Default: equator loop at T = 1/2.
    for (std::size_t i = 0; i < steps; ++i) path.emplace_back(0.5, -kPi + 2.0 * kPi * static_cast<double>(i) / steps);
  }
  const auto series = profile_sweep(path, d, frame);
  std::vector<double> t, phi, dx, vx, ci;
  for (const auto& p : series) {
    t.push_back(p.T);
    phi.push_back(p.phi);
    dx.push_back(p.delta_x);
    vx.push_back(p.mean_vx);
    ci.push_back(p.center_intensity);
  }
  const auto csv = resolve_out(c, out_path, "sweep.csv");
  io::write_csv(csv, {"T", "phi_rad", "delta_x_m", "mean_vx", "center_intensity_per_m"}, {t, phi, dx, vx, ci});
  const double sql = frame.w0() / 2.0;
  write_manifest(manifest_for(csv), "sweep", sub, c.seed, {{"d", d}, {"points", series.size()}, {"sql_delta_x", sql}},
                 {csv});
  out << "wrote " << csv.generic_string() << " (" << series.size() << " points)\n";
  return kExitOk;
}

json stats_json(const ProtocolStats& s) {
  return {{"n", s.rounds},       {"sifted", s.sifted},
          {"errors", s.errors},  {"lost", s.lost},
          {"qber", s.qber()},    {"ber", s.ber()},
          {"sift_rate", s.sift_rate()},
          {"mismatched", s.mismatched},
          {"mismatched_errors", s.mismatched_errors},
          {"mismatched_error_rate", s.mismatched_error_rate()}};
}

int cmd_mdm(const Common& c, const StateOpts& s, const std::string& scheme, std::size_t n, const std::string& sigma_theta,
            const std::string& sigma_z, const std::string& period, double overlap_noise, const std::string& out_path,
            const CLI::App* sub, std::ostream& out) {
  const auto frame = make_frame(c);
  const double d = resolve_d(s, frame);
  if (!(d > 0.0)) throw std::invalid_argument("mdm requires d > 0");
  const auto theta = OverlapAngle::from_displacement(d, frame);
  const auto basis = build_basis(basis_scheme_from_string(scheme), theta, frame);
  ChannelModel ch;
  ch.rotation_jitter_sigma = parse_angle(sigma_theta);
  ch.path_jitter_sigma = parse_length(sigma_z);
  ch.fiber.period = parse_length(period);
  ch.overlap_noise_sigma = overlap_noise;
  const auto stats = psk_link_simulate(n, basis, ch, c.seed);

  const std::size_t m = basis.size();
  std::vector<double> row, col, re, im, mag;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      row.push_back(static_cast<double>(i));
      col.push_back(static_cast<double>(j));
      re.push_back(basis.gram_at(i, j).real());
      im.push_back(basis.gram_at(i, j).imag());
      mag.push_back(std::abs(basis.gram_at(i, j)));
    }
  const auto csv = resolve_out(c, out_path, "mdm_gram.csv");
  io::write_csv(csv, {"i", "j", "re", "im", "abs"}, {row, col, re, im, mag});
  json resolved = {{"scheme", basis.name}, {"labels", basis.labels}, {"theta_d", theta.theta()}, {"d", d},
                   {"gram_identity_deviation", basis.max_identity_deviation()}, {"stats", stats_json(stats)}};
  fs::path stats_path = csv;
  stats_path.replace_extension(".json");
  io::write_json(stats_path, resolved);
  write_manifest(manifest_for(csv), "mdm", sub, c.seed, resolved, {csv, stats_path});
  out << basis.name << ": BER = " << fmt(stats.ber()) << " over " << stats.rounds << " rounds, |G - I|max = "
      << fmt(basis.max_identity_deviation()) << '\n';
  return kExitOk;
}

int cmd_qkd(const Common& c, const StateOpts& s, std::size_t n, const std::string& sigma_z, const std::string& period,
            const std::string& out_path, const CLI::App* sub, std::ostream& out) {
  const auto frame = make_frame(c);
  const double d = resolve_d(s, frame);
  if (!(d > 0.0)) throw std::invalid_argument("qkd requires d > 0");
  const auto theta = OverlapAngle::from_displacement(d, frame);
  FiberSpec fiber{parse_length(period)};
  const double sz = parse_length(sigma_z);
  const auto stats = qkd_simulate(n, theta, sz, fiber, c.seed, frame);
  const auto path = resolve_out(c, out_path, "qkd.json");
  json resolved = {{"theta_d", theta.theta()}, {"d", d}, {"sigma_z", sz}, {"period", fiber.period},
                   {"stats", stats_json(stats)}};
  io::write_json(path, resolved);
  write_manifest(manifest_for(path), "qkd", sub, c.seed, resolved, {path});
  out << "QBER = " << fmt(stats.qber()) << " (sifted " << stats.sifted << " of " << stats.rounds << ", lost "
      << stats.lost << ")\n";
  return kExitOk;
}

// --- reproduction -----------------------------------------------------------

std::vector<fs::path> reproduce_fig2(const Common& c, std::size_t grid_n, json& resolved) {
  const auto frame = make_frame(c);
  const auto theta = OverlapAngle::from_displacement(frame.w0(), frame);
  const fs::path dir = out_dir(c);
  std::vector<fs::path> outputs;
  std::vector<double> t, phi, integral, min_w, var_x, var_p;
  json states = json::array();
  for (auto kind : kAllTypicalStates) {
    const auto r = make_typical_state(kind, theta, frame);
    const auto grid = auto_grid(r.state, grid_n, PhaseUnits::Scaled, frame.w0() / 2.0);
    const auto map = wigner_analytic_map(r.state, grid);
    const std::string name = "fig2_" + std::string(to_string(kind));
    io::write_wigner_csv(dir / (name + ".csv"), map);
    io::write_wigner_pgm(dir / (name + ".pgm"), map, {{"state", to_string(kind)}});
    outputs.insert(outputs.end(), {dir / (name + ".csv"), dir / (name + ".pgm"), dir / (name + ".json")});
    const auto neg = negativity_scan(map);
    t.push_back(r.params.T());
    phi.push_back(r.params.phi_signed());
    integral.push_back(map.integral());
    min_w.push_back(neg.min_value);
    var_x.push_back(quadrature_moments(r.state, 0.0).variance);
    var_p.push_back(quadrature_moments(r.state, kPi / 2.0).variance);
    states.push_back(to_string(kind));
  }
  io::write_csv(dir / "fig2_summary.csv", {"T", "phi_rad", "integral", "min_w", "var_x", "var_p"},
                {t, phi, integral, min_w, var_x, var_p});
  outputs.push_back(dir / "fig2_summary.csv");
  resolved = {{"states", states}, {"theta_d", theta.theta()}, {"d", frame.w0()}, {"grid", grid_n}};
  return outputs;
}

std::vector<fs::path> write_curves(const fs::path& dir, const std::vector<ScenarioCurve>& curves, const std::string& prefix,
                                   double pitch) {
  std::vector<fs::path> outputs;
  for (const auto& cv : curves) {
    if (cv.panel.rfind(prefix, 0) != 0) continue;
    std::vector<double> px(cv.coordinate.size());
    std::transform(cv.coordinate.begin(), cv.coordinate.end(), px.begin(), [&](double x) { return x / pitch; });
    const auto path = dir / (cv.panel + ".csv");
    io::write_csv(path, {"x_m", "x_px", "density_per_m", "sql_per_m"}, {cv.coordinate, px, cv.density, cv.sql});
    outputs.push_back(path);
  }
  return outputs;
}

std::vector<fs::path> reproduce_fig4(const Common& c, const CcdOpts& o, json& resolved) {
  const auto frame = make_frame(c);
  const fs::path dir = out_dir(c);
  const auto cfg = make_ccd(o, c.seed);
  const double f = parse_length(o.focal);
  auto outputs = write_curves(dir, scenario_reports(frame, f), "fig4_", cfg.pitch);
  const auto theta = OverlapAngle::from_theta(0.40 * kPi);
  json fits = json::object();
  const std::pair<const char*, TypicalState> beams[] = {{"a", TypicalState::Vacuum}, {"b", TypicalState::Coherent}};
  for (const auto& [letter, kind] : beams) {
    const auto st = make_typical_state(kind, theta, frame).state;
    for (int panel = 1; panel <= 2; ++panel) {
      const PlaneSpec plane = panel == 1 ? PlaneSpec::position() : PlaneSpec::momentum(f);
      const auto image = render_ccd(st, plane, cfg);
      const std::string name = std::string("fig4_") + letter + "-" + std::to_string(panel) + "_ccd";
      io::write_pgm(dir / (name + ".pgm"), image);
      outputs.insert(outputs.end(), {dir / (name + ".pgm"), dir / (name + ".json")});
      const auto g = fit_gaussian_profile(profile_from_image(image), cfg.pitch);
      fits[name] = {{"center_m", g.center}, {"radius_1e2_m", g.radius}, {"radius_px", g.radius / cfg.pitch},
                    {"relative_rss", g.relative_rss}};
    }
  }
  io::write_json(dir / "fig4_fits.json", fits);
  outputs.push_back(dir / "fig4_fits.json");
  resolved = {{"theta_d", theta.theta()}, {"focal_length", f}, {"fits", fits}};
  return outputs;
}

std::vector<fs::path> reproduce_fig5(const Common& c, const CcdOpts& o, json& resolved) {
  const auto frame = make_frame(c);
  const fs::path dir = out_dir(c);
  const auto cfg = make_ccd(o, c.seed);
  const double f = parse_length(o.focal);
  auto outputs = write_curves(dir, scenario_reports(frame, f), "fig5_", cfg.pitch);
  const auto theta = OverlapAngle::from_theta(0.40 * kPi);
  const double d = theta.displacement(frame);
  json estimates = json::array();
  const char* letters = "abcd";
  for (int i = 0; i < 4; ++i) {
    const QubitParams params(0.5, kEquatorPhases[i], d);
    const auto image = render_ccd(params, frame, PlaneSpec::momentum(f), cfg);
    const std::string name = std::string("fig5_") + letters[i] + "-2_ccd";
    io::write_pgm(dir / (name + ".pgm"), image);
    outputs.insert(outputs.end(), {dir / (name + ".pgm"), dir / (name + ".json")});
    const FringeModel model{d, frame.w0(), 0.5, f, frame.wavelength(), cfg.pitch, cfg.visibility};
    const auto est = estimate_relative_phase(profile_from_image(image), model);
    estimates.push_back({{"panel", std::string(1, letters[i])},
                         {"phi_injected", params.phi_signed()},
                         {"phi_estimated", est.phi},
                         {"error_over_pi", wrap_signed(est.phi - params.phi_signed()) / kPi}});
  }
  io::write_json(dir / "fig5_phases.json", estimates);
  outputs.push_back(dir / "fig5_phases.json");
  resolved = {{"theta_d", theta.theta()}, {"d", d}, {"visibility", cfg.visibility}, {"phases", estimates}};
  return outputs;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

// Moves `--config FILE` / `--config=FILE` out of args and splices the file's
// settings in front of the user's own flags, right after the subcommand path.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config requires a file argument");
      file = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (!file) return args;
  std::ifstream in(*file);
  if (!in) throw io::IoError("cannot open config file '" + *file + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  std::vector<std::string> injected;
  for (const auto& [key, value] : parse_config_text(buf.str())) {
    const std::string flag = key.rfind("--", 0) == 0 ? key : "--" + key;
    injected.push_back(flag + "=" + value);
  }
  std::size_t at = 0;
  if (at < args.size() && args[at].rfind("-", 0) != 0) ++at;  // subcommand
  if (at > 0 && args[0] == "reproduce" && at < args.size() && args[at].rfind("-", 0) != 0) ++at;
  args.insert(args.begin() + static_cast<long>(at), injected.begin(), injected.end());
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cvq: CV qubits on the transverse mode of a laser beam", "cvq"};
  app.set_version_flag("--version", CVQ_VERSION);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;
  StateOpts state;
  CcdOpts ccd;
  WignerOpts wig;
  std::size_t samples = 801, steps = 64, n = 100000, grid_fig2 = 256;
  std::string out_path, z_max, theta_l, focal = "145mm", image_path, sweep_path, scheme = "four_cat";
  std::string sigma_theta = "0", sigma_z = "0", period = "1mm", figure;
  double overlap_noise = 0.0, tilt = 0.0, fit_visibility = 1.0;
  bool want_phase = false;

  auto* s_state = app.add_subcommand("state", "Print T, phi, N_arb and the Bloch vector");
  add_common(s_state, common);
  add_state(s_state, state);

  auto* s_wigner = app.add_subcommand("wigner", "Wigner map on an auto-sized grid (CSV, optional PGM)");
  add_common(s_wigner, common);
  add_state(s_wigner, state);
  s_wigner->add_option("--grid", wig.grid, "Points per axis");
  s_wigner->add_option("--method", wig.method, "analytic or numeric");
  s_wigner->add_option("--units", wig.units, "scaled or si");
  s_wigner->add_option("--out", wig.out, "CSV path");
  s_wigner->add_option("--pgm", wig.pgm, "Optional 16-bit PGM path");

  auto* s_marg = app.add_subcommand("marginals", "Closed-form position and momentum distributions");
  add_common(s_marg, common);
  add_state(s_marg, state);
  s_marg->add_option("--samples", samples, "Samples per axis");
  s_marg->add_option("--out", out_path, "CSV path");

  auto* s_beam = app.add_subcommand("beam", "Gaussian beam w, R, Gouy phase table");
  add_common(s_beam, common);
  s_beam->add_option("--z-max", z_max, "Largest z (default 3 z_R)");
  s_beam->add_option("--steps", steps, "Intervals");
  s_beam->add_option("--theta-l", theta_l, "Also print the single-lens rotator matrix");
  s_beam->add_option("--f", focal, "Lens focal length");
  s_beam->add_option("--out", out_path, "CSV path");

  auto* s_ccd = app.add_subcommand("ccd", "Render a synthetic CCD image (PGM + JSON sidecar)");
  add_common(s_ccd, common);
  add_state(s_ccd, state);
  add_ccd(s_ccd, ccd);
  s_ccd->add_option("--tilt", tilt, "Imaginary part added to the displaced beam's alpha");
  s_ccd->add_option("--out", out_path, "PGM path");

  auto* s_fit = app.add_subcommand("fit", "Analyze a CCD image: profile, Gaussian fit, optional phase");
  add_common(s_fit, common);
  add_state(s_fit, state);
  s_fit->add_option("--image", image_path, "PGM image");
  s_fit->add_flag("--phase", want_phase, "Estimate the relative phase (momentum plane)");
  s_fit->add_option("--visibility", fit_visibility, "Visibility assumed by the phase fit");
  s_fit->add_option("--out", out_path, "Profile CSV path");

  auto* s_sweep = app.add_subcommand("sweep", "Beam statistics along a (T, phi) path");
  add_common(s_sweep, common);
  add_state(s_sweep, state);
  s_sweep->add_option("--path", sweep_path, "Points 'T:phi;T:phi;...' (default: equator loop)");
  s_sweep->add_option("--steps", steps, "Points on the default loop");
  s_sweep->add_option("--out", out_path, "CSV path");

  auto* s_mdm = app.add_subcommand("mdm", "Basis Gram matrix and PSK link simulation");
  add_common(s_mdm, common);
  add_state(s_mdm, state);
  s_mdm->add_option("--scheme", scheme, "four_cat, twelve_state or four_hg_reference");
  s_mdm->add_option("--n", n, "Rounds");
  s_mdm->add_option("--sigma-theta", sigma_theta, "Rotation jitter");
  s_mdm->add_option("--sigma-z", sigma_z, "Path-length jitter");
  s_mdm->add_option("--period", period, "GI fiber period cT'");
  s_mdm->add_option("--overlap-noise", overlap_noise, "Complex Gaussian overlap noise sigma");
  s_mdm->add_option("--out", out_path, "Gram CSV path");

  auto* s_qkd = app.add_subcommand("qkd", "BB84 with |x-/+>, |p-/+> through a jittered GI fiber");
  add_common(s_qkd, common);
  add_state(s_qkd, state);
  s_qkd->add_option("--n", n, "Rounds");
  s_qkd->add_option("--sigma-z", sigma_z, "Path-length jitter");
  s_qkd->add_option("--period", period, "GI fiber period cT'");
  s_qkd->add_option("--out", out_path, "Stats JSON path");

  auto* s_repro = app.add_subcommand("reproduce", "Regenerate a figure's data set");
  add_common(s_repro, common);
  add_ccd(s_repro, ccd);
  s_repro->add_option("figure", figure, "fig2, fig4 or fig5")->required()->check(CLI::IsMember({"fig2", "fig4", "fig5"}));
  s_repro->add_option("--grid", grid_fig2, "Wigner grid points per axis (fig2)");

  try {
    auto args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << CVQ_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "cvq: error[usage]: " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "cvq: error[usage]: " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const io::IoError& e) {
    err << "cvq: error[io]: " << one_line(e.what()) << '\n';
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    err << "cvq: error[usage]: " << one_line(e.what()) << '\n';
    return kExitUsage;
  }

  try {
    if (*s_state) return cmd_state(common, state, s_state, out);
    if (*s_wigner) return cmd_wigner(common, state, wig, s_wigner, out);
    if (*s_marg) return cmd_marginals(common, state, samples, out_path, s_marg, out);
    if (*s_beam) return cmd_beam(common, z_max, steps, theta_l, focal, out_path, s_beam, out);
    if (*s_ccd) return cmd_ccd(common, state, ccd, tilt, out_path, s_ccd, out);
    if (*s_fit) return cmd_fit(common, image_path, state, want_phase, fit_visibility, out_path, s_fit, out);
    if (*s_sweep) return cmd_sweep(common, state, sweep_path, steps, out_path, s_sweep, out);
    if (*s_mdm)
      return cmd_mdm(common, state, scheme, n, sigma_theta, sigma_z, period, overlap_noise, out_path, s_mdm, out);
    if (*s_qkd) return cmd_qkd(common, state, n, sigma_z, period, out_path, s_qkd, out);
    if (*s_repro) {
      json resolved;
      std::vector<fs::path> outputs;
      if (figure == "fig2") outputs = reproduce_fig2(common, grid_fig2, resolved);
      else if (figure == "fig4") outputs = reproduce_fig4(common, ccd, resolved);
      else {
        if (s_repro->get_option("--visibility")->count() == 0) ccd.visibility = 0.97;
        outputs = reproduce_fig5(common, ccd, resolved);
      }
      write_manifest(out_dir(common) / (figure + ".manifest.json"), "reproduce " + figure, s_repro, common.seed, resolved,
                     outputs);
      out << "reproduce " << figure << ": wrote " << outputs.size() << " files to " << out_dir(common).generic_string()
          << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "cvq: error[usage]: " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "cvq: error[numeric]: " << one_line(e.what()) << '\n';
    return kExitFailure;
  } catch (const io::IoError& e) {
    err << "cvq: error[io]: " << one_line(e.what()) << '\n';
    return kExitFailure;
  } catch (const fs::filesystem_error& e) {
    err << "cvq: error[io]: " << one_line(e.what()) << '\n';
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    err << "cvq: error[invalid]: " << one_line(e.what()) << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "cvq: error[internal]: " << one_line(e.what()) << '\n';
    return kExitFailure;
  }
  err << "cvq: error[usage]: no subcommand\n";
  return kExitUsage;
}

}  // namespace cvq::cli
