#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cvq/applications.hpp"
#include "cvq/cli.hpp"
#include "cvq/error.hpp"
#include "cvq/io.hpp"
#include "cvq/propagation.hpp"
#include "cvq/virtual_lab.hpp"
#include "cvq/wigner.hpp"

namespace py = pybind11;
using namespace cvq;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

// Row index is p, column index is x, matching WignerMap storage.
py::array_t<double> map_array(const WignerMap& m) {
  py::array_t<double> out({m.grid.np, m.grid.nx});
  std::copy(m.values.begin(), m.values.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coherent-state superposition qubits: states, phase space, propagation and a virtual camera.";

  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<io::IoError>(m, "IoError", PyExc_OSError);

  m.attr("HBAR") = kHbar;

  py::class_<ModeFrame>(m, "ModeFrame")
      .def(py::init<double, double>(), py::arg("w0"), py::arg("wavelength"))
      .def_static("laboratory", &ModeFrame::laboratory)
      .def_property_readonly("w0", &ModeFrame::w0)
      .def_property_readonly("wavelength", &ModeFrame::wavelength)
      .def_property_readonly("k", &ModeFrame::k)
      .def_property_readonly("rayleigh_range", &ModeFrame::rayleigh_range)
      .def("displacement", &ModeFrame::displacement)
      .def("alpha_for", &ModeFrame::alpha_for)
      .def("__eq__", [](const ModeFrame& a, const ModeFrame& b) { return a == b; });

  py::class_<OverlapAngle>(m, "OverlapAngle")
      .def_static("from_theta", &OverlapAngle::from_theta)
      .def_static("from_alpha", &OverlapAngle::from_alpha)
      .def_static("from_displacement", &OverlapAngle::from_displacement)
      .def_property_readonly("theta", &OverlapAngle::theta)
      .def_property_readonly("alpha", &OverlapAngle::alpha)
      .def("displacement", &OverlapAngle::displacement);

  py::class_<QubitParams>(m, "QubitParams")
      .def(py::init<double, double, double>(), py::arg("T"), py::arg("phi"), py::arg("d"))
      .def_property_readonly("T", &QubitParams::T)
      .def_property_readonly("phi", &QubitParams::phi)
      .def_property_readonly("phi_signed", &QubitParams::phi_signed)
      .def_property_readonly("d", &QubitParams::d)
      .def("__repr__", [](const QubitParams& p) {
        std::ostringstream s;
        s << "QubitParams(T=" << p.T() << ", phi=" << p.phi() << ", d=" << p.d() << ")";
        return s.str();
      });

  py::class_<BlochVector>(m, "BlochVector")
      .def(py::init(&BlochVector::checked), py::arg("x"), py::arg("y"), py::arg("z"))
      .def_static("from_angles", &BlochVector::from_angles)
      .def_readonly("x", &BlochVector::x)
      .def_readonly("y", &BlochVector::y)
      .def_readonly("z", &BlochVector::z)
      .def("norm", &BlochVector::norm);

  py::class_<CoherentTerm>(m, "CoherentTerm")
      .def(py::init<cplx, cplx, cplx>(), py::arg("coeff"), py::arg("alpha_x"), py::arg("alpha_y") = cplx{})
      .def_readonly("coeff", &CoherentTerm::coeff)
      .def_readonly("alpha_x", &CoherentTerm::alpha_x)
      .def_readonly("alpha_y", &CoherentTerm::alpha_y);

  py::class_<SuperpositionState>(m, "SuperpositionState")
      .def(py::init<ModeFrame, std::vector<CoherentTerm>, bool>(), py::arg("frame"), py::arg("terms"),
           py::arg("collapsed") = false)
      .def_property_readonly("frame", &SuperpositionState::frame)
      .def_property_readonly("terms",
                             [](const SuperpositionState& s) { return std::vector<CoherentTerm>(s.terms().begin(), s.terms().end()); })
      .def_property_readonly("collapsed", &SuperpositionState::collapsed);

  m.def("coherent_overlap", &coherent_overlap);
  m.def("inner_product", &inner_product);
  m.def("fidelity", &fidelity);
  m.def("normalization_factor", &normalization_factor);
  m.def("make_qubit_state", &make_qubit_state, py::arg("params"), py::arg("frame"));
  m.def("bloch_to_params", &bloch_to_params);
  m.def("params_to_bloch", &params_to_bloch);
  m.def(
      "make_typical_state",
      [](const std::string& name, const OverlapAngle& theta_d, const ModeFrame& frame) {
        auto r = make_typical_state(typical_state_from_string(name), theta_d, frame);
        return py::make_tuple(r.params, r.state);
      },
      py::arg("name"), py::arg("theta_d"), py::arg("frame"));
  m.def("typical_state_names", [] {
    std::vector<std::string> names;
    for (auto k : kAllTypicalStates) names.emplace_back(to_string(k));
    return names;
  });

  py::enum_<PhaseUnits>(m, "PhaseUnits").value("Scaled", PhaseUnits::Scaled).value("SI", PhaseUnits::SI);

  py::class_<PhaseSpaceGrid>(m, "PhaseSpaceGrid")
      .def(py::init([](double x_min, double x_max, std::size_t nx, double p_min, double p_max, std::size_t np,
                       PhaseUnits units) {
             PhaseSpaceGrid g{x_min, x_max, nx, p_min, p_max, np, units};
             g.validate();
             return g;
           }),
           py::arg("x_min"), py::arg("x_max"), py::arg("nx"), py::arg("p_min"), py::arg("p_max"), py::arg("np"),
           py::arg("units") = PhaseUnits::Scaled)
      .def_readonly("nx", &PhaseSpaceGrid::nx)
      .def_readonly("np", &PhaseSpaceGrid::np)
      .def_property_readonly("dx", &PhaseSpaceGrid::dx)
      .def_property_readonly("dp", &PhaseSpaceGrid::dp)
      .def("x_at", &PhaseSpaceGrid::x_at)
      .def("p_at", &PhaseSpaceGrid::p_at);

  py::class_<WignerMap>(m, "WignerMap")
      .def_readonly("grid", &WignerMap::grid)
      .def_property_readonly("values", &map_array)
      .def("integral", &WignerMap::integral)
      .def("position_marginal", [](const WignerMap& w) { return as_array(w.integrate_over_p()); })
      .def("momentum_marginal", [](const WignerMap& w) { return as_array(w.integrate_over_x()); });

  m.def("auto_grid", &auto_grid, py::arg("state"), py::arg("n"), py::arg("units") = PhaseUnits::Scaled,
        py::arg("x_origin") = 0.0);
  m.def("wigner_numeric", &wigner_numeric);
  m.def("wigner_analytic_map", &wigner_analytic_map);
  m.def("wigner_closed_form", &wigner_closed_form, py::arg("params"), py::arg("frame"), py::arg("x"), py::arg("p"));
  m.def("marginal_position", &marginal_position);
  m.def("marginal_momentum", &marginal_momentum);
  m.def(
      "quadrature_moments",
      [](const SuperpositionState& s, double theta) {
        const auto q = quadrature_moments(s, theta);
        return py::make_tuple(q.mean, q.variance);
      },
      py::arg("state"), py::arg("theta") = 0.0);
  m.def(
      "negativity_scan",
      [](const SuperpositionState& s, const PhaseSpaceGrid& g) {
        const auto r = negativity_scan(s, g);
        return py::dict(py::arg("min_value") = r.min_value, py::arg("x_at_min") = r.x_at_min,
                        py::arg("p_at_min") = r.p_at_min, py::arg("negative_volume") = r.negative_volume);
      });

  py::class_<BeamParams>(m, "BeamParams")
      .def_readonly("z", &BeamParams::z)
      .def_readonly("w", &BeamParams::w)
      .def_readonly("R", &BeamParams::R)
      .def_readonly("gouy", &BeamParams::gouy)
      .def_readonly("q", &BeamParams::q);
  m.def("beam_params_at", &beam_params_at);

  py::class_<FiberSpec>(m, "FiberSpec")
      .def(py::init([](double period) { return FiberSpec{period}; }), py::arg("period") = 1e-3)
      .def_readwrite("period", &FiberSpec::period);
  m.def("rotate_phase_space", &rotate_phase_space, py::arg("state"), py::arg("theta"), py::arg("center_x") = cplx{},
        py::arg("center_y") = cplx{});
  m.def("gi_fiber_evolve", &gi_fiber_evolve, py::arg("state"), py::arg("length"), py::arg("fiber"),
        py::arg("axis_offset") = 0.0);
  m.def(
      "propagate_profile",
      [](const SuperpositionState& s, double z, const std::vector<double>& xs) {
        const auto env = propagate_analytic(s, z);
        std::vector<cplx> out;
        out.reserve(xs.size());
        for (double x : xs) out.push_back(env.x_profile(x));
        return out;
      },
      py::arg("state"), py::arg("z"), py::arg("x"));

  py::enum_<PlaneKind>(m, "PlaneKind").value("Position", PlaneKind::Position).value("Momentum", PlaneKind::Momentum);
  py::class_<PlaneSpec>(m, "PlaneSpec")
      .def_static("position", &PlaneSpec::position)
      .def_static("momentum", &PlaneSpec::momentum, py::arg("focal_length") = 0.145)
      .def_readonly("kind", &PlaneSpec::kind)
      .def_readonly("focal_length", &PlaneSpec::focal_length);

  py::class_<CcdConfig>(m, "CcdConfig")
      .def(py::init<>())
      .def_readwrite("nx", &CcdConfig::nx)
      .def_readwrite("ny", &CcdConfig::ny)
      .def_readwrite("pitch", &CcdConfig::pitch)
      .def_readwrite("bit_depth", &CcdConfig::bit_depth)
      .def_readwrite("background", &CcdConfig::background)
      .def_readwrite("exposure_scale", &CcdConfig::exposure_scale)
      .def_readwrite("visibility", &CcdConfig::visibility)
      .def_readwrite("seed", &CcdConfig::seed)
      .def_readwrite("shot_noise", &CcdConfig::shot_noise);

  py::class_<CcdImage>(m, "CcdImage")
      .def_readonly("config", &CcdImage::config)
      .def_readonly("plane", &CcdImage::plane)
      .def_readonly("saturated", &CcdImage::saturated)
      .def_property_readonly("counts", [](const CcdImage& img) {
        py::array_t<std::uint16_t> out({img.config.ny, img.config.nx});
        std::copy(img.counts.begin(), img.counts.end(), out.mutable_data());
        return out;
      });

  m.def("render_ccd", py::overload_cast<const SuperpositionState&, const PlaneSpec&, const CcdConfig&>(&render_ccd));
  m.def("profile_from_image", [](const CcdImage& img) { return as_array(profile_from_image(img)); });
  m.def("read_pgm", &io::read_pgm);
  m.def("write_pgm", [](const std::string& path, const CcdImage& img) { io::write_pgm(path, img); });

  py::class_<GaussianFit>(m, "GaussianFit")
      .def_readonly("center", &GaussianFit::center)
      .def_readonly("radius", &GaussianFit::radius)
      .def_readonly("amplitude", &GaussianFit::amplitude)
      .def_readonly("relative_rss", &GaussianFit::relative_rss)
      .def_readonly("poor", &GaussianFit::poor);
  m.def("fit_gaussian_profile", &fit_gaussian_profile);

  py::class_<FringeModel>(m, "FringeModel")
      .def(py::init<>())
      .def_readwrite("d", &FringeModel::d)
      .def_readwrite("w0", &FringeModel::w0)
      .def_readwrite("T", &FringeModel::T)
      .def_readwrite("focal_length", &FringeModel::focal_length)
      .def_readwrite("wavelength", &FringeModel::wavelength)
      .def_readwrite("pitch", &FringeModel::pitch)
      .def_readwrite("visibility", &FringeModel::visibility);
  m.def("estimate_relative_phase",
        [](const std::vector<double>& profile, const FringeModel& model) { return estimate_relative_phase(profile, model).phi; });

  py::class_<BasisSet>(m, "BasisSet")
      .def_readonly("name", &BasisSet::name)
      .def_readonly("labels", &BasisSet::labels)
      .def_readonly("states", &BasisSet::states)
      .def("gram_at", &BasisSet::gram_at)
      .def("max_identity_deviation", &BasisSet::max_identity_deviation);
  m.def(
      "build_basis",
      [](const std::string& scheme, const OverlapAngle& theta_d, const ModeFrame& frame) {
        return build_basis(basis_scheme_from_string(scheme), theta_d, frame);
      },
      py::arg("scheme"), py::arg("theta_d"), py::arg("frame"));
  m.def("linear_combination", &linear_combination);

  py::class_<ChannelModel>(m, "ChannelModel")
      .def(py::init<>())
      .def_readwrite("rotation_jitter_sigma", &ChannelModel::rotation_jitter_sigma)
      .def_readwrite("path_jitter_sigma", &ChannelModel::path_jitter_sigma)
      .def_readwrite("overlap_noise_sigma", &ChannelModel::overlap_noise_sigma);

  py::class_<ProtocolStats>(m, "ProtocolStats")
      .def_readonly("rounds", &ProtocolStats::rounds)
      .def_readonly("sifted", &ProtocolStats::sifted)
      .def_readonly("errors", &ProtocolStats::errors)
      .def_readonly("lost", &ProtocolStats::lost)
      .def_property_readonly("qber", &ProtocolStats::qber)
      .def_property_readonly("ber", &ProtocolStats::ber)
      .def_property_readonly("sift_rate", &ProtocolStats::sift_rate);
  m.def("psk_link_simulate", &psk_link_simulate, py::arg("n"), py::arg("basis"), py::arg("channel"), py::arg("seed"));
  m.def("qkd_simulate", &qkd_simulate, py::arg("n"), py::arg("theta_d"), py::arg("path_jitter_sigma"),
        py::arg("fiber"), py::arg("seed"), py::arg("frame"));

  // Returns (exit_code, stdout, stderr) without touching the process streams.
  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
