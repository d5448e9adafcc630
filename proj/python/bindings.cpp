#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rissim/estimators.hpp"
#include "rissim/experiments.hpp"

namespace py = pybind11;
using namespace rissim;

namespace {

using ComplexArray = py::array_t<cd, py::array::c_style | py::array::forcecast>;

template <std::size_t Rank>
ComplexArray to_numpy(const Tensor<Rank>& t) {
  std::vector<py::ssize_t> shape(t.dims().begin(), t.dims().end());
  ComplexArray out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

template <std::size_t Rank>
Tensor<Rank> from_numpy(const ComplexArray& a) {
  if (a.ndim() != static_cast<py::ssize_t>(Rank))
    throw DimensionError("expected a " + std::to_string(Rank) + "-axis array");
  std::array<std::size_t, Rank> dims;
  for (std::size_t i = 0; i < Rank; ++i) dims[i] = static_cast<std::size_t>(a.shape(i));
  Tensor<Rank> t(dims);
  std::copy(a.data(), a.data() + a.size(), t.data().begin());
  return t;
}

Geometry geometry_for(const SystemConfig& c) { return Geometry::defaults(c); }

py::dict record_dict(const MetricsRecord& r) {
  py::dict d;
  d["experiment"] = r.experiment;
  d["scheme"] = r.scheme;
  d["sweep_name"] = r.sweep_name;
  d["sweep_value"] = r.sweep_value;
  d["trials"] = r.trials;
  d["metric_name"] = r.metric_name;
  d["metric_value"] = r.metric_value;
  d["ci_halfwidth"] = r.ci_halfwidth;
  d["seed"] = r.seed;
  d["pilot_samples_used"] = r.pilot_samples_used;
  return d;
}

/// One noisy training round of a scheme: returns CFO and CIR estimates next to the truth.
py::dict train(const std::string& scheme_name, const SystemConfig& config, const std::vector<double>& cfos,
               std::uint64_t seed) {
  const Scheme scheme = parse_scheme(scheme_name);
  RandomStream rs(seed);
  const ChannelSet ch = generate_channels(config, geometry_for(config), rs);
  const PilotPlan plan = build_pilots(scheme, config);
  const RisSchedule sched = ris_training_schedule(config.ris_elements);
  const ReceivedFrame frame = synthesize_uplink(plan, ch, cfos, sched, config, rs);
  CfoEstimate cfo;
  CirEstimate cir;
  switch (scheme) {
    case Scheme::kProposed:
      cfo = estimate_cfo_proposed(frame, config);
      cir = estimate_cir_proposed(frame, cfo, plan, sched, config);
      break;
    case Scheme::kTdma:
      std::tie(cfo, cir) = estimate_joint_tdma(frame, plan, sched, config);
      break;
    case Scheme::kOfdma:
      cfo.eps_hat.assign(config.users, 0.0);
      cir = estimate_cir_ofdma(to_frequency(frame), plan, sched, config);
      break;
  }
  py::dict d;
  d["taps"] = to_numpy(ch.taps);
  d["cfo_hat"] = cfo.eps_hat;
  d["taps_hat"] = to_numpy(cir.g_hat);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "RIS-aided multi-user OFDM uplink simulator";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<SystemConfig>(m, "SystemConfig")
      .def(py::init<>())
      .def_readwrite("N", &SystemConfig::subcarriers)
      .def_readwrite("K", &SystemConfig::users)
      .def_readwrite("L", &SystemConfig::taps)
      .def_readwrite("L_cp", &SystemConfig::cp_length)
      .def_readwrite("M", &SystemConfig::antennas)
      .def_readwrite("R", &SystemConfig::ris_elements)
      .def_readwrite("snr_db", &SystemConfig::snr_db)
      .def_readwrite("tx_power", &SystemConfig::tx_power)
      .def_readwrite("noise_var", &SystemConfig::noise_var)
      .def_readwrite("upsilon", &SystemConfig::upsilon)
      .def_readwrite("carrier_freq_hz", &SystemConfig::carrier_freq_hz)
      .def_readwrite("master_seed", &SystemConfig::master_seed)
      .def_readwrite("kappa_db", &SystemConfig::kappa_db)
      .def("validate", &SystemConfig::validate);

  m.def("dft_matrix", &dft_matrix, py::arg("n"));
  m.def("zadoff_chu", &zadoff_chu, py::arg("length"), py::arg("root"));
  m.def("ris_training_schedule", [](int r) { return ris_training_schedule(r).phi; }, py::arg("r"));
  m.def("cfo_kernel", &cfo_kernel, py::arg("a"), py::arg("n"));

  m.def(
      "generate_channels",
      [](const SystemConfig& c, std::uint64_t seed) {
        RandomStream rs(seed);
        return to_numpy(generate_channels(c, geometry_for(c), rs).taps);
      },
      py::arg("config"), py::arg("seed"));
  m.def(
      "cfr_from_cir", [](const ComplexArray& taps, int n) { return to_numpy(cfr_from_cir(from_numpy<4>(taps), n)); },
      py::arg("taps"), py::arg("n"));
  m.def(
      "build_pilots",
      [](const std::string& scheme, const SystemConfig& c) {
        return to_numpy(build_pilots(parse_scheme(scheme), c).time_pilots);
      },
      py::arg("scheme"), py::arg("config"));
  m.def("train", &train, py::arg("scheme"), py::arg("config"), py::arg("cfos"), py::arg("seed"),
        "Simulate one training frame and run the scheme's estimators.");

  m.def(
      "achievable_rate",
      [](const ComplexArray& h, const CVector& phi, double power, double noise_var, int l_cp) {
        const RateModel model = RateModel::from_cfr(from_numpy<4>(h), power, noise_var, 1.0, l_cp);
        const RateValue v = achievable_rate({phi}, model);
        return py::make_tuple(v.f1, v.f2);
      },
      py::arg("h"), py::arg("phi"), py::arg("power"), py::arg("noise_var"), py::arg("l_cp"));
  m.def(
      "rate_gradient",
      [](const ComplexArray& h, const CVector& phi, double power, double noise_var, int l_cp) {
        return rate_gradient({phi}, RateModel::from_cfr(from_numpy<4>(h), power, noise_var, 1.0, l_cp));
      },
      py::arg("h"), py::arg("phi"), py::arg("power"), py::arg("noise_var"), py::arg("l_cp"));
  m.def("project_unit_modulus", &project_unit_modulus, py::arg("phi"));
  m.def(
      "pgm_optimize",
      [](const ComplexArray& h, double power, double noise_var, int l_cp) {
        const RateModel model = RateModel::from_cfr(from_numpy<4>(h), power, noise_var, 1.0, l_cp);
        const PgmResult r = pgm_optimize(model, PgmParams{}, all_ones_phases(model.paths() - 1));
        return py::make_tuple(r.phases.phi_d, r.trace);
      },
      py::arg("h"), py::arg("power"), py::arg("noise_var"), py::arg("l_cp"));
  m.def(
      "grid_search",
      [](const ComplexArray& h, double power, double noise_var, int l_cp, int levels) {
        return grid_search(RateModel::from_cfr(from_numpy<4>(h), power, noise_var, 1.0, l_cp), levels).phi_d;
      },
      py::arg("h"), py::arg("power"), py::arg("noise_var"), py::arg("l_cp"), py::arg("levels") = 64);

  m.def(
      "run_experiment",
      [](const std::string& experiment, const std::string& config_json, const std::vector<std::string>& overrides) {
        const ExperimentSpec spec = parse_config_text(config_json, parse_experiment(experiment), overrides);
        std::vector<MetricsRecord> rs;
        {
          py::gil_scoped_release release;
          rs = run_experiment(spec);
        }
        py::list out;
        for (const auto& r : rs) out.append(record_dict(r));
        return out;
      },
      py::arg("experiment"), py::arg("config") = "{}", py::arg("overrides") = std::vector<std::string>{});
  m.def("format_double", &format_double, py::arg("value"));
}
