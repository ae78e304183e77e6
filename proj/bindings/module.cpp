#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "riszf/alloc.hpp"
#include "riszf/harness.hpp"
#include "riszf/linalg.hpp"

namespace py = pybind11;
using namespace riszf;

namespace {

SweepSpec make_spec(const ScenarioConfig& scenario, const std::string& axis,
                    const std::vector<double>& values, int trials,
                    std::uint64_t seed,
                    const std::vector<std::string>& algorithms, int threads) {
  SweepSpec spec;
  if (axis == "power") {
    spec.axis = SweepAxis::kPtxDbm;
  } else if (axis == "elements") {
    spec.axis = SweepAxis::kNRis;
  } else {
    throw ConfigError("axis must be 'power' or 'elements'");
  }
  spec.values = values;
  spec.trials = trials;
  spec.master_seed = seed;
  spec.algorithms = algorithms;
  spec.base = scenario;
  spec.threads = threads;
  return spec;
}

py::list records_to_list(const SweepOutcome& outcome) {
  py::list out;
  for (const auto& r : outcome.records) {
    py::dict d;
    d["axis"] = r.axis;
    d["axis_value"] = r.axis_value;
    d["algorithm"] = r.algorithm;
    d["mean_se"] = r.mean_se;
    d["std_se"] = r.std_se;
    d["mean_users"] = r.mean_users;
    d["trials"] = r.trials;
    d["mean_ms"] = r.mean_ms;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_riszf, m) {
  m.doc() = "zero-forcing precoding and phase optimization for the "
            "RIS-aided broadcast channel";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<DegenerateAllocation>(m, "DegenerateAllocationError");

  py::class_<Vec3>(m, "Vec3")
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"),
           py::arg("z"))
      .def_readwrite("x", &Vec3::x)
      .def_readwrite("y", &Vec3::y)
      .def_readwrite("z", &Vec3::z);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("n_bs", &ScenarioConfig::n_bs)
      .def_readwrite("n_ris", &ScenarioConfig::n_ris)
      .def_readwrite("n_users", &ScenarioConfig::n_users)
      .def_readwrite("bs_pos", &ScenarioConfig::bs_pos)
      .def_readwrite("ris_pos", &ScenarioConfig::ris_pos)
      .def_readwrite("user_center", &ScenarioConfig::user_center)
      .def_readwrite("user_radius", &ScenarioConfig::user_radius)
      .def_readwrite("user_height", &ScenarioConfig::user_height)
      .def_readwrite("alpha_d", &ScenarioConfig::alpha_d)
      .def_readwrite("alpha_r", &ScenarioConfig::alpha_r)
      .def_readwrite("alpha_s", &ScenarioConfig::alpha_s)
      .def_readwrite("beta_d", &ScenarioConfig::beta_d)
      .def_readwrite("beta_r", &ScenarioConfig::beta_r)
      .def_readwrite("beta_s", &ScenarioConfig::beta_s)
      .def_readwrite("extra_loss_db", &ScenarioConfig::extra_loss_db)
      .def_readwrite("penalized_fraction", &ScenarioConfig::penalized_fraction)
      .def_readwrite("noise_dbm", &ScenarioConfig::noise_dbm)
      .def_readwrite("ptx_dbm", &ScenarioConfig::ptx_dbm)
      .def("validate", &ScenarioConfig::validate);

  py::class_<ChannelRealization>(m, "ChannelRealization")
      .def_readonly("h_direct", &ChannelRealization::h_direct)
      .def_readonly("h_ris_user", &ChannelRealization::h_ris_user)
      .def_readonly("a", &ChannelRealization::a)
      .def_readonly("b", &ChannelRealization::b)
      .def_property_readonly("n_users", &ChannelRealization::n_users)
      .def_property_readonly("n_bs", &ChannelRealization::n_bs)
      .def_property_readonly("n_ris", &ChannelRealization::n_ris);

  py::class_<PowerAllocation>(m, "PowerAllocation")
      .def_readonly("gains", &PowerAllocation::gains)
      .def_readonly("powers", &PowerAllocation::powers)
      .def_readonly("ptx", &PowerAllocation::ptx);

  py::class_<AlgorithmResult>(m, "AlgorithmResult")
      .def_readonly("algorithm", &AlgorithmResult::algorithm)
      .def_readonly("order", &AlgorithmResult::order)
      .def_readonly("theta", &AlgorithmResult::theta)
      .def_readonly("power", &AlgorithmResult::power)
      .def_readonly("se", &AlgorithmResult::se)
      .def("__repr__", [](const AlgorithmResult& r) {
        std::ostringstream ss;
        ss << "AlgorithmResult(" << r.algorithm << ", se=" << r.se
           << ", users=" << r.order.size() << ")";
        return ss.str();
      });

  m.def("path_loss_db", &path_loss_db, py::arg("d_m"), py::arg("alpha_db"),
        py::arg("beta"));
  m.def("ula_steering", &ula_steering, py::arg("n"), py::arg("angle_rad"));
  m.def("dbm_to_watt", &dbm_to_watt, py::arg("dbm"));
  m.def("draw_realization", &draw_realization, py::arg("cfg"), py::arg("seed"),
        py::arg("trial"));
  m.def("waterfill", &waterfill, py::arg("gains"), py::arg("ptx"));

  m.def(
      "run_algorithm",
      [](const ChannelRealization& ch, const std::string& name,
         double ptx_dbm, std::uint64_t seed) {
        const double ptx = dbm_to_watt(ptx_dbm);
        if (name == "direct") return lisa_direct(ch, ptx);
        if (name == "random") return random_phase_baseline(ch, ptx, seed);
        if (name == "greedy") return greedy_ris_lisa(ch, ptx);
        if (name == "addone") return add_one_ris_lisa(ch, ptx);
        throw ConfigError("unknown algorithm '" + name + "'");
      },
      py::arg("realization"), py::arg("algorithm"), py::arg("ptx_dbm"),
      py::arg("seed") = 0,
      "Run one allocation algorithm (direct | random | greedy | addone) "
      "on a realization.");

  m.def(
      "run_trial",
      [](const ScenarioConfig& cfg, std::uint64_t seed, std::uint64_t trial,
         const std::vector<std::string>& algorithms, double ptx_dbm) {
        py::list out;
        for (const auto& tr :
             run_trial(cfg, seed, trial, algorithms, ptx_dbm)) {
          py::dict d;
          d["algorithm"] = tr.algorithm;
          d["se"] = tr.se;
          d["users"] = tr.users;
          d["failed"] = tr.failed;
          out.append(d);
        }
        return out;
      },
      py::arg("cfg"), py::arg("seed"), py::arg("trial"), py::arg("algorithms"),
      py::arg("ptx_dbm"));

  m.def(
      "run_sweep",
      [](const ScenarioConfig& scenario, const std::string& axis,
         const std::vector<double>& values, int trials, std::uint64_t seed,
         const std::vector<std::string>& algorithms, int threads) {
        return records_to_list(run_sweep(
            make_spec(scenario, axis, values, trials, seed, algorithms,
                      threads)));
      },
      py::arg("scenario"), py::arg("axis"), py::arg("values"),
      py::arg("trials"), py::arg("seed"), py::arg("algorithms"),
      py::arg("threads") = 1);

  m.def(
      "sweep_csv",
      [](const ScenarioConfig& scenario, const std::string& axis,
         const std::vector<double>& values, int trials, std::uint64_t seed,
         const std::vector<std::string>& algorithms, int threads) {
        std::ostringstream ss;
        emit_csv(run_sweep(make_spec(scenario, axis, values, trials, seed,
                                     algorithms, threads)),
                 ss);
        return ss.str();
      },
      py::arg("scenario"), py::arg("axis"), py::arg("values"),
      py::arg("trials"), py::arg("seed"), py::arg("algorithms"),
      py::arg("threads") = 1);
}
