#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfi/io.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace mfi;

namespace {

std::vector<double> phases_of(const PhaseVector& p) { return p.values(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "multi-frequency interferometric ranging core";

  static py::exception<Error> err(m, "MfiError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(err, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.attr("SPEED_OF_LIGHT") = kSpeedOfLight;
  m.attr("SPEED_OF_LIGHT_PAPER") = kSpeedOfLightPaper;

  py::class_<FrequencyPlan>(m, "FrequencyPlan")
      .def(py::init<double, double, std::vector<std::int64_t>, double>(), "f1_hz"_a,
           "resolution_hz"_a, "spacings"_a, "c"_a = kSpeedOfLight)
      .def_property_readonly("f1", &FrequencyPlan::f1)
      .def_property_readonly("resolution", &FrequencyPlan::resolution)
      .def_property_readonly("c", &FrequencyPlan::c)
      .def_property_readonly("spacings", &FrequencyPlan::spacings)
      .def_property_readonly("frequencies", &FrequencyPlan::frequencies)
      .def_property_readonly("bandwidth", &FrequencyPlan::bandwidth)
      .def_property_readonly("spacing_gcd", &FrequencyPlan::spacing_gcd)
      .def("__len__", &FrequencyPlan::size)
      .def("__eq__", &FrequencyPlan::operator==)
      .def("to_json", [](const FrequencyPlan& p) { return plan_to_json(p).dump(); })
      .def_static("from_json",
                  [](const std::string& s) { return plan_from_json(json::parse(s)); });

  m.def("wrap_phase", &wrap_phase, "x"_a);
  m.def("sigma_theta_from_snr_db", &sigma_theta_from_snr_db);

  m.def(
      "synth_phases",
      [](const FrequencyPlan& plan, double q0, double snr_db, const std::string& kind,
         std::uint64_t seed) {
        auto noise = kind == "none" ? NoiseModel::noiseless()
                                    : NoiseModel::from_snr_db(parse_noise_kind(kind), snr_db);
        return phases_of(synth_phases(plan, q0, noise, RngStream::from_seed(seed)));
      },
      "plan"_a, "q0"_a, "snr_db"_a = 0.0, "kind"_a = "none", "seed"_a = 0);

  m.def("design_rips", &design_rips, "f1_hz"_a, "bandwidth_hz"_a, "count"_a,
        "resolution_hz"_a = py::none(), "c"_a = kSpeedOfLight);
  m.def(
      "design_towers",
      [](double fn, double b, int n, double res, double c) {
        auto d = design_towers(fn, b, n, res, c);
        return py::make_tuple(d.plan, d.max_snap_error_hz);
      },
      "fN_hz"_a, "bandwidth_hz"_a, "count"_a, "resolution_hz"_a = 1.0, "c"_a = kSpeedOfLight);
  m.def("design_constrained_optimal", &design_constrained_optimal, "f1_hz"_a, "bandwidth_hz"_a,
        "count"_a, "resolution_hz"_a, "c"_a = kSpeedOfLight);
  m.def(
      "prime_window_select",
      [](double b, int n, double res, int i, std::optional<double> umr_req, double c) {
        DesignParams p{b, n, res, i, umr_req};
        auto s = prime_window_select(p, c);
        return py::make_tuple(s.primes, s.common_factor, s.start_index);
      },
      "bandwidth_hz"_a, "count"_a, "resolution_hz"_a, "prime_index"_a = 1,
      "umr_requirement_m"_a = py::none(), "c"_a = kSpeedOfLight);
  m.def(
      "design_prime",
      [](double b, int n, double res, int i, double f1, bool worst, double c) {
        DesignParams p{b, n, res, i, std::nullopt};
        auto d = worst ? design_prime_max_error(p, f1, c) : design_prime_min_error(p, f1, c);
        return py::make_tuple(d.plan, d.selection.common_factor);
      },
      "bandwidth_hz"_a, "count"_a, "resolution_hz"_a, "prime_index"_a, "f1_hz"_a,
      "worst"_a = false, "c"_a = kSpeedOfLight);

  m.def(
      "permute_min_error",
      [](std::vector<std::int64_t> v, bool mirrored) {
        return permute_min_error(SpacingMultiset(std::move(v)),
                                 mirrored ? MinErrorForm::mirrored : MinErrorForm::canonical);
      },
      "spacings"_a, "mirrored"_a = false);
  m.def(
      "permute_max_error",
      [](std::vector<std::int64_t> v) { return permute_max_error(SpacingMultiset(std::move(v))); },
      "spacings"_a);
  m.def(
      "permute_max_error_dual",
      [](std::vector<std::int64_t> v) {
        return permute_max_error_dual(SpacingMultiset(std::move(v)));
      },
      "spacings"_a);

  m.def("quadform", py::overload_cast<const std::vector<double>&>(&quadform), "spacings"_a);
  m.def("umr", &umr);
  m.def("epsilon_of", &epsilon_of);
  m.def("practical_umr", &practical_umr);
  m.def(
      "pa_lower_bound",
      [](double f1, double b, int n, double eps, double snr) {
        auto r = pa_lower_bound(f1, b, n, eps, snr);
        return py::make_tuple(r.value, r.within_validity);
      },
      "f1_hz"_a, "bandwidth_hz"_a, "count"_a, "epsilon"_a, "snr_db"_a);
  m.def("ambiguity_fn", &ambiguity_fn, "plan"_a, "dq"_a);
  m.def(
      "sidelobe_scan",
      [](const FrequencyPlan& p, std::optional<double> bm, std::optional<double> step) {
        auto r = sidelobe_scan(p, bm, step);
        return py::make_tuple(r.value, r.location_m);
      },
      "plan"_a, "mainlobe_width_m"_a = py::none(), "step_m"_a = py::none());
  m.def("mmse", &mmse, "plan"_a, "sigma_theta"_a);
  m.def("hmse", &hmse, "plan"_a, "sigma_theta"_a);
  m.def("crb", &crb, "plan"_a, "sigma_n"_a);
  m.def("pdf_multi", &pdf_multi, "plan"_a, "q"_a, "q0"_a, "sigma_theta"_a);
  m.def(
      "coprime_check",
      [](const FrequencyPlan& p) {
        auto r = coprime_check(p);
        std::vector<double> locs;
        for (const auto& c : r.coincidences) locs.push_back(c.dq_m);
        return py::make_tuple(r.coprime, locs);
      },
      "plan"_a);

  m.def(
      "cost_S",
      [](const std::vector<double>& ph, const FrequencyPlan& p, double q) {
        return cost_S(PhaseVector(ph, p), p, q);
      },
      "phases"_a, "plan"_a, "q"_a);
  m.def(
      "ls_estimate",
      [](const std::vector<double>& ph, const FrequencyPlan& p, double lo, double hi, double step,
         bool refine) {
        EstimatorConfig cfg{lo, hi, step, refine};
        auto e = ls_estimate(PhaseVector(ph, p), p, cfg);
        return py::dict("q_hat"_a = e.q_hat_m, "cost"_a = e.cost_at_min,
                        "grid_index"_a = e.grid_index, "refined"_a = e.refined);
      },
      "phases"_a, "plan"_a, "lo"_a, "hi"_a, "step"_a, "refine"_a = false);
  m.def("unwrap_ok", &unwrap_ok, "q_hat"_a, "q0"_a, "plan"_a);

  m.def(
      "run_pumr_check",
      [](const FrequencyPlan& p, double snr, std::size_t trials, std::uint64_t seed) {
        PumrCheck r;
        {
          py::gil_scoped_release nogil;
          r = run_pumr_check(p, snr, trials, seed);
        }
        return py::dict("empirical"_a = r.empirical, "stderr"_a = r.std_err,
                        "bound"_a = r.bound.value, "applicable"_a = r.bound_applicable);
      },
      "plan"_a, "snr_db"_a, "trials"_a, "seed"_a);
  m.def(
      "simulate_mse",
      [](const FrequencyPlan& p, double q0, std::vector<double> snrs, std::size_t trials,
         std::uint64_t seed, double lo, double hi, double step, bool refine) {
        CampaignSpec s;
        s.plans = {{"plan", p}};
        s.q0_m = q0;
        s.snr_grid_db = std::move(snrs);
        s.trials = trials;
        s.seed = seed;
        s.estimator = {lo, hi, step, refine};
        s.outputs = {Metric::mse};
        std::vector<CurveRow> rows;
        {
          py::gil_scoped_release nogil;
          rows = run_mse_curve(s);
        }
        py::list out;
        for (const auto& r : rows)
          out.append(py::dict("snr_db"_a = r.snr_db, "mse"_a = r.value, "stderr"_a = r.std_err,
                              "mmse"_a = r.mmse, "hmse"_a = r.hmse, "crb"_a = r.crb));
        return out;
      },
      "plan"_a, "q0"_a, "snr_grid_db"_a, "trials"_a, "seed"_a, "lo"_a, "hi"_a, "step"_a,
      "refine"_a = false);
}
