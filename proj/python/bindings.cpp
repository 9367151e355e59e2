#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "markovgate/bandwidth.hpp"
#include "markovgate/bootstrap.hpp"
#include "markovgate/error.hpp"
#include "markovgate/estimators.hpp"
#include "markovgate/harness.hpp"
#include "markovgate/models.hpp"
#include "markovgate/stats.hpp"

namespace py = pybind11;
namespace mg = markovgate;

namespace {

mg::Bandwidths bandwidths_from(const py::dict& d) {
  mg::Bandwidths bw;
  bw.b1 = d["b1"].cast<double>();
  bw.b2 = d["b2"].cast<double>();
  bw.h1 = d["h1"].cast<double>();
  bw.h2 = d["h2"].cast<double>();
  bw.h3 = d["h3"].cast<double>();
  return bw;
}

py::dict to_dict(const mg::Bandwidths& bw) {
  py::dict d;
  d["b1"] = bw.b1;
  d["b2"] = bw.b2;
  d["h1"] = bw.h1;
  d["h2"] = bw.h2;
  d["h3"] = bw.h3;
  return d;
}

mg::TripleSample triples(const std::vector<double>& values, double delta) {
  return mg::TripleSample::from_path(values, delta);
}

mg::Bandwidths resolve_bandwidths(const mg::TripleSample& s, mg::StatisticKind kind,
                                  const std::optional<py::dict>& bw, double c_scale) {
  if (bw) return bandwidths_from(*bw);
  mg::BandwidthRule rule;
  rule.c_scale = c_scale;
  const auto target =
      kind == mg::StatisticKind::t2 ? mg::BandwidthTarget::t2 : mg::BandwidthTarget::t1_family;
  return mg::select(rule, s, target);
}

py::dict report_dict(const mg::TestReport& r) {
  py::dict d;
  d["statistic_kind"] = std::string(mg::to_string(r.kind));
  d["statistic"] = r.statistic;
  d["mu"] = r.mu;
  d["sigma"] = r.sigma;
  d["z_score"] = r.z_score;
  d["p_normal"] = r.p_normal;
  d["r_scale"] = r.r_scale;
  d["dof"] = r.dof;
  d["p_chisq"] = r.p_chisq;
  d["p_bootstrap"] = r.p_bootstrap;
  d["n_used"] = r.n_used;
  d["floor_breaches"] = r.floor_breaches;
  d["inner_dropped"] = r.inner_dropped;
  d["calibration_failed"] = r.calibration_failed;
  d["calibration_note"] = r.calibration_note;
  d["bandwidths"] = to_dict(r.bandwidths);
  return d;
}

py::dict run_config(const std::string& command, const std::string& config_json) {
  const mg::ExperimentConfig c = mg::parse_config(config_json);
  py::dict out;
  out["config_hash"] = mg::config_hash(c);
  mg::PowerTable table;
  {
    py::gil_scoped_release release;
    table = command == "size" ? mg::run_size(c) : mg::run_power(c);
  }
  py::list rows;
  for (const auto& r : table.rows) {
    py::dict row;
    row["family"] = r.family;
    row["s_or_jumptype"] = r.s_or_jumptype;
    row["alpha"] = r.alpha;
    row["theta"] = r.theta;
    row["rejections"] = r.rejections;
    row["reps"] = r.reps;
    row["rate"] = r.rate;
    row["se"] = r.se;
    rows.append(row);
  }
  out["rows"] = rows;
  out["failures"] = table.failures;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chapman-Kolmogorov tests of the Markov property";

  auto base = py::register_exception<mg::Error>(m, "MarkovGateError", PyExc_RuntimeError);
  py::register_exception<mg::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<mg::DegenerateWindow>(m, "DegenerateWindow", base.ptr());
  py::register_exception<mg::DegenerateDesign>(m, "DegenerateDesign", base.ptr());
  py::register_exception<mg::InsufficientSupport>(m, "InsufficientSupport", base.ptr());
  py::register_exception<mg::NonstationaryFit>(m, "NonstationaryFit", base.ptr());
  py::register_exception<mg::CalibrationFailure>(m, "CalibrationFailure", base.ptr());
  py::register_exception<mg::NumericalFailure>(m, "NumericalFailure", base.ptr());

  m.def(
      "simulate",
      [](const std::string& model, std::size_t n_obs, double theta, std::uint64_t seed,
         double s_scale, const std::string& jump_type, const std::string& latent_start,
         std::uint64_t path_id) {
        mg::ModelSpec spec;
        spec.variant = mg::model_from_string(model);
        spec.theta = theta;
        spec.s_scale = s_scale;
        spec.jump_type = mg::jump_type_from_string(jump_type);
        mg::SimConfig cfg;
        cfg.n_obs = n_obs;
        cfg.seed = seed;
        cfg.latent_start = mg::latent_start_from_string(latent_start);
        return mg::simulate(spec, cfg, path_id).values;
      },
      py::arg("model") = "ou", py::arg("n_obs") = 1200, py::arg("theta") = 0.0,
      py::arg("seed") = 1, py::arg("s_scale") = 10.0, py::arg("jump_type") = "i",
      py::arg("latent_start") = "long_run_mean", py::arg("path_id") = 0,
      "Simulate n_obs + 2 weekly observations of the null or an alternative model.");

  m.def(
      "select_bandwidths",
      [](const std::vector<double>& values, const std::string& target, double c_scale,
         const std::string& kind, double delta) {
        mg::BandwidthRule rule;
        rule.kind = mg::bandwidth_kind_from_string(kind);
        rule.c_scale = c_scale;
        return to_dict(mg::select(rule, triples(values, delta), mg::bandwidth_target_from_string(target)));
      },
      py::arg("values"), py::arg("target") = "t1_family", py::arg("c_scale") = 1.0,
      py::arg("kind") = "empirical_rule", py::arg("delta") = 1.0 / 52.0);

  m.def(
      "transition_estimates",
      [](const std::vector<double>& values, const std::vector<double>& x,
         const std::vector<double>& z, const std::optional<py::dict>& bandwidths, double delta) {
        if (x.size() != z.size()) throw mg::ConfigError("x and z must have equal length");
        const mg::TripleSample s = triples(values, delta);
        const mg::EstimatorHandle h(s, resolve_bandwidths(s, mg::StatisticKind::t1, bandwidths, 1.0));
        py::dict out;
        std::vector<double> pd, pi, fd, fi;
        for (std::size_t i = 0; i < x.size(); ++i) {
          pd.push_back(h.density_2step_direct(x[i], z[i]));
          pi.push_back(h.density_2step_indirect(x[i], z[i]));
          fd.push_back(h.distribution_2step_direct(x[i], z[i]));
          fi.push_back(h.distribution_2step_indirect(x[i], z[i]));
        }
        out["density_direct"] = pd;
        out["density_indirect"] = pi;
        out["distribution_direct"] = fd;
        out["distribution_indirect"] = fi;
        return out;
      },
      py::arg("values"), py::arg("x"), py::arg("z"), py::arg("bandwidths") = py::none(),
      py::arg("delta") = 1.0 / 52.0,
      "Direct and composed two-step transition estimates at (x, z) pairs.");

  m.def(
      "test_statistic",
      [](const std::vector<double>& values, const std::string& statistic,
         const std::optional<py::dict>& bandwidths, double c_scale, bool calibrate,
         std::size_t bootstrap, std::uint64_t seed, double delta) {
        const mg::StatisticKind kind = mg::statistic_from_string(statistic);
        const mg::TripleSample s = triples(values, delta);
        const mg::Bandwidths bw = resolve_bandwidths(s, kind, bandwidths, c_scale);
        mg::StatOptions opts;
        opts.calibrate = calibrate;
        mg::TestReport r;
        {
          py::gil_scoped_release release;
          r = mg::compute_statistic(kind, s, bw, opts);
          if (bootstrap > 0) {
            mg::Path p;
            p.values = values;
            p.delta = delta;
            mg::StatOptions boot = opts;
            boot.calibrate = false;
            const auto res = mg::bootstrap_null(p, kind, bw, bootstrap, seed, boot);
            r.p_bootstrap = mg::bootstrap_pvalue(r.statistic, res.statistics);
          }
        }
        return report_dict(r);
      },
      py::arg("values"), py::arg("statistic") = "t1_star", py::arg("bandwidths") = py::none(),
      py::arg("c_scale") = 1.0, py::arg("calibrate") = true, py::arg("bootstrap") = 0,
      py::arg("seed") = 1, py::arg("delta") = 1.0 / 52.0,
      "Compute a Markov test statistic with asymptotic and optional bootstrap p-values.");

  m.def(
      "fit_ou",
      [](const std::vector<double>& values, double delta) {
        mg::Path p;
        p.values = values;
        p.delta = delta;
        const mg::OuFit f = mg::fit_ou_ls(p);
        py::dict d;
        d["rho_hat"] = f.rho_hat;
        d["intercept"] = f.intercept;
        d["kappa_hat"] = f.kappa_hat;
        d["alpha_hat"] = f.alpha_hat;
        return d;
      },
      py::arg("values"), py::arg("delta") = 1.0 / 52.0);

  m.def("run_experiment", &run_config, py::arg("command"), py::arg("config_json"),
        "Run a size or power experiment from a JSON configuration string.");
  m.def("config_hash", [](const std::string& json) { return mg::config_hash(mg::parse_config(json)); },
        py::arg("config_json"));
}
