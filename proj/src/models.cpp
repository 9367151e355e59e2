#include "markovgate/models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "markovgate/error.hpp"
#include "markovgate/rng.hpp"

namespace markovgate {

std::string_view to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::ou_null: return "ou_null";
    case ModelVariant::h1_stochastic_level: return "h1_stochastic_level";
    case ModelVariant::h2_stochastic_vol: return "h2_stochastic_vol";
    case ModelVariant::h3_jumps: return "h3_jumps";
  }
  return "unknown";
}

ModelVariant model_from_string(std::string_view text) {
  if (text == "ou_null" || text == "ou") return ModelVariant::ou_null;
  if (text == "h1_stochastic_level" || text == "h1") return ModelVariant::h1_stochastic_level;
  if (text == "h2_stochastic_vol" || text == "h2") return ModelVariant::h2_stochastic_vol;
  if (text == "h3_jumps" || text == "h3") return ModelVariant::h3_jumps;
  throw ConfigError("unknown model '" + std::string(text) + "'");
}

std::string_view to_string(JumpType t) {
  return t == JumpType::gaussian_iid ? "gaussian_iid" : "cir_driven";
}

JumpType jump_type_from_string(std::string_view text) {
  if (text == "gaussian_iid" || text == "i") return JumpType::gaussian_iid;
  if (text == "cir_driven" || text == "ii") return JumpType::cir_driven;
  throw ConfigError("unknown jump type '" + std::string(text) + "'");
}

std::string_view to_string(LatentStart s) {
  return s == LatentStart::long_run_mean ? "long_run_mean" : "null_level";
}

LatentStart latent_start_from_string(std::string_view text) {
  if (text == "long_run_mean") return LatentStart::long_run_mean;
  if (text == "null_level") return LatentStart::null_level;
  throw ConfigError("unknown latent start '" + std::string(text) + "'");
}

void ModelSpec::validate() const {
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in [0, 1]");
  if (!(s_scale > 0.0)) throw ConfigError("s_scale must be positive");
}

double ModelSpec::feller_ratio() const {
  const double kappa2 = kappa / s_scale, b = s_scale * alpha, sigma2 = sigma / 2.0;
  return 2.0 * kappa2 * b / (sigma2 * sigma2);
}

void SimConfig::validate() const {
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  if (n_obs < 12) throw ConfigError("n_obs must be >= 12");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
}

namespace {

// Jump-size CIR parameters for type (ii) jumps.
constexpr double kJumpKappa = 0.2;
constexpr double kJumpLevel = 0.085;
constexpr double kJumpVol = 0.04;

Path make_path(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id) {
  Path p;
  p.delta = c.delta;
  p.model = m;
  p.seed = c.seed;
  p.path_id = path_id;
  p.values.reserve(c.n_obs + 2);
  return p;
}

double stationary_start(const ModelSpec& m, Stream& init) {
  return m.alpha + m.sigma / std::sqrt(2.0 * m.kappa) * init.normal();
}

/// Euler scheme shared by the three alternatives. Each substep advances X
/// with level/volatility set by the model, then the latent factor.
Path simulate_euler(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id) {
  m.validate();
  c.validate();
  Path path = make_path(m, c, path_id);
  Stream dw(c.seed, path_id, Coordinate::diffusion);
  Stream db(c.seed, path_id, Coordinate::latent);
  Stream arrivals(c.seed, path_id, Coordinate::jump_arrival);
  Stream sizes(c.seed, path_id, Coordinate::jump_size);
  Stream init(c.seed, path_id, Coordinate::initial);

  const double dt = c.delta / static_cast<double>(c.substeps);
  const double sqdt = std::sqrt(dt);
  const double s = m.s_scale;
  const double kappa1 = m.kappa / s, level1 = s * m.alpha, vol1 = m.sigma / 2.0;
  const double theta = m.theta;

  double x = stationary_start(m, init);
  double latent = 0.0;
  const bool from_null = c.latent_start == LatentStart::null_level;
  switch (m.variant) {
    case ModelVariant::h1_stochastic_level: latent = from_null ? m.alpha : level1; break;
    case ModelVariant::h2_stochastic_vol: latent = from_null ? m.sigma * m.sigma : level1; break;
    case ModelVariant::h3_jumps: latent = kJumpLevel; break;
    default: break;
  }

  SimDiagnostics& diag = path.diagnostics;
  diag.latent_min = latent;
  diag.jump_size_min = std::numeric_limits<double>::infinity();
  diag.feller_violated = m.variant == ModelVariant::h2_stochastic_vol && m.feller_ratio() < 1.0;
  double latent_sum = 0.0;

  const std::size_t total = c.burn_in + c.n_obs + 2;
  for (std::size_t obs = 0; obs < total; ++obs) {
    if (obs >= c.burn_in) {
      path.values.push_back(x);
      latent_sum += latent;
    }
    if (obs + 1 == total) break;
    for (std::size_t k = 0; k < c.substeps; ++k) {
      switch (m.variant) {
        case ModelVariant::h1_stochastic_level: {
          const double level = theta * latent + (1.0 - theta) * m.alpha;
          x += m.kappa * (level - x) * dt + m.sigma * sqdt * dw.normal();
          latent += kappa1 * (level1 - latent) * dt + vol1 * sqdt * db.normal();
          break;
        }
        case ModelVariant::h2_stochastic_vol: {
          // Full truncation: negative excursions enter drift and diffusion as 0.
          const double yp = std::max(latent, 0.0);
          const double vol = (1.0 - theta) * m.sigma + theta * std::sqrt(yp);
          x += m.kappa * (m.alpha - x) * dt + vol * sqdt * dw.normal();
          latent += kappa1 * (level1 - yp) * dt + vol1 * std::sqrt(yp) * sqdt * db.normal();
          break;
        }
        case ModelVariant::h3_jumps: {
          x += m.kappa * (m.alpha - x) * dt + m.sigma * sqdt * dw.normal();
          const std::uint64_t count = arrivals.poisson(theta * dt);
          for (std::uint64_t j = 0; j < count; ++j) {
            const double size = m.jump_type == JumpType::gaussian_iid ? vol1 * sizes.normal()
                                                                      : std::max(latent, 0.0);
            x += size;
            diag.jump_size_min = std::min(diag.jump_size_min, size);
            if (obs >= c.burn_in) ++diag.jumps;
          }
          if (m.jump_type == JumpType::cir_driven) {
            const double jp = std::max(latent, 0.0);
            latent += kJumpKappa * (kJumpLevel - jp) * dt + kJumpVol * std::sqrt(jp) * sqdt * db.normal();
          }
          break;
        }
        default: throw ConfigError("simulate_euler: variant has no Euler scheme");
      }
      diag.latent_min = std::min(diag.latent_min, latent);
    }
  }
  diag.latent_mean = latent_sum / static_cast<double>(path.values.size());
  return path;
}

}  // namespace

Path simulate_ou_exact(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id) {
  m.validate();
  c.validate();
  if (m.variant != ModelVariant::ou_null) throw ConfigError("simulate_ou_exact needs ou_null");
  Path path = make_path(m, c, path_id);
  Stream dw(c.seed, path_id, Coordinate::diffusion);
  Stream init(c.seed, path_id, Coordinate::initial);
  const double rho = std::exp(-m.kappa * c.delta);
  const double eta = m.sigma * std::sqrt((1.0 - rho * rho) / (2.0 * m.kappa));
  double x = stationary_start(m, init);
  const std::size_t total = c.burn_in + c.n_obs + 2;
  for (std::size_t obs = 0; obs < total; ++obs) {
    if (obs >= c.burn_in) path.values.push_back(x);
    x = m.alpha + (x - m.alpha) * rho + eta * dw.normal();
  }
  return path;
}

Path simulate_h1(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id) {
  if (m.variant != ModelVariant::h1_stochastic_level) throw ConfigError("simulate_h1 needs h1");
  return simulate_euler(m, c, path_id);
}

Path simulate_h2(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id) {
  if (m.variant != ModelVariant::h2_stochastic_vol) throw ConfigError("simulate_h2 needs h2");
  return simulate_euler(m, c, path_id);
}

Path simulate_h3(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id) {
  if (m.variant != ModelVariant::h3_jumps) throw ConfigError("simulate_h3 needs h3");
  return simulate_euler(m, c, path_id);
}

Path simulate(const ModelSpec& m, const SimConfig& c, std::uint64_t path_id) {
  switch (m.variant) {
    case ModelVariant::ou_null: return simulate_ou_exact(m, c, path_id);
    case ModelVariant::h1_stochastic_level: return simulate_h1(m, c, path_id);
    case ModelVariant::h2_stochastic_vol: return simulate_h2(m, c, path_id);
    case ModelVariant::h3_jumps: return simulate_h3(m, c, path_id);
  }
  throw ConfigError("unknown model variant");
}

void write_path_csv(const Path& path, std::ostream& out) {
  out << "index,time,value\n";
  char buf[96];
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i,
                  static_cast<double>(i) * path.delta, path.values[i]);
    out << buf;
  }
}

Path read_path_csv(std::istream& in) {
  Path path;
  std::string line;
  std::vector<double> times;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("index", 0) == 0) continue;
    std::istringstream row(line);
    std::string idx, t, v;
    if (!std::getline(row, idx, ',') || !std::getline(row, t, ',') || !std::getline(row, v, ',')) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected index,time,value");
    }
    try {
      times.push_back(std::stod(t));
      path.values.push_back(std::stod(v));
    } catch (const std::exception&) {
      throw ConfigError("line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (!std::isfinite(path.values.back())) {
      throw ConfigError("line " + std::to_string(line_no) + ": non-finite value");
    }
  }
  if (path.values.size() < 3) throw ConfigError("series needs at least three observations");
  path.delta = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(path.delta > 0.0)) path.delta = 1.0 / 52.0;
  return path;
}

}  // namespace markovgate
