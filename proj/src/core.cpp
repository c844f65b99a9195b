#include "mfi/core.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace mfi {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::pool_exhausted: return "pool_exhausted";
    case ErrorCode::off_grid: return "off_grid";
    case ErrorCode::collision: return "collision";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::validation: return "validation";
  }
  return "unknown";
}

double speed_of(CMode mode) {
  return mode == CMode::paper_repro ? kSpeedOfLightPaper : kSpeedOfLight;
}

std::string_view to_string(CMode mode) {
  return mode == CMode::paper_repro ? "paper-repro" : "exact";
}

CMode parse_c_mode(std::string_view s) {
  if (s == "exact") return CMode::exact;
  if (s == "paper-repro" || s == "paper_repro") return CMode::paper_repro;
  throw Error(ErrorCode::invalid_argument, "unknown c-mode '" + std::string(s) + "'");
}

double wrap_phase(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "wrap_phase: non-finite input");
  double r = std::remainder(x, kTwoPi);  // [-pi, pi]
  if (r <= -kPi) r += kTwoPi;
  return r;
}

std::int64_t gcd_of(std::span<const std::int64_t> values) {
  std::int64_t g = 0;
  for (auto v : values) g = std::gcd(g, v);
  return g;
}

FrequencyPlan::FrequencyPlan(double f1_hz, double resolution_hz,
                             std::vector<std::int64_t> spacings, double c)
    : f1_(f1_hz), resolution_(resolution_hz), c_(c), spacings_(std::move(spacings)) {
  if (!(std::isfinite(f1_) && f1_ > 0))
    throw Error(ErrorCode::invalid_argument, "plan: f1 must be finite and > 0");
  if (!(std::isfinite(resolution_) && resolution_ > 0))
    throw Error(ErrorCode::invalid_argument, "plan: resolution must be finite and > 0");
  if (!(std::isfinite(c_) && c_ > 0))
    throw Error(ErrorCode::invalid_argument, "plan: c must be finite and > 0");
  if (spacings_.empty())
    throw Error(ErrorCode::invalid_argument, "plan: need at least one spacing (N >= 2)");
  freqs_.reserve(spacings_.size() + 1);
  freqs_.push_back(f1_);
  std::int64_t acc = 0;
  for (auto k : spacings_) {
    if (k < 1) throw Error(ErrorCode::invalid_argument, "plan: spacings must be >= 1");
    if (acc > (std::int64_t{1} << 52) - k)
      throw Error(ErrorCode::invalid_argument, "plan: span too large for exact grid");
    acc += k;
    freqs_.push_back(f1_ + resolution_ * static_cast<double>(acc));
  }
  for (std::size_t i = 1; i < freqs_.size(); ++i)
    if (!(freqs_[i] > freqs_[i - 1]))
      throw Error(ErrorCode::invalid_argument,
                  "plan: frequencies not strictly increasing in double precision");
  span_units_ = acc;
  gcd_ = gcd_of(spacings_);
}

std::vector<double> FrequencyPlan::spacings_hz() const {
  std::vector<double> out;
  out.reserve(spacings_.size());
  for (auto k : spacings_) out.push_back(resolution_ * static_cast<double>(k));
  return out;
}

std::vector<double> FrequencyPlan::offsets_hz() const {
  std::vector<double> out;
  out.reserve(size());
  std::int64_t acc = 0;
  out.push_back(0.0);
  for (auto k : spacings_) {
    acc += k;
    out.push_back(resolution_ * static_cast<double>(acc));
  }
  return out;
}

FrequencyPlan FrequencyPlan::with_c(double c) const {
  return FrequencyPlan(f1_, resolution_, spacings_, c);
}

std::vector<double> frequencies_of(const FrequencyPlan& plan) { return plan.frequencies(); }
std::int64_t spacing_gcd(const FrequencyPlan& plan) { return plan.spacing_gcd(); }

static void check_wrapped(const std::vector<double>& p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] <= -kPi || p[i] > kPi)
      throw Error(ErrorCode::invalid_argument,
                  "phase " + std::to_string(i) + " not in (-pi, pi]");
  }
}

PhaseVector::PhaseVector(std::vector<double> phases) : phases_(std::move(phases)) {
  check_wrapped(phases_);
}

PhaseVector::PhaseVector(std::vector<double> phases, const FrequencyPlan& plan)
    : phases_(std::move(phases)) {
  if (phases_.size() != plan.size())
    throw Error(ErrorCode::invalid_argument, "phase vector length does not match plan");
  check_wrapped(phases_);
}

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::none: return "none";
    case NoiseKind::phase_gaussian: return "phase-gaussian";
    case NoiseKind::complex_awgn: return "complex-awgn";
  }
  return "none";
}

NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "none") return NoiseKind::none;
  if (s == "phase-gaussian" || s == "phase_gaussian") return NoiseKind::phase_gaussian;
  if (s == "complex-awgn" || s == "complex_awgn") return NoiseKind::complex_awgn;
  throw Error(ErrorCode::invalid_argument, "unknown noise kind '" + std::string(s) + "'");
}

double sigma_theta_from_snr_db(double snr_db) {
  if (!std::isfinite(snr_db)) throw Error(ErrorCode::invalid_argument, "snr_db must be finite");
  return std::sqrt(std::pow(10.0, -snr_db / 10.0) / 2.0);
}

double snr_db_from_sigma_theta(double sigma_theta) {
  if (!(sigma_theta > 0)) throw Error(ErrorCode::invalid_argument, "sigma_theta must be > 0");
  return -10.0 * std::log10(2.0 * sigma_theta * sigma_theta);
}

NoiseModel NoiseModel::from_sigma(NoiseKind kind, double sigma_theta, std::vector<double> bias) {
  if (!(std::isfinite(sigma_theta) && sigma_theta >= 0))
    throw Error(ErrorCode::invalid_argument, "sigma_theta must be finite and >= 0");
  NoiseModel m;
  m.kind = kind;
  m.sigma_theta = kind == NoiseKind::none ? 0.0 : sigma_theta;
  m.bias = std::move(bias);
  return m;
}

NoiseModel NoiseModel::from_snr_db(NoiseKind kind, double snr_db, std::vector<double> bias) {
  return from_sigma(kind, sigma_theta_from_snr_db(snr_db), std::move(bias));
}

PhaseVector synth_phases(const FrequencyPlan& plan, double q0, const NoiseModel& noise,
                         const RngStream& rng) {
  if (!std::isfinite(q0)) throw Error(ErrorCode::invalid_argument, "q0 must be finite");
  const auto n = plan.size();
  if (!noise.bias.empty() && noise.bias.size() != n)
    throw Error(ErrorCode::invalid_argument, "bias vector length does not match plan");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    // reduce in cycles first so large q0 keeps full phase precision
    const double cyc = q0 * plan.frequency(i) / plan.c();
    double x = kTwoPi * (cyc - std::nearbyint(cyc));
    if (noise.kind != NoiseKind::none && noise.sigma_theta > 0) {
      RngStream s = rng.substream(i);
      std::normal_distribution<double> nd(0.0, noise.sigma_theta);
      if (noise.kind == NoiseKind::phase_gaussian) {
        x += nd(s);
      } else {
        const double re = std::cos(x) + nd(s);
        const double im = std::sin(x) + nd(s);
        x = std::atan2(im, re);
      }
    }
    if (!noise.bias.empty()) x += noise.bias[i];
    out[i] = wrap_phase(x);
  }
  return PhaseVector(std::move(out));
}

}  // namespace mfi
