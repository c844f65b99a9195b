#include "mfi/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#ifdef __FAST_MATH__
#error "the grid kernel relies on IEEE rounding; do not build with -ffast-math"
#endif

namespace mfi {

namespace {

constexpr double kTieTol = 1e-12;
constexpr std::size_t kChunk = 4096;
constexpr double kMaxGrid = 1e9;

// round-to-nearest via the 1.5*2^52 trick; vectorizes where nearbyint may not
inline double round_magic(double x) {
  constexpr double m = 6755399441055744.0;
  return (x + m) - m;
}

double frac_cycles(double cyc) { return cyc - std::nearbyint(cyc); }

void check_lengths(const PhaseVector& phases, const FrequencyPlan& plan) {
  if (phases.size() != plan.size())
    throw Error(ErrorCode::invalid_argument, "phase vector length does not match plan");
}

struct GridCoeffs {
  std::vector<double> a;  // cycles at k = 0
  std::vector<double> b;  // cycles per grid step
};

GridCoeffs coeffs(const PhaseVector& phases, const FrequencyPlan& plan,
                  const EstimatorConfig& cfg) {
  GridCoeffs g;
  const auto n = plan.size();
  g.a.resize(n);
  g.b.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = plan.frequency(i);
    g.a[i] = phases[i] / kTwoPi - frac_cycles(f * cfg.search_lo_m / plan.c());
    g.b[i] = f * cfg.step_m / plan.c();
  }
  return g;
}

struct ChunkIndex {
  double v[kChunk];
  ChunkIndex() {
    for (std::size_t j = 0; j < kChunk; ++j) v[j] = static_cast<double>(j);
  }
};

const ChunkIndex kIdx;

template <bool Compensated>
void kernel(const GridCoeffs& g, std::size_t k0, std::size_t len, double* out) {
  double acc[kChunk];
  double comp[kChunk];
  std::fill(acc, acc + len, 0.0);
  if constexpr (Compensated) std::fill(comp, comp + len, 0.0);
  const auto n = g.a.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = g.a[i] - g.b[i] * static_cast<double>(k0);
    const double b = g.b[i];
    for (std::size_t j = 0; j < len; ++j) {
      const double x = a - b * kIdx.v[j];
      const double r = x - round_magic(x);
      if constexpr (Compensated) {
        const double y = r * r - comp[j];
        const double t = acc[j] + y;
        comp[j] = (t - acc[j]) - y;
        acc[j] = t;
      } else {
        acc[j] += r * r;
      }
    }
  }
  constexpr double scale = 4.0 * kPi * kPi;
  for (std::size_t j = 0; j < len; ++j) out[j] = scale * acc[j];
}

}  // namespace

void EstimatorConfig::validate() const {
  if (!(std::isfinite(search_lo_m) && std::isfinite(search_hi_m)))
    throw Error(ErrorCode::invalid_argument, "search interval must be finite");
  if (!(std::isfinite(step_m) && step_m > 0))
    throw Error(ErrorCode::invalid_argument, "grid step must be > 0");
  if (!(search_lo_m < search_hi_m))
    throw Error(ErrorCode::invalid_argument, "search_lo must be < search_hi");
  if (search_hi_m - search_lo_m < step_m)
    throw Error(ErrorCode::invalid_argument, "search interval narrower than one grid step");
  if ((search_hi_m - search_lo_m) / step_m > kMaxGrid)
    throw Error(ErrorCode::invalid_argument, "search grid too large (> 1e9 points)");
}

std::size_t EstimatorConfig::grid_size() const {
  return static_cast<std::size_t>(std::floor((search_hi_m - search_lo_m) / step_m + 1e-9)) + 1;
}

std::string EstimatorConfig::step_warning(const FrequencyPlan& plan) const {
  const double lim = plan.c() / plan.f_max() / 4.0;
  if (step_m > lim)
    return "grid step " + std::to_string(step_m) + " m exceeds lambda_N/4 = " +
           std::to_string(lim) + " m; minima may be missed";
  return {};
}

double cost_S(const PhaseVector& phases, const FrequencyPlan& plan, double q) {
  check_lengths(phases, plan);
  const auto n = plan.size();
  double s = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cyc = q * plan.frequency(i) / plan.c();
    const double r = wrap_phase(phases[i] - kTwoPi * frac_cycles(cyc));
    const double term = r * r;
    if (n > 1000) {
      const double y = term - comp;
      const double t = s + y;
      comp = (t - s) - y;
      s = t;
    } else {
      s += term;
    }
  }
  return s;
}

double cost_complex(const PhaseVector& phases, const FrequencyPlan& plan, double q) {
  check_lengths(phases, plan);
  if (plan.size() < 2)
    throw Error(ErrorCode::invalid_argument, "cost_complex is degenerate for N = 1");
  std::complex<double> s{0.0, 0.0};
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const double cyc = q * plan.frequency(i) / plan.c();
    s += std::polar(1.0, phases[i] - kTwoPi * frac_cycles(cyc));
  }
  const double n = static_cast<double>(plan.size());
  return std::min(1.0, std::norm(s) / (n * n));
}

std::vector<double> cost_grid(const PhaseVector& phases, const FrequencyPlan& plan,
                              const EstimatorConfig& cfg) {
  check_lengths(phases, plan);
  cfg.validate();
  const auto count = cfg.grid_size();
  const auto g = coeffs(phases, plan, cfg);
  std::vector<double> out(count);
  for (std::size_t k0 = 0; k0 < count; k0 += kChunk) {
    const auto len = std::min(kChunk, count - k0);
    if (plan.size() > 1000)
      kernel<true>(g, k0, len, out.data() + k0);
    else
      kernel<false>(g, k0, len, out.data() + k0);
  }
  return out;
}

std::vector<double> cost_complex_grid(const PhaseVector& phases, const FrequencyPlan& plan,
                                      const EstimatorConfig& cfg) {
  cfg.validate();
  const auto count = cfg.grid_size();
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = cost_complex(phases, plan, cfg.grid_point(k));
  return out;
}

Estimate ls_estimate(const PhaseVector& phases, const FrequencyPlan& plan,
                     const EstimatorConfig& cfg) {
  const auto costs = cost_grid(phases, plan, cfg);
  const double m = *std::min_element(costs.begin(), costs.end());
  std::size_t k = 0;
  while (costs[k] > m + kTieTol) ++k;

  Estimate e;
  e.grid_index = k;
  e.q_hat_m = cfg.grid_point(k);
  e.cost_at_min = cost_S(phases, plan, e.q_hat_m);
  if (cfg.refine && k > 0 && k + 1 < costs.size()) {
    const double cm = cost_S(phases, plan, cfg.grid_point(k - 1));
    const double cp = cost_S(phases, plan, cfg.grid_point(k + 1));
    const double den = cm - 2.0 * e.cost_at_min + cp;
    if (den > 0) {
      const double d = std::clamp(0.5 * (cm - cp) / den, -0.5, 0.5);
      const double q = std::clamp(e.q_hat_m + d * cfg.step_m, cfg.search_lo_m, cfg.search_hi_m);
      const double cq = cost_S(phases, plan, q);
      // a wrap kink inside the bracket can make the parabola lie
      if (cq <= e.cost_at_min) {
        e.q_hat_m = q;
        e.cost_at_min = cq;
        e.refined = true;
      }
    }
  }
  return e;
}

bool unwrap_ok(double q_hat, double q0, const FrequencyPlan& plan) {
  return std::abs(q_hat - q0) <= plan.c() / plan.f_max();
}

std::vector<CostCurvePoint> cost_curves(const PhaseVector& phases, const FrequencyPlan& plan,
                                        const EstimatorConfig& cfg) {
  cfg.validate();
  check_lengths(phases, plan);
  const auto count = cfg.grid_size();
  std::vector<CostCurvePoint> out;
  out.reserve(count);
  const double n = static_cast<double>(plan.size());
  for (std::size_t k = 0; k < count; ++k) {
    const double q = cfg.grid_point(k);
    CostCurvePoint p;
    p.q_m = q;
    p.cost_s = cost_S(phases, plan, q);
    p.surrogate = 2.0 * (n - n * std::sqrt(cost_complex(phases, plan, q)));
    out.push_back(p);
  }
  return out;
}

}  // namespace mfi
