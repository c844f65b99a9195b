#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mfi/core.hpp"

namespace mfi {

struct EstimatorConfig {
  double search_lo_m = 0.0;
  double search_hi_m = 0.0;
  double step_m = 0.001;
  bool refine = false;

  void validate() const;
  std::size_t grid_size() const;
  double grid_point(std::size_t k) const { return search_lo_m + static_cast<double>(k) * step_m; }
  /// Non-empty when step exceeds lambda_N / 4 for this plan.
  std::string step_warning(const FrequencyPlan& plan) const;
};

struct Estimate {
  double q_hat_m = 0.0;
  double cost_at_min = 0.0;
  std::size_t grid_index = 0;
  bool refined = false;
};

/// sum_i wrap(phi_i - 2 pi q f_i / c)^2
double cost_S(const PhaseVector& phases, const FrequencyPlan& plan, double q);

/// |sum_i exp(j(phi_i - 2 pi q f_i / c))|^2 / N^2; larger is better. N >= 2.
double cost_complex(const PhaseVector& phases, const FrequencyPlan& plan, double q);

/// cost_S on every grid point of cfg (chunked, vectorizable kernel).
std::vector<double> cost_grid(const PhaseVector& phases, const FrequencyPlan& plan,
                              const EstimatorConfig& cfg);
std::vector<double> cost_complex_grid(const PhaseVector& phases, const FrequencyPlan& plan,
                                      const EstimatorConfig& cfg);

/// Grid argmin of cost_S, ties to the smallest q; optional 3-point parabolic
/// refinement around the winner.
Estimate ls_estimate(const PhaseVector& phases, const FrequencyPlan& plan,
                     const EstimatorConfig& cfg);

/// |q_hat - q0| <= lambda_N (closed).
bool unwrap_ok(double q_hat, double q0, const FrequencyPlan& plan);

struct CostCurvePoint {
  double q_m = 0.0;
  double cost_s = 0.0;
  double surrogate = 0.0;  // 2 (N - |sum exp(j r_i)|)
};

/// Exact wrapped LS cost next to its small-residual approximation. Reported
/// side by side only.
std::vector<CostCurvePoint> cost_curves(const PhaseVector& phases, const FrequencyPlan& plan,
                                        const EstimatorConfig& cfg);

}  // namespace mfi
