#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfi/analysis.hpp"
#include "mfi/core.hpp"
#include "mfi/estimator.hpp"

namespace mfi {

struct LabeledPlan {
  std::string label;
  FrequencyPlan plan;
};

enum class Metric { mse, pf, pa, histogram };

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view s);

struct CampaignSpec {
  std::vector<LabeledPlan> plans;
  double q0_m = 0.0;
  std::vector<double> snr_grid_db;
  std::size_t trials = 2000;
  std::uint64_t seed = 0;
  EstimatorConfig estimator;
  NoiseKind noise_kind = NoiseKind::phase_gaussian;
  std::vector<double> bias;  // per frequency, optional
  std::vector<Metric> outputs{Metric::mse};
  double histogram_bin_m = 1.0;
  unsigned workers = 0;  // 0: default_workers()

  /// Every violated invariant, in a stable order. Empty when valid.
  std::vector<std::string> errors() const;
  void validate() const;
  bool wants(Metric m) const;
};

struct CurveRow {
  std::string label;
  double snr_db = 0.0;
  std::string metric;
  double value = 0.0;
  double std_err = 0.0;
  double mmse = 0.0;
  double hmse = 0.0;
  double crb = 0.0;
  std::optional<double> pa_bound;
  std::optional<bool> bound_applicable;
  std::optional<double> inlier_value;  // mse over trials with unwrap_ok
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

struct HistogramRow {
  std::string label;
  double snr_db = 0.0;
  double bin_lo_m = 0.0;
  double bin_hi_m = 0.0;
  std::size_t count = 0;
};

struct CampaignResult {
  std::vector<CurveRow> rows;
  std::vector<HistogramRow> histogram;
};

/// Worker count from MFI_WORKERS, else hardware concurrency.
unsigned default_workers();

/// Noise stream for one trial: keyed by (seed, label, snr index, trial).
RngStream trial_stream(std::uint64_t seed, std::string_view label, std::size_t snr_index,
                       std::size_t trial);

/// q_hat - q0 for every trial, in trial order.
std::vector<double> simulate_errors(const FrequencyPlan& plan, std::string_view label,
                                    double q0, std::size_t snr_index, double snr_db,
                                    std::size_t trials, std::uint64_t seed,
                                    const EstimatorConfig& est, NoiseKind kind,
                                    const std::vector<double>& bias = {}, unsigned workers = 0);

CampaignResult run_campaign(const CampaignSpec& spec);
std::vector<CurveRow> run_mse_curve(const CampaignSpec& spec);
std::vector<CurveRow> run_pf_curve(const CampaignSpec& spec);

std::vector<HistogramRow> histogram_of(const std::vector<double>& errors, double bin_m,
                                       std::string_view label, double snr_db);

struct AmbiguitySweep {
  std::vector<double> errors;
  std::vector<HistogramRow> histogram;
  double practical_umr = 0.0;
  double tolerance_m = 0.0;  // lambda_N
  std::size_t near = 0;      // |e| <= lambda_N
  std::size_t far = 0;       // | |e| - P-UMR | <= lambda_N
  std::size_t other = 0;
  double far_mean_abs = 0.0;  // mean |e| over the far cluster
};

AmbiguitySweep run_ambiguity_sweep(const FrequencyPlan& plan, double q0,
                                   const EstimatorConfig& window, double snr_db,
                                   std::size_t trials, std::uint64_t seed,
                                   double histogram_bin_m = 1.0, unsigned workers = 0,
                                   NoiseKind kind = NoiseKind::phase_gaussian);

struct PumrCheck {
  double empirical = 0.0;  // fraction with S(q0 + P-UMR) < S(q0)
  double std_err = 0.0;
  PaBound bound;
  double f1_over_b = 0.0;
  bool bound_applicable = false;
  std::size_t trials = 0;
};

PumrCheck run_pumr_check(const FrequencyPlan& plan, double snr_db, std::size_t trials,
                         std::uint64_t seed, double q0 = 0.0, unsigned workers = 0,
                         NoiseKind kind = NoiseKind::phase_gaussian);

/// SNRs whose mse row is within x2 of MMSE and above 4x CRB.
std::vector<double> detect_mmse_band(const std::vector<CurveRow>& mse_rows);

}  // namespace mfi
