#pragma once

#include <optional>
#include <vector>

#include "mfi/core.hpp"

namespace mfi {

/// c / (gcd * resolution).
double umr(const FrequencyPlan& plan);

/// eps in (-0.5, 0.5] with f1 = (k1 + eps) * gcd_hz.
double epsilon_of(const FrequencyPlan& plan);

/// c/gcd_hz - eps * sum(1/lambda) / sum(1/lambda^2).
double practical_umr(const FrequencyPlan& plan);

struct PaBound {
  double value = 0.0;
  bool within_validity = false;  // f1/B >= 4 and snr_db > 0
};

PaBound pa_lower_bound(double f1_hz, double bandwidth_hz, int count, double epsilon,
                       double snr_db);

/// |sum exp(j 2 pi f_i dq / c)|^2 / N^2.
double ambiguity_fn(const FrequencyPlan& plan, double dq);

struct SidelobePeak {
  double value = 0.0;
  double location_m = 0.0;
};

/// Default mainlobe width: 2c/B, i.e. the scan starts one c/B away from
/// zero, just past the first null of the bandwidth envelope.
double default_mainlobe_width(const FrequencyPlan& plan);
double default_scan_step(const FrequencyPlan& plan);

SidelobePeak sidelobe_scan(const FrequencyPlan& plan,
                           std::optional<double> mainlobe_width_m = std::nullopt,
                           std::optional<double> step_m = std::nullopt);

/// Variance-sum of partial sums b = [0, s1, s1+s2, ...]: sum (b - mean)^2.
double quadform(const std::vector<double>& spacings);
/// Same value through the explicit matrix product.
double quadform_matrix(const std::vector<double>& spacings);
double quadform(const FrequencyPlan& plan);

double mmse(const FrequencyPlan& plan, double sigma_theta);
double hmse(const FrequencyPlan& plan, double sigma_theta);
double crb(const FrequencyPlan& plan, double sigma_n);
/// CRB with sigma_n^2 = 2 sigma_theta^2; bit-identical to hmse.
double crb_phase(const FrequencyPlan& plan, double sigma_theta);

double log_pdf_single(double f_hz, double q, double q0, double sigma_theta, double c);
double pdf_single(double f_hz, double q, double q0, double sigma_theta, double c = kSpeedOfLight);
double pdf_pair(double fa_hz, double fb_hz, double q, double q0, double sigma_theta,
                double c = kSpeedOfLight);
double log_pdf_multi(const FrequencyPlan& plan, double q, double q0, double sigma_theta);
double pdf_multi(const FrequencyPlan& plan, double q, double q0, double sigma_theta);
/// sqrt(prod of adjacent pairs * closing pair (f1, fN)).
double pdf_multi_pairwise(const FrequencyPlan& plan, double q, double q0, double sigma_theta);

struct Coincidence {
  std::size_t spacing_a = 0;  // indices into the spacing list
  std::size_t spacing_b = 0;
  std::int64_t ka = 0;
  std::int64_t kb = 0;
  double dq_m = 0.0;
};

struct CoprimeResult {
  bool coprime = true;
  std::vector<Coincidence> coincidences;
};

CoprimeResult coprime_check(const FrequencyPlan& plan);
/// Works on spacings already divided by their gcd; locations use `gcd_hz`.
CoprimeResult coprime_check(const std::vector<std::int64_t>& normalized, double gcd_hz, double c);

struct AnalysisReport {
  double umr = 0.0;
  double practical_umr = 0.0;
  double epsilon = 0.0;
  double sigma_theta = 0.0;
  double mmse = 0.0;
  double hmse = 0.0;
  double crb = 0.0;
  SidelobePeak max_sidelobe;
  bool coprime = true;
  std::size_t coincidence_count = 0;
};

AnalysisReport analyze(const FrequencyPlan& plan, double sigma_theta,
                       std::optional<double> mainlobe_width_m = std::nullopt,
                       std::optional<double> step_m = std::nullopt);

}  // namespace mfi
