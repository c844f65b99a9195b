#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "mfi/error.hpp"
#include "mfi/rng.hpp"

namespace mfi {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double kSpeedOfLight = 299792458.0;
// rounded constant; the published numeric examples only reproduce with it
inline constexpr double kSpeedOfLightPaper = 3e8;

enum class CMode { exact, paper_repro };

double speed_of(CMode mode);
std::string_view to_string(CMode mode);
CMode parse_c_mode(std::string_view s);

/// Reduce x to (-pi, pi]. wrap(-pi) == pi. Throws on non-finite input.
double wrap_phase(double x);

std::int64_t gcd_of(std::span<const std::int64_t> values);

/// Base frequency plus integer spacings over a resolution grid:
/// f_i = f1 + resolution * (k_1 + ... + k_{i-1}).
class FrequencyPlan {
 public:
  FrequencyPlan(double f1_hz, double resolution_hz,
                std::vector<std::int64_t> spacings, double c = kSpeedOfLight);

  double f1() const noexcept { return f1_; }
  double resolution() const noexcept { return resolution_; }
  double c() const noexcept { return c_; }
  const std::vector<std::int64_t>& spacings() const noexcept { return spacings_; }

  std::size_t size() const noexcept { return freqs_.size(); }
  const std::vector<double>& frequencies() const noexcept { return freqs_; }
  double frequency(std::size_t i) const { return freqs_.at(i); }
  double f_max() const noexcept { return freqs_.back(); }

  std::int64_t span_units() const noexcept { return span_units_; }
  double bandwidth() const noexcept { return resolution_ * static_cast<double>(span_units_); }
  std::vector<double> spacings_hz() const;

  std::int64_t spacing_gcd() const noexcept { return gcd_; }
  double gcd_hz() const noexcept { return resolution_ * static_cast<double>(gcd_); }

  /// Offsets f_i - f1 in Hz, exact multiples of the resolution.
  std::vector<double> offsets_hz() const;

  FrequencyPlan with_c(double c) const;

  bool operator==(const FrequencyPlan& o) const {
    return f1_ == o.f1_ && resolution_ == o.resolution_ && c_ == o.c_ &&
           spacings_ == o.spacings_;
  }

 private:
  double f1_;
  double resolution_;
  double c_;
  std::vector<std::int64_t> spacings_;
  std::vector<double> freqs_;
  std::int64_t span_units_ = 0;
  std::int64_t gcd_ = 0;
};

std::vector<double> frequencies_of(const FrequencyPlan& plan);
std::int64_t spacing_gcd(const FrequencyPlan& plan);

/// Wrapped phase observations, one per plan frequency.
class PhaseVector {
 public:
  PhaseVector() = default;
  explicit PhaseVector(std::vector<double> phases);
  PhaseVector(std::vector<double> phases, const FrequencyPlan& plan);

  std::size_t size() const noexcept { return phases_.size(); }
  const std::vector<double>& values() const noexcept { return phases_; }
  double operator[](std::size_t i) const { return phases_[i]; }

 private:
  std::vector<double> phases_;
};

enum class NoiseKind { none, phase_gaussian, complex_awgn };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view s);

/// SNR = 1 / (2 sigma_theta^2).
double sigma_theta_from_snr_db(double snr_db);
double snr_db_from_sigma_theta(double sigma_theta);

struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  double sigma_theta = 0.0;
  std::vector<double> bias;  // radians per frequency, empty = no bias

  static NoiseModel noiseless() { return {}; }
  static NoiseModel from_sigma(NoiseKind kind, double sigma_theta,
                               std::vector<double> bias = {});
  static NoiseModel from_snr_db(NoiseKind kind, double snr_db,
                                std::vector<double> bias = {});
};

/// phi_i = wrap(2 pi q0 f_i / c + noise_i + bias_i). Frequency i draws from
/// rng.substream(i), so the result does not depend on evaluation order.
PhaseVector synth_phases(const FrequencyPlan& plan, double q0,
                         const NoiseModel& noise, const RngStream& rng);

}  // namespace mfi
