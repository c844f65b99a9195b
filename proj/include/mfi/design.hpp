#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mfi/core.hpp"

namespace mfi {

struct DesignParams {
  double bandwidth_hz = 0.0;
  int count = 0;  // N, number of frequencies
  double resolution_hz = 0.0;
  int prime_index = 1;  // 1-based start into the prime sequence
  std::optional<double> umr_requirement_m;

  void validate() const;
};

/// Ascending list of positive spacings in grid units.
class SpacingMultiset {
 public:
  explicit SpacingMultiset(std::vector<std::int64_t> values);
  const std::vector<std::int64_t>& values() const noexcept { return v_; }
  std::size_t size() const noexcept { return v_.size(); }

 private:
  std::vector<std::int64_t> v_;
};

struct PrimeSelection {
  std::vector<std::int64_t> primes;
  std::int64_t common_factor = 0;  // K
  int start_index = 1;             // index actually used (may exceed the requested one)
  std::int64_t prime_sum = 0;
};

/// Primes in ascending order, first `count` of them, growing the sieve as
/// needed. Throws pool_exhausted beyond an internal cap.
std::vector<std::int64_t> first_primes(std::size_t count);

PrimeSelection prime_window_select(const DesignParams& params, double c = kSpeedOfLight);

enum class MinErrorForm { canonical, mirrored };

/// Arrangement maximizing the partial-sum quadratic form:
/// [a1, a3, a5, ..., a4, a2]; `mirrored` returns the reversed sequence.
std::vector<std::int64_t> permute_min_error(const SpacingMultiset& sorted,
                                            MinErrorForm form = MinErrorForm::canonical);

/// Arrangement minimizing the quadratic form, found exactly.
std::vector<std::int64_t> permute_max_error(const SpacingMultiset& sorted);

/// The mechanical dual of the min-error form: [..., a3, a1, a2, a4, ...].
/// Not always the minimizer.
std::vector<std::int64_t> permute_max_error_dual(const SpacingMultiset& sorted);

/// Exact integer scaled quadform: N * sum(b^2) - (sum b)^2 over partial sums
/// b = [0, s1, s1+s2, ...], N = len(s)+1. Equals N * quadform in grid units.
__int128 scaled_quadform_units(const std::vector<std::int64_t>& spacings);

FrequencyPlan design_rips(double f1_hz, double bandwidth_hz, int count,
                          std::optional<double> resolution_hz = std::nullopt,
                          double c = kSpeedOfLight);

struct TowersDesign {
  FrequencyPlan plan;
  double max_snap_error_hz = 0.0;
};

TowersDesign design_towers(double fN_hz, double bandwidth_hz, int count, double resolution_hz,
                           double c = kSpeedOfLight);

FrequencyPlan design_constrained_optimal(double f1_hz, double bandwidth_hz, int count,
                                         double resolution_hz, double c = kSpeedOfLight);

struct PrimeDesign {
  FrequencyPlan plan;
  PrimeSelection selection;
};

PrimeDesign design_prime_min_error(const DesignParams& params, double f1_hz,
                                   double c = kSpeedOfLight);
PrimeDesign design_prime_max_error(const DesignParams& params, double f1_hz,
                                   double c = kSpeedOfLight);

/// Random baseline: N-1 distinct grid offsets drawn uniformly from
/// 1..floor(B/res) by rejection, sorted; offset 0 is f1.
FrequencyPlan design_random(double f1_hz, double bandwidth_hz, int count, double resolution_hz,
                            std::uint64_t seed, double c = kSpeedOfLight);

}  // namespace mfi
