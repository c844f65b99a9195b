#include "mfi/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <random>
#include <set>
#include <string>

namespace mfi {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// floor with a small relative slack so exact ratios that land at 199.9999999
// still count as 200
std::int64_t floor_slack(double x) {
  return static_cast<std::int64_t>(std::floor(x + 1e-9 * std::max(1.0, std::abs(x))));
}

void check_count(int n) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "N must be >= 2");
}

void check_positive(double v, const char* what) {
  if (!(std::isfinite(v) && v > 0))
    throw Error(ErrorCode::invalid_argument, std::string(what) + " must be finite and > 0");
}

constexpr std::size_t kSieveCap = std::size_t{1} << 28;

}  // namespace

void DesignParams::validate() const {
  check_positive(bandwidth_hz, "B");
  check_count(count);
  check_positive(resolution_hz, "resolution");
  if (prime_index < 1) throw Error(ErrorCode::invalid_argument, "prime index i must be >= 1");
  if (umr_requirement_m && !(std::isfinite(*umr_requirement_m) && *umr_requirement_m > 0))
    throw Error(ErrorCode::invalid_argument, "UMR requirement must be finite and > 0");
}

SpacingMultiset::SpacingMultiset(std::vector<std::int64_t> values) : v_(std::move(values)) {
  if (v_.empty()) throw Error(ErrorCode::invalid_argument, "empty spacing multiset");
  for (auto k : v_)
    if (k < 1) throw Error(ErrorCode::invalid_argument, "spacings must be >= 1");
  std::stable_sort(v_.begin(), v_.end());
}

std::vector<std::int64_t> first_primes(std::size_t count) {
  static std::mutex mu;
  static std::vector<std::int64_t> cache;
  std::lock_guard lock(mu);
  if (cache.size() < count) {
    double n = std::max<double>(count, 6);
    auto limit = static_cast<std::size_t>(n * (std::log(n) + std::log(std::log(n))) + 16);
    while (true) {
      if (limit > kSieveCap)
        throw Error(ErrorCode::pool_exhausted,
                    "prime pool exhausted: need " + std::to_string(count) +
                        " primes, sieve cap is " + std::to_string(kSieveCap));
      std::vector<bool> composite(limit + 1, false);
      std::vector<std::int64_t> primes;
      for (std::size_t p = 2; p <= limit; ++p) {
        if (composite[p]) continue;
        primes.push_back(static_cast<std::int64_t>(p));
        for (std::size_t m = p * p; m <= limit; m += p) composite[m] = true;
      }
      if (primes.size() >= count) {
        cache = std::move(primes);
        break;
      }
      limit *= 2;
    }
  }
  return {cache.begin(), cache.begin() + static_cast<std::ptrdiff_t>(count)};
}

PrimeSelection prime_window_select(const DesignParams& params, double c) {
  params.validate();
  const auto n = static_cast<std::size_t>(params.count - 1);
  for (std::size_t i = static_cast<std::size_t>(params.prime_index);; ++i) {
    auto pool = first_primes(i - 1 + n);
    PrimeSelection sel;
    sel.primes.assign(pool.begin() + static_cast<std::ptrdiff_t>(i - 1), pool.end());
    for (auto p : sel.primes) sel.prime_sum += p;
    sel.start_index = static_cast<int>(i);
    sel.common_factor =
        floor_slack(params.bandwidth_hz / (params.resolution_hz * static_cast<double>(sel.prime_sum)));
    if (sel.common_factor < 1)
      throw Error(ErrorCode::infeasible,
                  "bandwidth " + num(params.bandwidth_hz) + " Hz too small for prime window at i=" +
                      std::to_string(i) + " (needs >= " +
                      num(params.resolution_hz * static_cast<double>(sel.prime_sum)) + " Hz)");
    if (!params.umr_requirement_m) return sel;
    const double umr = c / (static_cast<double>(sel.common_factor) * params.resolution_hz);
    if (umr > *params.umr_requirement_m) return sel;
  }
}

std::vector<std::int64_t> permute_min_error(const SpacingMultiset& sorted, MinErrorForm form) {
  const auto& a = sorted.values();
  std::vector<std::int64_t> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); i += 2) out.push_back(a[i]);
  for (std::size_t j = a.size(); j-- > 0;)
    if (j % 2 == 1) out.push_back(a[j]);
  if (form == MinErrorForm::mirrored) std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::int64_t> permute_max_error_dual(const SpacingMultiset& sorted) {
  const auto& a = sorted.values();
  std::vector<std::int64_t> out;
  out.reserve(a.size());
  for (std::size_t j = a.size(); j-- > 0;)
    if (j % 2 == 0) out.push_back(a[j]);
  for (std::size_t i = 1; i < a.size(); i += 2) out.push_back(a[i]);
  return out;
}

__int128 scaled_quadform_units(const std::vector<std::int64_t>& s) {
  __int128 b = 0, sum = 0, sumsq = 0;
  for (auto k : s) {
    b += k;
    sum += b;
    sumsq += b * b;
  }
  const __int128 n = static_cast<__int128>(s.size()) + 1;
  return n * sumsq - sum * sum;
}

FrequencyPlan design_rips(double f1_hz, double bandwidth_hz, int count,
                          std::optional<double> resolution_hz, double c) {
  check_positive(f1_hz, "f1");
  check_positive(bandwidth_hz, "B");
  check_count(count);
  const double df = bandwidth_hz / (count - 1);
  const double res = resolution_hz.value_or(df);
  check_positive(res, "resolution");
  const double ratio = df / res;
  const auto k = static_cast<std::int64_t>(std::llround(ratio));
  if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * std::max(1.0, ratio))
    throw Error(ErrorCode::off_grid, "RIPS step B/(N-1) = " + num(df) +
                                         " Hz is not an integer multiple of resolution " +
                                         num(res) + " Hz");
  return FrequencyPlan(f1_hz, res, std::vector<std::int64_t>(count - 1, k), c);
}

TowersDesign design_towers(double fN_hz, double bandwidth_hz, int count, double resolution_hz,
                           double c) {
  check_positive(fN_hz, "fN");
  check_positive(bandwidth_hz, "B");
  check_positive(resolution_hz, "resolution");
  check_count(count);
  if (!(fN_hz > bandwidth_hz)) throw Error(ErrorCode::invalid_argument, "towers needs fN > B");
  const double r = bandwidth_hz / fN_hz;
  std::vector<double> ideal;
  for (int i = 1; i <= count - 1; ++i) ideal.push_back(fN_hz - fN_hz * std::pow(r, i));
  ideal.push_back(fN_hz);
  // f1 rounds up and fN rounds down so the snapped bandwidth never exceeds B
  std::vector<std::int64_t> units(ideal.size());
  for (std::size_t i = 0; i < ideal.size(); ++i) {
    const double u = ideal[i] / resolution_hz;
    if (i == 0) units[i] = static_cast<std::int64_t>(std::ceil(u - 1e-9));
    else if (i + 1 == ideal.size()) units[i] = static_cast<std::int64_t>(std::floor(u + 1e-9));
    else units[i] = std::llround(u);
  }
  TowersDesign out{FrequencyPlan(1.0, 1.0, {1}), 0.0};
  std::vector<std::int64_t> spacings;
  for (std::size_t i = 1; i < units.size(); ++i) {
    if (units[i] <= units[i - 1])
      throw Error(ErrorCode::collision, "towers: frequencies " + std::to_string(i) + " and " +
                                            std::to_string(i + 1) +
                                            " collide on the resolution grid");
    spacings.push_back(units[i] - units[i - 1]);
  }
  out.plan = FrequencyPlan(static_cast<double>(units[0]) * resolution_hz, resolution_hz,
                           std::move(spacings), c);
  for (std::size_t i = 0; i < ideal.size(); ++i)
    out.max_snap_error_hz =
        std::max(out.max_snap_error_hz, std::abs(out.plan.frequency(i) - ideal[i]));
  return out;
}

FrequencyPlan design_constrained_optimal(double f1_hz, double bandwidth_hz, int count,
                                         double resolution_hz, double c) {
  check_positive(f1_hz, "f1");
  check_positive(bandwidth_hz, "B");
  check_positive(resolution_hz, "resolution");
  check_count(count);
  const std::int64_t m = floor_slack(bandwidth_hz / resolution_hz);
  if (m < count - 1)
    throw Error(ErrorCode::infeasible, "constrained-optimal: B/res = " + std::to_string(m) +
                                           " grid units < N-1 = " + std::to_string(count - 1));
  std::vector<std::int64_t> ms(count - 2, 1);
  ms.push_back(m + 2 - count);
  return FrequencyPlan(f1_hz, resolution_hz, permute_min_error(SpacingMultiset(ms)), c);
}

static PrimeDesign prime_design(const DesignParams& params, double f1_hz, double c, bool worst) {
  check_positive(f1_hz, "f1");
  auto sel = prime_window_select(params, c);
  SpacingMultiset ms(sel.primes);
  auto order = worst ? permute_max_error(ms) : permute_min_error(ms);
  for (auto& k : order) k *= sel.common_factor;
  return {FrequencyPlan(f1_hz, params.resolution_hz, std::move(order), c), std::move(sel)};
}

PrimeDesign design_prime_min_error(const DesignParams& params, double f1_hz, double c) {
  return prime_design(params, f1_hz, c, false);
}

PrimeDesign design_prime_max_error(const DesignParams& params, double f1_hz, double c) {
  return prime_design(params, f1_hz, c, true);
}

FrequencyPlan design_random(double f1_hz, double bandwidth_hz, int count, double resolution_hz,
                            std::uint64_t seed, double c) {
  check_positive(f1_hz, "f1");
  check_positive(bandwidth_hz, "B");
  check_positive(resolution_hz, "resolution");
  check_count(count);
  const std::int64_t m = floor_slack(bandwidth_hz / resolution_hz);
  if (m < count - 1)
    throw Error(ErrorCode::infeasible, "random: B/res = " + std::to_string(m) +
                                           " grid units < N-1 = " + std::to_string(count - 1));
  auto rng = RngStream::from_seed(seed).substream(hash_label("design-random"));
  std::uniform_int_distribution<std::int64_t> pick(1, m);
  std::set<std::int64_t> offsets;
  while (offsets.size() < static_cast<std::size_t>(count - 1)) offsets.insert(pick(rng));
  std::vector<std::int64_t> spacings;
  std::int64_t prev = 0;
  for (auto o : offsets) {
    spacings.push_back(o - prev);
    prev = o;
  }
  return FrequencyPlan(f1_hz, resolution_hz, std::move(spacings), c);
}

}  // namespace mfi
