#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "mfi/analysis.hpp"
#include "mfi/design.hpp"
#include "mfi/estimator.hpp"

using namespace mfi;
using V = std::vector<std::int64_t>;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

FrequencyPlan random_plan(std::mt19937_64& g, int n, double c = kSpeedOfLight) {
  std::uniform_int_distribution<std::int64_t> u(1, 40);
  std::uniform_real_distribution<double> f(100e6, 2e9);
  V s(n - 1);
  for (auto& x : s) x = u(g);
  return FrequencyPlan(f(g), 25e3, s, c);
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("umr examples") {
  CHECK(umr(design_rips(400e6, 40e6, 41, std::nullopt, 3e8)) == doctest::Approx(300.0));
  FrequencyPlan k200(410e6, 65, V(30, 200), 3e8);
  CHECK(umr(k200) == doctest::Approx(3e8 / 13000.0));
  CHECK(umr(k200) == doctest::Approx(23076.9).epsilon(1e-5));
  CHECK(umr(FrequencyPlan(400e6, 1e6, {4, 6}, 3e8)) == doctest::Approx(150.0));
}

TEST_CASE("epsilon examples") {
  CHECK(epsilon_of(design_rips(400e6, 40e6, 41)) == 0.0);
  CHECK(epsilon_of(FrequencyPlan(400.1e6, 1e6, V(40, 1))) == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(epsilon_of(FrequencyPlan(105e6, 10e6, V(40, 1))) == doctest::Approx(0.5));
  CHECK(epsilon_of(FrequencyPlan(399.9e6, 1e6, V(3, 1))) == doctest::Approx(-0.1).epsilon(1e-9));
  for (double f1 : {400.2e6, 400.5e6, 400.7e6, 400.49e6}) {
    double e = epsilon_of(FrequencyPlan(f1, 1e6, {1}));
    CHECK(e > -0.5);
    CHECK(e <= 0.5);
  }
}

TEST_CASE("practical UMR") {
  auto r = design_rips(400e6, 40e6, 41, std::nullopt, 3e8);
  CHECK(practical_umr(r) == umr(r));

  DesignParams p{40e6, 41, 65, 1, std::nullopt};
  auto d = design_prime_min_error(p, 400e6, 3e8);
  CHECK(practical_umr(d.plan) == doctest::Approx(23193).epsilon(0.002));

  // two frequencies with eps = 0.5: locate the local minimum of the noise-free cost
  FrequencyPlan two(400.5e6, 1e6, {1}, 3e8);
  CHECK(epsilon_of(two) == 0.5);
  const double pumr = practical_umr(two);
  auto ph = synth_phases(two, 0.0, NoiseModel::noiseless(), RngStream::from_seed(0));
  double best_q = 0, best = 1e300;
  for (double q = 0.001; q < umr(two) + 0.5; q += 0.001) {
    const double s = cost_S(ph, two, q);
    // first dip that reaches a near-zero floor
    if (s < best && q > umr(two) - 5.0) {
      best = s;
      best_q = q;
    }
    if (q > pumr + 0.2 && best < 1e-3) break;
  }
  CHECK(std::abs(best_q - pumr) <= 0.002);
  CHECK(best <= 4 * 2 * kPi * kPi * 0.25 * std::pow(two.bandwidth() / two.f1(), 2));
}

TEST_CASE("P_a bound") {
  auto a = pa_lower_bound(10.0, 1.0, 40, 0.1, 5.0);
  auto b = pa_lower_bound(10.0, 1.0, 40, 0.1, 10.0);
  CHECK(a.value == doctest::Approx(0.308).epsilon(0.002 / 0.308));
  CHECK(b.value == doctest::Approx(0.187).epsilon(0.002 / 0.187));
  CHECK(a.within_validity);
  CHECK(pa_lower_bound(10.0, 1.0, 40, 0.1, 200.0).value < 1e-300);
  CHECK(pa_lower_bound(10.0, 1.0, 40, 0.0, 5.0).value == doctest::Approx(0.5));
  CHECK_FALSE(pa_lower_bound(0.26, 1.0, 40, 0.5, 5.0).within_validity);
  CHECK_FALSE(pa_lower_bound(10.0, 1.0, 40, 0.1, -3.0).within_validity);
  // independent evaluation of the closed form
  const double sig = sigma_theta_from_snr_db(5.0);
  const double w = 2 * kPi * 0.1 / 10.0;
  CHECK(a.value == doctest::Approx(0.5 * (1 - std::erf(std::sqrt(40.0) * w / (2 * std::sqrt(2.0) * sig)))));
}

TEST_CASE("ambiguity function") {
  std::mt19937_64 g(1);
  for (int t = 0; t < 20; ++t) {
    auto p = random_plan(g, 2 + t % 12);
    CHECK(ambiguity_fn(p, 0.0) == doctest::Approx(1.0));
    CHECK(std::abs(ambiguity_fn(p, umr(p)) - 1.0) <= 1e-9);
    double v = ambiguity_fn(p, 0.37 * umr(p));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
  }
  FrequencyPlan two(400e6, 3e6, {1});
  for (double dq : {0.0, 1.0, 7.3, 33.3, 120.0}) {
    const double ref = std::pow(std::cos(kPi * 3e6 * dq / two.c()), 2);
    CHECK(ambiguity_fn(two, dq) == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("sidelobe scan against the Dirichlet kernel") {
  const int n = 21;
  auto p = design_rips(400e6, 20e6, n);
  auto s = sidelobe_scan(p);
  // analytic first sidelobe of |sin(N x) / (N sin x)|^2
  double best = 0;
  for (double x = kPi / n; x < 2 * kPi / n; x += 1e-7) {
    const double d = std::sin(n * x) / (n * std::sin(x));
    best = std::max(best, d * d);
  }
  CHECK(s.value == doctest::Approx(best).epsilon(1e-3));
  CHECK(s.value < 1.0);

  // two frequencies: the window edge holds the cos^2 envelope maximum
  FrequencyPlan two(400e6, 1e6, {1});
  const double u = umr(two);
  auto e = sidelobe_scan(two, u / 2, u / 4000);
  CHECK(e.value == doctest::Approx(0.5).epsilon(1e-6));

  std::mt19937_64 g(2);
  for (int t = 0; t < 5; ++t) {
    auto rp = random_plan(g, 6);
    CHECK(sidelobe_scan(rp).value <= 1.0 + 1e-12);
  }
  CHECK_THROWS_AS(sidelobe_scan(two), Error);
  CHECK_THROWS_AS(sidelobe_scan(p, std::nullopt, 0.0), Error);
}

TEST_CASE("quadform identities") {
  CHECK(quadform(std::vector<double>{3.0, 3.0}) == doctest::Approx(18.0));
  for (int n = 2; n <= 200; ++n) {
    const double d = 1.7;
    std::vector<double> s(n - 1, d);
    const double ref = d * d * n * (double(n) * n - 1) / 12.0;
    REQUIRE(rel(quadform(s), ref) <= 1e-9);
    REQUIRE(rel(quadform_matrix(s), ref) <= 1e-9);
  }
  CHECK(quadform(std::vector<double>{1, 2}) < quadform(std::vector<double>{2, 3}));
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> s(1 + t % 30);
    for (auto& x : s) x = u(g);
    REQUIRE(rel(quadform_matrix(s), quadform(s)) <= 1e-10);
  }
}

TEST_CASE("partial-sum variance of a sequence equals quadform of its left shift") {
  std::mt19937_64 g(12);
  std::uniform_real_distribution<double> u(0.01, 50.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> seq(2 + t % 40);
    for (auto& x : seq) x = u(g);
    long double b = 0, mean = 0;
    std::vector<long double> partial;
    for (double x : seq) partial.push_back(b += x);
    for (auto p : partial) mean += p;
    mean /= partial.size();
    long double var = 0;
    for (auto p : partial) var += (p - mean) * (p - mean);
    var /= partial.size();
    const std::vector<double> shifted(seq.begin() + 1, seq.end());
    // quadform carries the factor N
    REQUIRE(rel(quadform(shifted), static_cast<double>(var * partial.size())) <= 1e-9);
  }
}

TEST_CASE("mmse, hmse and crb") {
  const int n = 21;
  const double b = 20e6;
  auto p = design_rips(400e6, b, n);
  const double sig = 0.2;
  const double c = p.c();
  const double ref = c * c * 12 * sig * sig * (n - 1) / (4 * kPi * kPi * b * b * n * (n + 1.0));
  CHECK(mmse(p, sig) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(mmse(p, 2 * sig) == doctest::Approx(4 * mmse(p, sig)).epsilon(1e-14));

  FrequencyPlan best(400e6, 1e6, permute_min_error(SpacingMultiset({1, 2, 3, 4, 5})));
  FrequencyPlan worst(400e6, 1e6, permute_max_error(SpacingMultiset({1, 2, 3, 4, 5})));
  CHECK(mmse(best, sig) < mmse(worst, sig));

  std::mt19937_64 g(6);
  for (int t = 0; t < 50; ++t) {
    auto rp = random_plan(g, 2 + t % 30);
    CHECK(rel(hmse(rp, sig), crb(rp, std::sqrt(2.0) * sig)) <= 8 * 2.2e-16);
    CHECK(hmse(rp, sig) == crb_phase(rp, sig));
  }
  // near-identical frequencies: 1/N averaging of a single-frequency variance
  FrequencyPlan same(400e6, 1e-3, V(9, 1));
  const double single = std::pow(c * sig / (2 * kPi * 400e6), 2);
  CHECK(hmse(same, sig) == doctest::Approx(single / 10).epsilon(1e-9));
}

TEST_CASE("pdfs") {
  const double c = kSpeedOfLight;
  const double sig = std::sqrt(0.3);
  const double f = 20e6;
  const double sq = c * sig / (2 * kPi * f);
  CHECK(pdf_single(f, 0.0, 0.0, sig) == doctest::Approx(1.0 / (std::sqrt(2 * kPi) * sq)));
  for (double q : {0.1, 1.0, 3.0, -2.0}) CHECK(pdf_single(f, q, 0.0, sig) < pdf_single(f, 0.0, 0.0, sig));
  // pair product is periodic in c / spacing when both frequencies sit on that grid
  const double fa = 400e6, fb = 401e6;
  for (double q : {0.0, 0.05, -0.11, 0.2}) {
    const double base = pdf_pair(fa, fb, q, 0.0, 0.05);
    const double shifted = pdf_pair(fa, fb, q + c / 1e6, 0.0, 0.05);
    CHECK(rel(shifted, base) <= 1e-6);
    CHECK(base == doctest::Approx(pdf_single(fa, q, 0, 0.05) * pdf_single(fb, q, 0, 0.05)));
  }
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> uq(-5, 5);
  for (int t = 0; t < 200; ++t) {
    auto p = random_plan(g, 2 + t % 15);
    const double q = uq(g);
    const double a = pdf_multi(p, q, 0.3, 0.5);
    const double b = pdf_multi_pairwise(p, q, 0.3, 0.5);
    if (a > 0) REQUIRE(rel(b, a) <= 1e-12);
  }
}

TEST_CASE("coprime check") {
  auto r = coprime_check({2, 3, 5}, 1e6, 3e8);
  CHECK(r.coprime);
  CHECK(r.coincidences.empty());
  auto s = coprime_check({2, 4}, 1e6, 3e8);
  CHECK_FALSE(s.coprime);
  REQUIRE(s.coincidences.size() == 1);
  CHECK(s.coincidences[0].dq_m == doctest::Approx(3e8 / 2e6));
  CHECK(coprime_check({7}, 1e6, 3e8).coprime);

  // brute force on rational coincidences below c/gcd
  std::vector<std::int64_t> v{6, 10, 15, 4};
  auto t = coprime_check(v, 1.0, 1.0);
  std::size_t expected = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      for (std::int64_t ka = 1; ka < v[i]; ++ka)
        for (std::int64_t kb = 1; kb < v[j]; ++kb)
          if (ka * v[j] == kb * v[i]) ++expected;
  CHECK_FALSE(t.coprime);
  CHECK(t.coincidences.size() == expected);
  for (const auto& c : t.coincidences) {
    CHECK(c.dq_m == doctest::Approx(double(c.ka) / double(v[c.spacing_a])));
    CHECK(c.dq_m == doctest::Approx(double(c.kb) / double(v[c.spacing_b])));
    CHECK(c.dq_m < 1.0);
  }

  DesignParams p{40e6, 41, 65, 1, std::nullopt};
  CHECK(coprime_check(design_prime_min_error(p, 400e6).plan).coprime);
}

TEST_CASE("analyze report") {
  auto p = design_rips(400e6, 40e6, 41, std::nullopt, 3e8);
  auto r = analyze(p, sigma_theta_from_snr_db(20));
  CHECK(r.umr == doctest::Approx(300.0));
  CHECK(r.hmse == r.crb);
  CHECK(r.epsilon == 0.0);
  CHECK(r.max_sidelobe.value < 1.0);
  CHECK(r.coprime);
}

}  // TEST_SUITE
