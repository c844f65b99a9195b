#include "mfi/analysis.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

namespace mfi {

namespace {

double frac_cycles(double cyc) { return cyc - std::nearbyint(cyc); }

double sum_sq_freq(const FrequencyPlan& plan) {
  double s = 0.0;
  for (double f : plan.frequencies()) s += f * f;
  return s;
}

void check_sigma(double s, const char* what) {
  if (!(std::isfinite(s) && s > 0))
    throw Error(ErrorCode::invalid_argument, std::string(what) + " must be finite and > 0");
}

constexpr double kMaxScanPoints = 2e8;

}  // namespace

double umr(const FrequencyPlan& plan) { return plan.c() / plan.gcd_hz(); }

double epsilon_of(const FrequencyPlan& plan) {
  const double x = plan.f1() / plan.gcd_hz();
  double eps = x - std::ceil(x - 0.5);
  if (std::abs(eps) <= 1e-12 * std::max(1.0, x)) eps = 0.0;
  return eps;
}

double practical_umr(const FrequencyPlan& plan) {
  double s1 = 0.0;
  for (double f : plan.frequencies()) s1 += f;
  const double eps = epsilon_of(plan);
  return plan.c() / plan.gcd_hz() - eps * plan.c() * s1 / sum_sq_freq(plan);
}

PaBound pa_lower_bound(double f1_hz, double bandwidth_hz, int count, double epsilon,
                       double snr_db) {
  if (!(f1_hz > 0 && bandwidth_hz > 0) || count < 1)
    throw Error(ErrorCode::invalid_argument, "pa_lower_bound: need f1 > 0, B > 0, N >= 1");
  const double w = kTwoPi * std::abs(epsilon) * bandwidth_hz / f1_hz;
  const double sigma = sigma_theta_from_snr_db(snr_db);
  const double arg = std::sqrt(static_cast<double>(count)) * w / (2.0 * std::sqrt(2.0) * sigma);
  PaBound out;
  out.value = 0.5 * std::erfc(arg);
  out.within_validity = f1_hz / bandwidth_hz >= 4.0 && snr_db > 0.0;
  return out;
}

double ambiguity_fn(const FrequencyPlan& plan, double dq) {
  // |sum e^{j w_i dq}| is unchanged by factoring out e^{j w_1 dq}; offsets
  // from f1 are exact grid multiples and keep the phase small
  double re = 0.0, im = 0.0;
  for (double d : plan.offsets_hz()) {
    const double ph = kTwoPi * frac_cycles(d * dq / plan.c());
    re += std::cos(ph);
    im += std::sin(ph);
  }
  const double n = static_cast<double>(plan.size());
  return std::min(1.0, (re * re + im * im) / (n * n));
}

double default_mainlobe_width(const FrequencyPlan& plan) {
  return 2.0 * plan.c() / plan.bandwidth();
}

double default_scan_step(const FrequencyPlan& plan) {
  return plan.c() / plan.f_max() / 20.0;
}

SidelobePeak sidelobe_scan(const FrequencyPlan& plan, std::optional<double> mainlobe_width_m,
                           std::optional<double> step_m) {
  const double bm = mainlobe_width_m.value_or(default_mainlobe_width(plan));
  const double step = step_m.value_or(default_scan_step(plan));
  if (!(std::isfinite(step) && step > 0))
    throw Error(ErrorCode::invalid_argument, "sidelobe scan step must be > 0");
  if (!(std::isfinite(bm) && bm >= 0))
    throw Error(ErrorCode::invalid_argument, "mainlobe width must be >= 0");
  const double lo = bm / 2.0;
  const double hi = umr(plan) - bm / 2.0;
  if (!(lo < hi)) throw Error(ErrorCode::invalid_argument, "sidelobe scan interval is empty");
  const double npts = std::floor((hi - lo) / step + 1e-9) + 1.0;
  if (npts > kMaxScanPoints)
    throw Error(ErrorCode::invalid_argument,
                "sidelobe scan needs " + std::to_string(static_cast<long long>(npts)) +
                    " points; use a larger step");
  const auto count = static_cast<std::size_t>(npts);

  const auto offs = plan.offsets_hz();
  const std::size_t n = offs.size();
  std::vector<std::complex<double>> rot(n), cur(n);
  auto resync = [&](std::size_t k) {
    const double q = lo + static_cast<double>(k) * step;
    for (std::size_t i = 0; i < n; ++i)
      cur[i] = std::polar(1.0, kTwoPi * frac_cycles(offs[i] * q / plan.c()));
  };
  for (std::size_t i = 0; i < n; ++i)
    rot[i] = std::polar(1.0, kTwoPi * frac_cycles(offs[i] * step / plan.c()));

  const double inv_n2 = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  SidelobePeak best{-1.0, lo};
  for (std::size_t k = 0; k < count; ++k) {
    // phasor recurrence, re-anchored periodically to bound drift
    if (k % 1024 == 0) resync(k);
    std::complex<double> s{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      s += cur[i];
      cur[i] *= rot[i];
    }
    const double v = std::norm(s) * inv_n2;
    if (v > best.value) {
      best.value = v;
      best.location_m = lo + static_cast<double>(k) * step;
    }
  }
  best.value = std::min(1.0, best.value);
  return best;
}

double quadform(const std::vector<double>& spacings) {
  const std::size_t n = spacings.size() + 1;
  std::vector<double> b(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) b[i] = b[i - 1] + spacings[i - 1];
  double mean = 0.0;
  for (double v : b) mean += v;
  mean /= static_cast<double>(n);
  double s = 0.0;
  for (double v : b) s += (v - mean) * (v - mean);
  return s;
}

double quadform_matrix(const std::vector<double>& spacings) {
  const auto m = static_cast<Eigen::Index>(spacings.size());
  const double n = static_cast<double>(spacings.size() + 1);
  Eigen::Map<const Eigen::VectorXd> df(spacings.data(), m);
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Ones(m, m).triangularView<Eigen::Lower>();
  Eigen::VectorXd u = Eigen::VectorXd::Ones(m);
  Eigen::MatrixXd center = Eigen::MatrixXd::Identity(m, m) - u * u.transpose() / n;
  Eigen::VectorXd g = gamma * df;
  return g.dot(center * g);
}

double quadform(const FrequencyPlan& plan) { return quadform(plan.spacings_hz()); }

double mmse(const FrequencyPlan& plan, double sigma_theta) {
  check_sigma(sigma_theta, "sigma_theta");
  const double c = plan.c();
  return c * c * sigma_theta * sigma_theta / (4.0 * kPi * kPi * quadform(plan));
}

namespace {

// c^2 v / (8 pi^2 sum f^2), v the complex-noise variance
double crb_of_variance(const FrequencyPlan& plan, double v) {
  const double c = plan.c();
  return c * c * v / (8.0 * kPi * kPi * sum_sq_freq(plan));
}

}  // namespace

double hmse(const FrequencyPlan& plan, double sigma_theta) {
  check_sigma(sigma_theta, "sigma_theta");
  return crb_of_variance(plan, 2.0 * sigma_theta * sigma_theta);
}

double crb(const FrequencyPlan& plan, double sigma_n) {
  check_sigma(sigma_n, "sigma_n");
  return crb_of_variance(plan, sigma_n * sigma_n);
}

double crb_phase(const FrequencyPlan& plan, double sigma_theta) {
  check_sigma(sigma_theta, "sigma_theta");
  return crb_of_variance(plan, 2.0 * sigma_theta * sigma_theta);
}

double log_pdf_single(double f_hz, double q, double q0, double sigma_theta, double c) {
  check_sigma(sigma_theta, "sigma_theta");
  const double lambda = c / f_hz;
  const double r = lambda * frac_cycles((q - q0) * f_hz / c);
  const double sq = c * sigma_theta / (kTwoPi * f_hz);
  return -0.5 * (r / sq) * (r / sq) - std::log(std::sqrt(kTwoPi) * sq);
}

double pdf_single(double f_hz, double q, double q0, double sigma_theta, double c) {
  return std::exp(log_pdf_single(f_hz, q, q0, sigma_theta, c));
}

double pdf_pair(double fa_hz, double fb_hz, double q, double q0, double sigma_theta, double c) {
  return std::exp(log_pdf_single(fa_hz, q, q0, sigma_theta, c) +
                  log_pdf_single(fb_hz, q, q0, sigma_theta, c));
}

double log_pdf_multi(const FrequencyPlan& plan, double q, double q0, double sigma_theta) {
  double s = 0.0;
  for (double f : plan.frequencies()) s += log_pdf_single(f, q, q0, sigma_theta, plan.c());
  return s;
}

double pdf_multi(const FrequencyPlan& plan, double q, double q0, double sigma_theta) {
  return std::exp(log_pdf_multi(plan, q, q0, sigma_theta));
}

double pdf_multi_pairwise(const FrequencyPlan& plan, double q, double q0, double sigma_theta) {
  const auto& f = plan.frequencies();
  const double c = plan.c();
  auto lp = [&](double a, double b) {
    return log_pdf_single(a, q, q0, sigma_theta, c) + log_pdf_single(b, q, q0, sigma_theta, c);
  };
  double s = lp(f.front(), f.back());
  for (std::size_t k = 0; k + 1 < f.size(); ++k) s += lp(f[k], f[k + 1]);
  return std::exp(0.5 * s);
}

CoprimeResult coprime_check(const std::vector<std::int64_t>& normalized, double gcd_hz,
                            double c) {
  CoprimeResult out;
  for (std::size_t a = 0; a < normalized.size(); ++a) {
    for (std::size_t b = a + 1; b < normalized.size(); ++b) {
      std::int64_t na = normalized[a], nb = normalized[b];
      if (std::gcd(na, nb) == 1) continue;
      out.coprime = false;
      const bool swap = nb < na;
      if (swap) std::swap(na, nb);
      // dq = ka*c/(na*g) = kb*c/(nb*g) below the UMR means ka < na
      for (std::int64_t ka = 1; ka < na; ++ka) {
        if ((ka * nb) % na != 0) continue;
        const std::int64_t kb = ka * nb / na;
        Coincidence co;
        co.spacing_a = a;
        co.spacing_b = b;
        co.ka = swap ? kb : ka;
        co.kb = swap ? ka : kb;
        co.dq_m = static_cast<double>(ka) * c / (static_cast<double>(na) * gcd_hz);
        out.coincidences.push_back(co);
      }
    }
  }
  return out;
}

CoprimeResult coprime_check(const FrequencyPlan& plan) {
  std::vector<std::int64_t> norm;
  for (auto k : plan.spacings()) norm.push_back(k / plan.spacing_gcd());
  return coprime_check(norm, plan.gcd_hz(), plan.c());
}

AnalysisReport analyze(const FrequencyPlan& plan, double sigma_theta,
                       std::optional<double> mainlobe_width_m, std::optional<double> step_m) {
  AnalysisReport r;
  r.umr = umr(plan);
  r.practical_umr = practical_umr(plan);
  r.epsilon = epsilon_of(plan);
  r.sigma_theta = sigma_theta;
  r.mmse = mmse(plan, sigma_theta);
  r.hmse = hmse(plan, sigma_theta);
  r.crb = crb_phase(plan, sigma_theta);
  if (!step_m) {
    // keep the default scan bounded for plans with a very long UMR
    const double bm = mainlobe_width_m.value_or(default_mainlobe_width(plan));
    step_m = std::max(default_scan_step(plan), (r.umr - bm) / 2e7);
  }
  r.max_sidelobe = sidelobe_scan(plan, mainlobe_width_m, step_m);
  auto cp = coprime_check(plan);
  r.coprime = cp.coprime;
  r.coincidence_count = cp.coincidences.size();
  return r;
}

}  // namespace mfi
