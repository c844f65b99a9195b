#include "mfi/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <thread>

namespace mfi {

namespace {

template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

struct Moments {
  double mean = 0.0;
  double std_err = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.std_err = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return m;
}

NoiseModel noise_for(NoiseKind kind, double snr_db, const std::vector<double>& bias) {
  return NoiseModel::from_snr_db(kind, snr_db, bias);
}

}  // namespace

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::mse: return "mse";
    case Metric::pf: return "pf";
    case Metric::pa: return "pa";
    case Metric::histogram: return "histogram";
  }
  return "mse";
}

Metric parse_metric(std::string_view s) {
  if (s == "mse") return Metric::mse;
  if (s == "pf") return Metric::pf;
  if (s == "pa") return Metric::pa;
  if (s == "histogram") return Metric::histogram;
  throw Error(ErrorCode::invalid_argument, "unknown metric '" + std::string(s) + "'");
}

std::vector<std::string> CampaignSpec::errors() const {
  std::vector<std::string> e;
  if (plans.empty()) e.push_back("at least one plan is required");
  std::set<std::string> seen;
  for (const auto& p : plans) {
    if (p.label.empty()) e.push_back("plan label must be non-empty");
    else if (!seen.insert(p.label).second) e.push_back("duplicate plan label '" + p.label + "'");
    if (!bias.empty() && bias.size() != p.plan.size())
      e.push_back("bias length " + std::to_string(bias.size()) + " does not match plan '" +
                  p.label + "' with N = " + std::to_string(p.plan.size()));
  }
  if (!std::isfinite(q0_m)) e.push_back("q0 must be finite");
  if (snr_grid_db.empty()) e.push_back("snr grid must be non-empty");
  for (double s : snr_grid_db)
    if (!std::isfinite(s)) e.push_back("snr grid entries must be finite");
  if (trials < 1) e.push_back("trials must be >= 1");
  try {
    estimator.validate();
  } catch (const Error& err) {
    e.push_back(std::string("estimator: ") + err.what());
  }
  if (outputs.empty()) e.push_back("at least one output metric is required");
  if (!(std::isfinite(histogram_bin_m) && histogram_bin_m > 0))
    e.push_back("histogram bin must be > 0");
  return e;
}

void CampaignSpec::validate() const {
  auto e = errors();
  if (e.empty()) return;
  std::string msg = "campaign spec invalid: ";
  for (std::size_t i = 0; i < e.size(); ++i) msg += (i ? "; " : "") + e[i];
  throw Error(ErrorCode::validation, msg);
}

bool CampaignSpec::wants(Metric m) const {
  return std::find(outputs.begin(), outputs.end(), m) != outputs.end();
}

unsigned default_workers() {
  if (const char* env = std::getenv("MFI_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RngStream trial_stream(std::uint64_t seed, std::string_view label, std::size_t snr_index,
                       std::size_t trial) {
  return RngStream::from_seed(seed)
      .substream(hash_label(label))
      .substream(snr_index)
      .substream(trial);
}

std::vector<double> simulate_errors(const FrequencyPlan& plan, std::string_view label,
                                    double q0, std::size_t snr_index, double snr_db,
                                    std::size_t trials, std::uint64_t seed,
                                    const EstimatorConfig& est, NoiseKind kind,
                                    const std::vector<double>& bias, unsigned workers) {
  est.validate();
  const auto noise = noise_for(kind, snr_db, bias);
  std::vector<double> err(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    auto ph = synth_phases(plan, q0, noise, trial_stream(seed, label, snr_index, t));
    err[t] = ls_estimate(ph, plan, est).q_hat_m - q0;
  });
  return err;
}

std::vector<HistogramRow> histogram_of(const std::vector<double>& errors, double bin_m,
                                       std::string_view label, double snr_db) {
  if (!(bin_m > 0) || !std::isfinite(bin_m))
    throw Error(ErrorCode::invalid_argument, "histogram bin width must be > 0");
  std::map<std::int64_t, std::size_t> bins;
  for (double e : errors) ++bins[static_cast<std::int64_t>(std::floor(e / bin_m))];
  std::vector<HistogramRow> out;
  for (auto [k, n] : bins) {
    HistogramRow r;
    r.label = std::string(label);
    r.snr_db = snr_db;
    r.bin_lo_m = static_cast<double>(k) * bin_m;
    r.bin_hi_m = static_cast<double>(k + 1) * bin_m;
    r.count = n;
    out.push_back(std::move(r));
  }
  return out;
}

static std::vector<char> pa_flags(const FrequencyPlan& plan, double q0, std::size_t snr_index,
                                  double snr_db, std::size_t trials, std::uint64_t seed,
                                  std::string_view label, NoiseKind kind,
                                  const std::vector<double>& bias, unsigned workers) {
  const auto noise = noise_for(kind, snr_db, bias);
  const double far = q0 + practical_umr(plan);
  std::vector<char> hit(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    auto ph = synth_phases(plan, q0, noise, trial_stream(seed, label, snr_index, t));
    const double s_far = cost_S(ph, plan, far);
    const double s_0 = cost_S(ph, plan, q0);
    // half-units: a numerical tie counts as half a hit
    const double tol = 1e-10 * (s_far + s_0) + 1e-15;
    hit[t] = std::abs(s_far - s_0) <= tol ? 1 : (s_far < s_0 ? 2 : 0);
  });
  return hit;
}

static double hit_rate(const std::vector<char>& hit) {
  std::size_t n = 0;
  for (char h : hit) n += static_cast<std::size_t>(h);
  return 0.5 * static_cast<double>(n) / static_cast<double>(hit.size());
}

CampaignResult run_campaign(const CampaignSpec& spec) {
  spec.validate();
  CampaignResult res;
  const bool need_errors = spec.wants(Metric::mse) || spec.wants(Metric::pf) ||
                           spec.wants(Metric::histogram);
  for (const auto& lp : spec.plans) {
    const auto& plan = lp.plan;
    const double lam_n = plan.c() / plan.f_max();
    for (std::size_t s = 0; s < spec.snr_grid_db.size(); ++s) {
      const double snr = spec.snr_grid_db[s];
      const double sig = sigma_theta_from_snr_db(snr);
      CurveRow base;
      base.label = lp.label;
      base.snr_db = snr;
      base.mmse = mmse(plan, sig);
      base.hmse = hmse(plan, sig);
      base.crb = crb_phase(plan, sig);
      base.trials = spec.trials;
      base.seed = spec.seed;

      if (need_errors) {
        const auto err = simulate_errors(plan, lp.label, spec.q0_m, s, snr, spec.trials,
                                         spec.seed, spec.estimator, spec.noise_kind, spec.bias,
                                         spec.workers);
        std::vector<double> sq, inl, fail;
        sq.reserve(err.size());
        for (double e : err) {
          sq.push_back(e * e);
          const bool ok = std::abs(e) <= lam_n;
          if (ok) inl.push_back(e * e);
          fail.push_back(ok ? 0.0 : 1.0);
        }
        if (spec.wants(Metric::mse)) {
          auto r = base;
          r.metric = "mse";
          const auto m = moments(sq);
          r.value = m.mean;
          r.std_err = m.std_err;
          if (!inl.empty()) r.inlier_value = moments(inl).mean;
          res.rows.push_back(std::move(r));
        }
        if (spec.wants(Metric::pf)) {
          auto r = base;
          r.metric = "pf";
          const auto m = moments(fail);
          r.value = m.mean;
          r.std_err =
              std::sqrt(m.mean * (1.0 - m.mean) / static_cast<double>(spec.trials));
          res.rows.push_back(std::move(r));
        }
        if (spec.wants(Metric::histogram)) {
          auto h = histogram_of(err, spec.histogram_bin_m, lp.label, snr);
          res.histogram.insert(res.histogram.end(), h.begin(), h.end());
        }
      }
      if (spec.wants(Metric::pa)) {
        const auto hit = pa_flags(plan, spec.q0_m, s, snr, spec.trials, spec.seed, lp.label,
                                  spec.noise_kind, spec.bias, spec.workers);
        auto r = base;
        r.metric = "pa";
        r.value = hit_rate(hit);
        r.std_err = std::sqrt(r.value * (1.0 - r.value) / static_cast<double>(spec.trials));
        const auto b = pa_lower_bound(plan.f1(), plan.bandwidth(), static_cast<int>(plan.size()),
                                      epsilon_of(plan), snr);
        r.pa_bound = b.value;
        r.bound_applicable = b.within_validity;
        res.rows.push_back(std::move(r));
      }
    }
  }
  return res;
}

std::vector<CurveRow> run_mse_curve(const CampaignSpec& spec) {
  auto s = spec;
  s.outputs = {Metric::mse};
  return run_campaign(s).rows;
}

std::vector<CurveRow> run_pf_curve(const CampaignSpec& spec) {
  auto s = spec;
  s.outputs = {Metric::pf};
  return run_campaign(s).rows;
}

AmbiguitySweep run_ambiguity_sweep(const FrequencyPlan& plan, double q0,
                                   const EstimatorConfig& window, double snr_db,
                                   std::size_t trials, std::uint64_t seed, double histogram_bin_m,
                                   unsigned workers, NoiseKind kind) {
  if (trials < 1) throw Error(ErrorCode::invalid_argument, "trials must be >= 1");
  AmbiguitySweep out;
  out.practical_umr = practical_umr(plan);
  out.tolerance_m = plan.c() / plan.f_max();
  out.errors =
      simulate_errors(plan, "ambiguity-sweep", q0, 0, snr_db, trials, seed, window, kind, {},
                      workers);
  out.histogram = histogram_of(out.errors, histogram_bin_m, "ambiguity-sweep", snr_db);
  double far_sum = 0.0;
  for (double e : out.errors) {
    if (std::abs(e) <= out.tolerance_m) {
      ++out.near;
    } else if (std::abs(std::abs(e) - out.practical_umr) <= out.tolerance_m) {
      ++out.far;
      far_sum += std::abs(e);
    } else {
      ++out.other;
    }
  }
  if (out.far) out.far_mean_abs = far_sum / static_cast<double>(out.far);
  return out;
}

PumrCheck run_pumr_check(const FrequencyPlan& plan, double snr_db, std::size_t trials,
                         std::uint64_t seed, double q0, unsigned workers, NoiseKind kind) {
  if (trials < 1) throw Error(ErrorCode::invalid_argument, "trials must be >= 1");
  PumrCheck out;
  const auto hit = pa_flags(plan, q0, 0, snr_db, trials, seed, "pumr-check", kind, {}, workers);
  out.trials = trials;
  out.empirical = hit_rate(hit);
  out.std_err = std::sqrt(out.empirical * (1.0 - out.empirical) / static_cast<double>(trials));
  out.bound = pa_lower_bound(plan.f1(), plan.bandwidth(), static_cast<int>(plan.size()),
                             epsilon_of(plan), snr_db);
  out.f1_over_b = plan.f1() / plan.bandwidth();
  out.bound_applicable = out.bound.within_validity;
  return out;
}

std::vector<double> detect_mmse_band(const std::vector<CurveRow>& rows) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.metric != "mse") continue;
    if (r.value <= 2.0 * r.mmse && r.value >= 0.5 * r.mmse && r.value > 4.0 * r.crb)
      out.push_back(r.snr_db);
  }
  return out;
}

}  // namespace mfi
