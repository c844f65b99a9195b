#include "mfi/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mfi {

namespace {

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorCode::parse, msg); }

template <class T>
T get_req(const json& j, const char* key) {
  if (!j.contains(key)) parse_fail(std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_fail(std::string("bad value for '") + key + "': " + e.what());
  }
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    parse_fail(std::string("bad value for '") + key + "': " + e.what());
  }
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_num(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v))
    parse_fail("cannot parse " + what + " '" + s + "'");
  return v;
}

std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

json plan_to_json(const FrequencyPlan& plan, const json& design_meta) {
  json j;
  j["f1_hz"] = plan.f1();
  j["resolution_hz"] = plan.resolution();
  j["spacings_units"] = plan.spacings();
  j["c_m_per_s"] = plan.c();
  j["c_mode"] = plan.c() == kSpeedOfLightPaper ? "paper-repro"
                : plan.c() == kSpeedOfLight    ? "exact"
                                               : "custom";
  j["N"] = plan.size();
  j["bandwidth_hz"] = plan.bandwidth();
  j["spacing_gcd_units"] = plan.spacing_gcd();
  j["frequencies_hz"] = plan.frequencies();
  j["spacings_hz"] = plan.spacings_hz();
  if (!design_meta.empty()) j["design"] = design_meta;
  return j;
}

FrequencyPlan plan_from_json(const json& j) {
  if (!j.is_object()) parse_fail("plan must be a JSON object");
  const auto f1 = get_req<double>(j, "f1_hz");
  const auto res = get_req<double>(j, "resolution_hz");
  const auto sp = get_req<std::vector<std::int64_t>>(j, "spacings_units");
  double c = kSpeedOfLight;
  if (auto cv = get_opt<double>(j, "c_m_per_s")) c = *cv;
  else if (auto cm = get_opt<std::string>(j, "c_mode")) c = speed_of(parse_c_mode(*cm));
  return FrequencyPlan(f1, res, sp, c);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    parse_fail("'" + path + "': " + e.what());
  }
}

FrequencyPlan read_plan_file(const std::string& path) {
  auto j = read_json_file(path);
  if (j.contains("plan") && j["plan"].is_object()) return plan_from_json(j["plan"]);
  return plan_from_json(j);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

DesignRequest design_request_from_json(const json& j, double c) {
  if (!j.is_object()) parse_fail("design request must be a JSON object");
  DesignRequest r;
  r.method = get_req<std::string>(j, "method");
  r.f1_hz = get_opt<double>(j, "f1_hz");
  r.fN_hz = get_opt<double>(j, "fN_hz");
  r.bandwidth_hz = get_opt<double>(j, "bandwidth_hz");
  r.count = get_opt<int>(j, "count");
  r.resolution_hz = get_opt<double>(j, "resolution_hz");
  r.prime_index = get_opt<int>(j, "prime_index").value_or(1);
  r.umr_requirement_m = get_opt<double>(j, "umr_requirement_m");
  r.seed = get_opt<std::uint64_t>(j, "seed");
  r.c = c;
  if (auto cm = get_opt<std::string>(j, "c_mode")) r.c = speed_of(parse_c_mode(*cm));
  return r;
}

DesignOutcome run_design(const DesignRequest& req) {
  auto need = [&](const auto& opt, const char* name) {
    if (!opt)
      throw Error(ErrorCode::invalid_argument,
                  "method '" + req.method + "' requires " + std::string(name));
    return *opt;
  };
  json meta;
  meta["method"] = req.method;
  if (req.method == "rips") {
    const double f1 = need(req.f1_hz, "f1");
    const double b = need(req.bandwidth_hz, "B");
    const int n = need(req.count, "N");
    auto plan = design_rips(f1, b, n, req.resolution_hz, req.c);
    meta["bandwidth_hz"] = b;
    meta["count"] = n;
    meta["step_hz"] = b / (n - 1);
    return {plan, meta};
  }
  if (req.method == "towers") {
    const double fn = need(req.fN_hz, "fN");
    const double b = need(req.bandwidth_hz, "B");
    const int n = need(req.count, "N");
    const double res = req.resolution_hz.value_or(1.0);
    auto d = design_towers(fn, b, n, res, req.c);
    meta["fN_hz"] = fn;
    meta["bandwidth_hz"] = b;
    meta["count"] = n;
    meta["resolution_hz"] = res;
    meta["max_snap_error_hz"] = d.max_snap_error_hz;
    return {d.plan, meta};
  }
  if (req.method == "constrained-optimal") {
    const double f1 = need(req.f1_hz, "f1");
    const double b = need(req.bandwidth_hz, "B");
    const int n = need(req.count, "N");
    const double res = need(req.resolution_hz, "resolution");
    auto plan = design_constrained_optimal(f1, b, n, res, req.c);
    meta["bandwidth_hz"] = b;
    meta["count"] = n;
    meta["resolution_hz"] = res;
    return {plan, meta};
  }
  if (req.method == "prime-min-error" || req.method == "prime-max-error") {
    DesignParams p;
    p.bandwidth_hz = need(req.bandwidth_hz, "B");
    p.count = need(req.count, "N");
    p.resolution_hz = need(req.resolution_hz, "resolution");
    p.prime_index = req.prime_index;
    p.umr_requirement_m = req.umr_requirement_m;
    const double f1 = need(req.f1_hz, "f1");
    auto d = req.method == "prime-min-error" ? design_prime_min_error(p, f1, req.c)
                                             : design_prime_max_error(p, f1, req.c);
    // (B, N, res, i, K)
    meta["bandwidth_hz"] = p.bandwidth_hz;
    meta["count"] = p.count;
    meta["resolution_hz"] = p.resolution_hz;
    meta["prime_index"] = d.selection.start_index;
    meta["requested_prime_index"] = p.prime_index;
    meta["common_factor"] = d.selection.common_factor;
    meta["primes"] = d.selection.primes;
    meta["prime_sum"] = d.selection.prime_sum;
    if (p.umr_requirement_m) meta["umr_requirement_m"] = *p.umr_requirement_m;
    return {d.plan, meta};
  }
  if (req.method == "random") {
    const double f1 = need(req.f1_hz, "f1");
    const double b = need(req.bandwidth_hz, "B");
    const int n = need(req.count, "N");
    const double res = need(req.resolution_hz, "resolution");
    const auto seed = need(req.seed, "seed");
    auto plan = design_random(f1, b, n, res, seed, req.c);
    meta["bandwidth_hz"] = b;
    meta["count"] = n;
    meta["resolution_hz"] = res;
    meta["seed"] = seed;
    return {plan, meta};
  }
  throw Error(ErrorCode::invalid_argument, "unknown design method '" + req.method + "'");
}

std::vector<ReportRow> report_rows(const AnalysisReport& r) {
  return {
      {"umr_m", format_double(r.umr)},
      {"practical_umr_m", format_double(r.practical_umr)},
      {"epsilon", format_double(r.epsilon)},
      {"sigma_theta_rad", format_double(r.sigma_theta)},
      {"mmse_m2", format_double(r.mmse)},
      {"hmse_m2", format_double(r.hmse)},
      {"crb_m2", format_double(r.crb)},
      {"max_sidelobe", format_double(r.max_sidelobe.value)},
      {"max_sidelobe_location_m", format_double(r.max_sidelobe.location_m)},
      {"coprime", r.coprime ? "true" : "false"},
      {"coincidences", std::to_string(r.coincidence_count)},
  };
}

void write_report_csv(std::ostream& os, const AnalysisReport& r, const FrequencyPlan& plan) {
  os << "metric,value,sigma_theta_rad,snr_db,c_m_per_s,N\n";
  const auto snr = format_double(snr_db_from_sigma_theta(r.sigma_theta));
  for (const auto& row : report_rows(r))
    os << row.metric << ',' << row.value << ',' << format_double(r.sigma_theta) << ',' << snr
       << ',' << format_double(plan.c()) << ',' << plan.size() << '\n';
}

json report_to_json(const AnalysisReport& r, const FrequencyPlan& plan) {
  json j;
  j["umr_m"] = r.umr;
  j["practical_umr_m"] = r.practical_umr;
  j["epsilon"] = r.epsilon;
  j["sigma_theta_rad"] = r.sigma_theta;
  j["snr_db"] = snr_db_from_sigma_theta(r.sigma_theta);
  j["mmse_m2"] = r.mmse;
  j["hmse_m2"] = r.hmse;
  j["crb_m2"] = r.crb;
  j["max_sidelobe"] = r.max_sidelobe.value;
  j["max_sidelobe_location_m"] = r.max_sidelobe.location_m;
  j["coprime"] = r.coprime;
  j["coincidences"] = r.coincidence_count;
  j["c_m_per_s"] = plan.c();
  j["N"] = plan.size();
  return j;
}

void write_curve_csv(std::ostream& os, const std::vector<CurveRow>& rows) {
  os << "label,snr_db,metric,value,stderr,mmse,hmse,crb,trials,seed,pa_bound,bound_applicable,"
        "inlier_value\n";
  for (const auto& r : rows) {
    os << r.label << ',' << format_double(r.snr_db) << ',' << r.metric << ','
       << format_double(r.value) << ',' << format_double(r.std_err) << ','
       << format_double(r.mmse) << ',' << format_double(r.hmse) << ',' << format_double(r.crb)
       << ',' << r.trials << ',' << r.seed << ',' << opt_num(r.pa_bound) << ','
       << (r.bound_applicable ? (*r.bound_applicable ? "true" : "false") : "") << ','
       << opt_num(r.inlier_value) << '\n';
  }
}

json curves_to_json(const std::vector<CurveRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json j;
    j["label"] = r.label;
    j["snr_db"] = r.snr_db;
    j["metric"] = r.metric;
    j["value"] = r.value;
    j["stderr"] = r.std_err;
    j["mmse"] = r.mmse;
    j["hmse"] = r.hmse;
    j["crb"] = r.crb;
    j["trials"] = r.trials;
    j["seed"] = r.seed;
    if (r.pa_bound) j["pa_bound"] = *r.pa_bound;
    if (r.bound_applicable) j["bound_applicable"] = *r.bound_applicable;
    if (r.inlier_value) j["inlier_value"] = *r.inlier_value;
    arr.push_back(std::move(j));
  }
  return arr;
}

void write_histogram_csv(std::ostream& os, const std::vector<HistogramRow>& rows) {
  os << "label,snr_db,bin_lo_m,bin_hi_m,count\n";
  for (const auto& r : rows)
    os << r.label << ',' << format_double(r.snr_db) << ',' << format_double(r.bin_lo_m) << ','
       << format_double(r.bin_hi_m) << ',' << r.count << '\n';
}

json histogram_to_json(const std::vector<HistogramRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back({{"label", r.label},
                   {"snr_db", r.snr_db},
                   {"bin_lo_m", r.bin_lo_m},
                   {"bin_hi_m", r.bin_hi_m},
                   {"count", r.count}});
  return arr;
}

CampaignSpec campaign_from_json(const json& j, const std::string& base_dir,
                                std::optional<CMode> c_mode_override) {
  if (!j.is_object()) parse_fail("campaign config must be a JSON object");
  CampaignSpec s;
  double c = kSpeedOfLight;
  if (auto cm = get_opt<std::string>(j, "c_mode")) c = speed_of(parse_c_mode(*cm));
  if (c_mode_override) c = speed_of(*c_mode_override);

  if (!j.contains("plans") || !j["plans"].is_array()) parse_fail("missing 'plans' array");
  for (const auto& pj : j["plans"]) {
    LabeledPlan lp{get_req<std::string>(pj, "label"), FrequencyPlan(1.0, 1.0, {1})};
    if (pj.contains("plan_file")) {
      std::filesystem::path p = pj["plan_file"].get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      lp.plan = read_plan_file(p.string());
    } else if (pj.contains("design")) {
      lp.plan = run_design(design_request_from_json(pj["design"], c)).plan;
    } else if (pj.contains("plan")) {
      lp.plan = plan_from_json(pj["plan"]);
    } else {
      parse_fail("plan '" + lp.label + "' needs one of plan_file, design, plan");
    }
    s.plans.push_back(std::move(lp));
  }
  s.q0_m = get_req<double>(j, "q0_m");
  s.snr_grid_db = get_req<std::vector<double>>(j, "snr_grid_db");
  const auto trials = get_req<long long>(j, "trials");
  s.trials = trials < 0 ? 0 : static_cast<std::size_t>(trials);
  s.seed = get_opt<std::uint64_t>(j, "seed").value_or(0);
  if (!j.contains("estimator")) parse_fail("missing 'estimator' block");
  const auto& e = j["estimator"];
  s.estimator.search_lo_m = get_req<double>(e, "search_lo_m");
  s.estimator.search_hi_m = get_req<double>(e, "search_hi_m");
  s.estimator.step_m = get_req<double>(e, "step_m");
  s.estimator.refine = get_opt<bool>(e, "refine").value_or(false);
  if (auto nk = get_opt<std::string>(j, "noise")) s.noise_kind = parse_noise_kind(*nk);
  if (auto b = get_opt<std::vector<double>>(j, "bias_rad")) s.bias = *b;
  if (auto outs = get_opt<std::vector<std::string>>(j, "outputs")) {
    s.outputs.clear();
    for (const auto& o : *outs) s.outputs.push_back(parse_metric(o));
  }
  s.histogram_bin_m = get_opt<double>(j, "histogram_bin_m").value_or(1.0);
  return s;
}

PhaseRecordFile parse_phase_record(std::istream& is, const std::optional<FrequencyPlan>& plan) {
  std::map<std::string, std::string> header;
  struct Row {
    std::string id;
    double f;
    double phase;
    std::optional<double> q0;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) header[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      continue;
    }
    auto cols = split(line, ',');
    if (cols.size() >= 1 && cols[0] == "experiment_id") continue;
    if (cols.size() != 3 && cols.size() != 4)
      parse_fail("line " + std::to_string(ln) + ": expected 3 or 4 columns");
    Row r{cols[0], parse_num(cols[1], "freq_hz"), parse_num(cols[2], "phase_rad"), std::nullopt,
          ln};
    if (cols.size() == 4 && !cols[3].empty()) r.q0 = parse_num(cols[3], "q0_m");
    if (r.id.empty()) parse_fail("line " + std::to_string(ln) + ": empty experiment id");
    rows.push_back(std::move(r));
  }

  PhaseRecordFile out;
  if (plan) {
    out.plan = *plan;
  } else if (header.count("f1_hz") && header.count("resolution_hz") && header.count("spacings")) {
    std::vector<std::int64_t> sp;
    std::string s = header["spacings"];
    for (char& ch : s)
      if (ch == ';' || ch == ' ') ch = ',';
    for (auto& tok : split(s, ',')) {
      if (tok.empty()) continue;
      sp.push_back(static_cast<std::int64_t>(parse_num(tok, "spacing")));
    }
    double c = kSpeedOfLight;
    if (header.count("c_m_per_s")) c = parse_num(header["c_m_per_s"], "c_m_per_s");
    else if (header.count("c_mode")) c = speed_of(parse_c_mode(header["c_mode"]));
    out.plan = FrequencyPlan(parse_num(header["f1_hz"], "f1_hz"),
                             parse_num(header["resolution_hz"], "resolution_hz"), sp, c);
  } else {
    parse_fail("phase record has no plan header (f1_hz, resolution_hz, spacings)");
  }
  const auto& p = *out.plan;
  const auto& freqs = p.frequencies();
  const double tol = 1e-6 * p.resolution();

  std::map<std::string, std::size_t> index;
  std::vector<std::vector<char>> seen;
  for (const auto& r : rows) {
    auto it = index.find(r.id);
    if (it == index.end()) {
      it = index.emplace(r.id, out.experiments.size()).first;
      out.experiments.push_back({r.id, std::vector<double>(p.size(), 0.0), std::nullopt});
      seen.emplace_back(p.size(), 0);
    }
    auto& ex = out.experiments[it->second];
    auto& mark = seen[it->second];
    const auto fit = std::lower_bound(freqs.begin(), freqs.end(), r.f - tol);
    if (fit == freqs.end() || std::abs(*fit - r.f) > tol + 1e-12 * r.f)
      parse_fail("line " + std::to_string(r.line) + ": frequency " + format_double(r.f) +
                 " Hz is not in the plan (experiment '" + r.id + "')");
    const auto k = static_cast<std::size_t>(fit - freqs.begin());
    if (mark[k])
      parse_fail("experiment '" + r.id + "' lists frequency " + format_double(r.f) + " twice");
    if (r.phase <= -kPi || r.phase > kPi)
      parse_fail("line " + std::to_string(r.line) + ": phase not in (-pi, pi]");
    mark[k] = 1;
    ex.phases[k] = r.phase;
    if (r.q0) {
      if (ex.q0_m && *ex.q0_m != *r.q0)
        parse_fail("experiment '" + r.id + "' has conflicting q0_m values");
      ex.q0_m = r.q0;
    }
  }
  for (std::size_t e = 0; e < out.experiments.size(); ++e) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (!seen[e][k])
        parse_fail("experiment '" + out.experiments[e].id + "' is missing frequency " +
                   format_double(freqs[k]) + " Hz");
    }
  }
  return out;
}

PhaseRecordFile read_phase_record(const std::string& path,
                                  const std::optional<FrequencyPlan>& plan) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  return parse_phase_record(in, plan);
}

void write_phase_record(std::ostream& os, const FrequencyPlan& plan,
                        const std::vector<PhaseExperiment>& experiments) {
  os << "# f1_hz=" << format_double(plan.f1()) << '\n';
  os << "# resolution_hz=" << format_double(plan.resolution()) << '\n';
  os << "# spacings=";
  for (std::size_t i = 0; i < plan.spacings().size(); ++i)
    os << (i ? ";" : "") << plan.spacings()[i];
  os << '\n';
  os << "# c_m_per_s=" << format_double(plan.c()) << '\n';
  os << "experiment_id,freq_hz,phase_rad,q0_m\n";
  for (const auto& ex : experiments) {
    for (std::size_t k = 0; k < plan.size(); ++k) {
      os << ex.id << ',' << format_double(plan.frequency(k)) << ','
         << format_double(ex.phases.at(k)) << ',' << opt_num(ex.q0_m) << '\n';
    }
  }
}

ReplayResult replay(const PhaseRecordFile& rec, const FrequencyPlan& plan,
                    const EstimatorConfig& cfg, double histogram_bin_m) {
  cfg.validate();
  ReplayResult out;
  std::vector<double> errs;
  double sq = 0.0;
  for (const auto& ex : rec.experiments) {
    PhaseVector ph(ex.phases, plan);
    ReplayRow row;
    row.id = ex.id;
    row.estimate = ls_estimate(ph, plan, cfg);
    row.q0_m = ex.q0_m;
    if (ex.q0_m) {
      row.error_m = row.estimate.q_hat_m - *ex.q0_m;
      row.unwrap_ok = unwrap_ok(row.estimate.q_hat_m, *ex.q0_m, plan);
      errs.push_back(*row.error_m);
      sq += *row.error_m * *row.error_m;
      if (!*row.unwrap_ok) ++out.unwrap_failures;
    }
    out.rows.push_back(std::move(row));
  }
  out.with_truth = errs.size();
  if (!errs.empty()) {
    out.mse = sq / static_cast<double>(errs.size());
    out.histogram = histogram_of(errs, histogram_bin_m, "replay", 0.0);
  }
  return out;
}

void write_replay_csv(std::ostream& os, const ReplayResult& r) {
  os << "experiment_id,q_hat_m,q0_m,error_m,unwrap_ok,cost_at_min,grid_index,refined\n";
  for (const auto& row : r.rows) {
    os << row.id << ',' << format_double(row.estimate.q_hat_m) << ',' << opt_num(row.q0_m) << ','
       << opt_num(row.error_m) << ','
       << (row.unwrap_ok ? (*row.unwrap_ok ? "true" : "false") : "") << ','
       << format_double(row.estimate.cost_at_min) << ',' << row.estimate.grid_index << ','
       << (row.estimate.refined ? "true" : "false") << '\n';
  }
}

json replay_to_json(const ReplayResult& r) {
  json j;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json x;
    x["experiment_id"] = row.id;
    x["q_hat_m"] = row.estimate.q_hat_m;
    x["cost_at_min"] = row.estimate.cost_at_min;
    x["grid_index"] = row.estimate.grid_index;
    x["refined"] = row.estimate.refined;
    if (row.q0_m) x["q0_m"] = *row.q0_m;
    if (row.error_m) x["error_m"] = *row.error_m;
    if (row.unwrap_ok) x["unwrap_ok"] = *row.unwrap_ok;
    rows.push_back(std::move(x));
  }
  j["experiments"] = rows;
  j["with_truth"] = r.with_truth;
  j["unwrap_failures"] = r.unwrap_failures;
  if (r.mse) j["mse_m2"] = *r.mse;
  j["histogram"] = histogram_to_json(r.histogram);
  return j;
}

}  // namespace mfi
