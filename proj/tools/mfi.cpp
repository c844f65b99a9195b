// mfi: design, analyze, estimate, simulate, replay (and synth for test records)

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mfi/io.hpp"

namespace fs = std::filesystem;
using namespace mfi;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::string c_mode = "exact";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "structured config file (JSON)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--c-mode", c.c_mode, "exact or paper-repro")
      ->check(CLI::IsMember({"exact", "paper-repro"}));
}

// write to <out>/<name> or stdout when no out dir was given
void emit(const Common& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + c.out + "'");
  const auto path = (fs::path(c.out) / name).string();
  write_text_file(path, text);
  std::cerr << "wrote " << path << '\n';
}

std::string ext(const Common& c) { return c.format == "json" ? ".json" : ".csv"; }

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::string tok;
  std::istringstream ss(s);
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size() && tok.find_first_not_of(" ", pos) != std::string::npos)
        throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::parse, "cannot parse number '" + tok + "'");
    }
  }
  return out;
}

double pick_sigma(std::optional<double> snr, std::optional<double> sigma) {
  if (snr && sigma) throw Error(ErrorCode::invalid_argument, "give --snr or --sigma, not both");
  if (sigma) return *sigma;
  return sigma_theta_from_snr_db(snr.value_or(20.0));
}

std::string report_text(const Common& c, const AnalysisReport& r, const FrequencyPlan& plan) {
  if (c.format == "json") return report_to_json(r, plan).dump(2) + "\n";
  std::ostringstream os;
  write_report_csv(os, r, plan);
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-frequency interferometric ranging: pattern design and analysis"};
  app.require_subcommand(1);

  // design
  Common dc;
  DesignRequest dreq;
  std::optional<double> d_f1, d_fn, d_b, d_res, d_umr, d_snr, d_sigma;
  std::optional<int> d_n;
  std::optional<int> d_i;
  std::string d_method;
  auto* design = app.add_subcommand("design", "generate a frequency plan and its report");
  add_common(design, dc);
  design->add_option("--method", d_method, "rips|towers|constrained-optimal|prime-min-error|prime-max-error|random");
  design->add_option("--f1", d_f1, "base frequency, Hz");
  design->add_option("--fN", d_fn, "top frequency, Hz (towers)");
  design->add_option("--B", d_b, "bandwidth budget, Hz");
  design->add_option("--N", d_n, "frequency count");
  design->add_option("--res", d_res, "grid resolution, Hz");
  design->add_option("--i", d_i, "1-based prime start index");
  design->add_option("--umr-req", d_umr, "UMR requirement, m");
  design->add_option("--snr", d_snr, "SNR for the report, dB (default 20)");
  design->add_option("--sigma", d_sigma, "phase noise std for the report, rad");

  // analyze
  Common ac;
  std::string a_plan;
  std::optional<double> a_snr, a_sigma, a_bm, a_step;
  auto* analyze_cmd = app.add_subcommand("analyze", "closed-form report for a plan file");
  add_common(analyze_cmd, ac);
  analyze_cmd->add_option("--plan", a_plan, "plan file (JSON)");
  analyze_cmd->add_option("--snr", a_snr, "SNR, dB (default 20)");
  analyze_cmd->add_option("--sigma", a_sigma, "phase noise std, rad");
  analyze_cmd->add_option("--mainlobe-m", a_bm, "mainlobe width for the sidelobe scan, m");
  analyze_cmd->add_option("--scan-step-m", a_step, "sidelobe scan step, m");

  // estimate
  Common ec;
  std::string e_plan, e_phases;
  std::optional<double> e_lo, e_hi, e_step;
  bool e_refine = false;
  auto* estimate = app.add_subcommand("estimate", "LS range estimate from one phase vector");
  add_common(estimate, ec);
  estimate->add_option("--plan", e_plan, "plan file (JSON)");
  estimate->add_option("--phases", e_phases, "comma-separated wrapped phases, rad");
  estimate->add_option("--lo", e_lo, "search lower bound, m");
  estimate->add_option("--hi", e_hi, "search upper bound, m");
  estimate->add_option("--step", e_step, "grid step, m");
  estimate->add_flag("--refine", e_refine, "parabolic refinement");

  // simulate
  Common sc;
  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo campaign");
  add_common(simulate, sc);

  // replay
  Common rc;
  std::string r_record, r_plan;
  std::optional<double> r_lo, r_hi, r_step;
  double r_bin = 1.0;
  bool r_refine = false;
  auto* replay_cmd = app.add_subcommand("replay", "estimate every experiment of a phase record");
  add_common(replay_cmd, rc);
  replay_cmd->add_option("--record", r_record, "phase record file");
  replay_cmd->add_option("--plan", r_plan, "plan file overriding the record header");
  replay_cmd->add_option("--lo", r_lo, "search lower bound, m");
  replay_cmd->add_option("--hi", r_hi, "search upper bound, m");
  replay_cmd->add_option("--step", r_step, "grid step, m");
  replay_cmd->add_option("--hist-bin", r_bin, "histogram bin, m");
  replay_cmd->add_flag("--refine", r_refine, "parabolic refinement");

  // synth
  Common yc;
  std::string y_plan, y_noise = "phase-gaussian", y_bias;
  double y_q0 = 0.0;
  std::optional<double> y_snr;
  int y_count = 1;
  auto* synth = app.add_subcommand("synth", "write a synthetic phase record");
  add_common(synth, yc);
  synth->add_option("--plan", y_plan, "plan file (JSON)")->required();
  synth->add_option("--q0", y_q0, "true range, m");
  synth->add_option("--snr", y_snr, "SNR, dB (omit for noise-free)");
  synth->add_option("--noise", y_noise, "phase-gaussian|complex-awgn");
  synth->add_option("--bias", y_bias, "comma-separated per-frequency bias, rad");
  synth->add_option("--experiments", y_count, "number of experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& ch : msg)
      if (ch == '\n') ch = ' ';
    std::cerr << "error: usage: " << msg << '\n';
    return 2;
  }

  try {
    if (design->parsed()) {
      const double c = speed_of(parse_c_mode(dc.c_mode));
      const bool flags = !d_method.empty() || d_f1 || d_fn || d_b || d_n || d_res || d_i || d_umr;
      double sigma = 0.0;
      if (!dc.config.empty()) {
        if (flags) throw Error(ErrorCode::invalid_argument, "use --config or design flags, not both");
        auto j = read_json_file(dc.config);
        dreq = design_request_from_json(j, c);
        std::optional<double> snr = d_snr, sig = d_sigma;
        if (!snr && j.contains("snr_db")) snr = j["snr_db"].get<double>();
        if (!sig && j.contains("sigma_theta_rad")) sig = j["sigma_theta_rad"].get<double>();
        sigma = pick_sigma(snr, sig);
      } else {
        if (d_method.empty()) throw Error(ErrorCode::invalid_argument, "--method is required");
        dreq.method = d_method;
        dreq.f1_hz = d_f1;
        dreq.fN_hz = d_fn;
        dreq.bandwidth_hz = d_b;
        dreq.count = d_n;
        dreq.resolution_hz = d_res;
        dreq.prime_index = d_i.value_or(1);
        dreq.umr_requirement_m = d_umr;
        dreq.c = c;
        sigma = pick_sigma(d_snr, d_sigma);
      }
      if (dc.seed) dreq.seed = dc.seed;
      auto outcome = run_design(dreq);
      auto report = analyze(outcome.plan, sigma);
      emit(dc, "plan.json", plan_to_json(outcome.plan, outcome.meta).dump(2) + "\n");
      emit(dc, "report" + ext(dc), report_text(dc, report, outcome.plan));
      return 0;
    }

    if (analyze_cmd->parsed()) {
      std::string path = a_plan;
      if (!ac.config.empty()) {
        if (!a_plan.empty()) throw Error(ErrorCode::invalid_argument, "use --config or --plan, not both");
        path = ac.config;
      }
      if (path.empty()) throw Error(ErrorCode::invalid_argument, "--plan is required");
      auto plan = read_plan_file(path);
      auto report = analyze(plan, pick_sigma(a_snr, a_sigma), a_bm, a_step);
      emit(ac, "report" + ext(ac), report_text(ac, report, plan));
      return 0;
    }

    if (estimate->parsed()) {
      std::vector<double> phases;
      EstimatorConfig cfg;
      FrequencyPlan plan(1.0, 1.0, {1});
      if (!ec.config.empty()) {
        if (!e_plan.empty() || !e_phases.empty() || e_lo || e_hi || e_step)
          throw Error(ErrorCode::invalid_argument, "use --config or estimate flags, not both");
        auto j = read_json_file(ec.config);
        const auto base = fs::path(ec.config).parent_path();
        if (j.contains("plan_file")) {
          fs::path p = j["plan_file"].get<std::string>();
          plan = read_plan_file((p.is_relative() ? base / p : p).string());
        } else {
          plan = plan_from_json(j.at("plan"));
        }
        phases = j.at("phases_rad").get<std::vector<double>>();
        const auto& e = j.at("estimator");
        cfg.search_lo_m = e.at("search_lo_m").get<double>();
        cfg.search_hi_m = e.at("search_hi_m").get<double>();
        cfg.step_m = e.at("step_m").get<double>();
        cfg.refine = e.value("refine", false);
      } else {
        if (e_plan.empty() || e_phases.empty() || !e_lo || !e_hi)
          throw Error(ErrorCode::invalid_argument, "--plan, --phases, --lo and --hi are required");
        plan = read_plan_file(e_plan);
        phases = parse_list(e_phases);
        cfg.search_lo_m = *e_lo;
        cfg.search_hi_m = *e_hi;
        cfg.step_m = e_step.value_or(0.001);
        cfg.refine = e_refine;
      }
      cfg.validate();
      if (auto w = cfg.step_warning(plan); !w.empty()) std::cerr << "warning: " << w << '\n';
      auto est = ls_estimate(PhaseVector(phases, plan), plan, cfg);
      if (ec.format == "json") {
        json j{{"q_hat_m", est.q_hat_m},
               {"cost_at_min", est.cost_at_min},
               {"grid_index", est.grid_index},
               {"refined", est.refined}};
        emit(ec, "estimate.json", j.dump(2) + "\n");
      } else {
        std::ostringstream os;
        os << "q_hat_m,cost_at_min,grid_index,refined\n"
           << format_double(est.q_hat_m) << ',' << format_double(est.cost_at_min) << ','
           << est.grid_index << ',' << (est.refined ? "true" : "false") << '\n';
        emit(ec, "estimate.csv", os.str());
      }
      return 0;
    }

    if (simulate->parsed()) {
      if (sc.config.empty()) throw Error(ErrorCode::invalid_argument, "--config is required");
      auto j = read_json_file(sc.config);
      std::optional<CMode> cm;
      if (simulate->count("--c-mode")) cm = parse_c_mode(sc.c_mode);
      auto spec = campaign_from_json(j, fs::path(sc.config).parent_path().string(), cm);
      if (sc.seed) spec.seed = *sc.seed;
      spec.validate();
      for (const auto& lp : spec.plans)
        if (auto w = spec.estimator.step_warning(lp.plan); !w.empty())
          std::cerr << "warning: " << lp.label << ": " << w << '\n';
      auto res = run_campaign(spec);
      for (auto m : {Metric::mse, Metric::pf, Metric::pa}) {
        if (!spec.wants(m)) continue;
        std::vector<CurveRow> rows;
        for (const auto& r : res.rows)
          if (r.metric == to_string(m)) rows.push_back(r);
        std::ostringstream os;
        if (sc.format == "json") os << curves_to_json(rows).dump(2) << '\n';
        else write_curve_csv(os, rows);
        emit(sc, std::string(to_string(m)) + ext(sc), os.str());
      }
      if (spec.wants(Metric::histogram)) {
        std::ostringstream os;
        if (sc.format == "json") os << histogram_to_json(res.histogram).dump(2) << '\n';
        else write_histogram_csv(os, res.histogram);
        emit(sc, "histogram" + ext(sc), os.str());
      }
      return 0;
    }

    if (replay_cmd->parsed()) {
      EstimatorConfig cfg;
      std::string record = r_record;
      double bin = r_bin;
      std::optional<FrequencyPlan> plan_override;
      if (!rc.config.empty()) {
        if (!r_record.empty() || r_lo || r_hi || r_step)
          throw Error(ErrorCode::invalid_argument, "use --config or replay flags, not both");
        auto j = read_json_file(rc.config);
        const auto base = fs::path(rc.config).parent_path();
        fs::path rp = j.at("record").get<std::string>();
        record = (rp.is_relative() ? base / rp : rp).string();
        if (j.contains("plan_file")) {
          fs::path pp = j["plan_file"].get<std::string>();
          plan_override = read_plan_file((pp.is_relative() ? base / pp : pp).string());
        }
        const auto& e = j.at("estimator");
        cfg.search_lo_m = e.at("search_lo_m").get<double>();
        cfg.search_hi_m = e.at("search_hi_m").get<double>();
        cfg.step_m = e.at("step_m").get<double>();
        cfg.refine = e.value("refine", false);
        bin = j.value("histogram_bin_m", 1.0);
      } else {
        if (r_record.empty() || !r_lo || !r_hi)
          throw Error(ErrorCode::invalid_argument, "--record, --lo and --hi are required");
        if (!r_plan.empty()) plan_override = read_plan_file(r_plan);
        cfg.search_lo_m = *r_lo;
        cfg.search_hi_m = *r_hi;
        cfg.step_m = r_step.value_or(0.001);
        cfg.refine = r_refine;
      }
      auto rec = read_phase_record(record, plan_override);
      const auto& plan = *rec.plan;
      if (auto w = cfg.step_warning(plan); !w.empty()) std::cerr << "warning: " << w << '\n';
      auto res = replay(rec, plan, cfg, bin);
      if (rc.format == "json") {
        emit(rc, "replay.json", replay_to_json(res).dump(2) + "\n");
      } else {
        std::ostringstream os, sum, hist;
        write_replay_csv(os, res);
        emit(rc, "replay.csv", os.str());
        sum << "metric,value\n"
            << "experiments," << res.rows.size() << '\n'
            << "with_truth," << res.with_truth << '\n'
            << "unwrap_failures," << res.unwrap_failures << '\n'
            << "mse_m2," << (res.mse ? format_double(*res.mse) : "") << '\n';
        emit(rc, "replay_summary.csv", sum.str());
        write_histogram_csv(hist, res.histogram);
        emit(rc, "replay_histogram.csv", hist.str());
      }
      return 0;
    }

    if (synth->parsed()) {
      auto plan = read_plan_file(y_plan);
      const auto kind = y_snr ? parse_noise_kind(y_noise) : NoiseKind::none;
      auto bias = y_bias.empty() ? std::vector<double>{} : parse_list(y_bias);
      auto noise = y_snr ? NoiseModel::from_snr_db(kind, *y_snr, bias)
                         : NoiseModel::from_sigma(NoiseKind::none, 0.0, bias);
      if (y_count < 1) throw Error(ErrorCode::invalid_argument, "--experiments must be >= 1");
      const auto seed = yc.seed.value_or(0);
      std::vector<PhaseExperiment> exps;
      for (int k = 0; k < y_count; ++k) {
        auto rng = RngStream::from_seed(seed).substream(hash_label("synth")).substream(k);
        auto ph = synth_phases(plan, y_q0, noise, rng);
        exps.push_back({std::to_string(k + 1), ph.values(), y_q0});
      }
      std::ostringstream os;
      write_phase_record(os, plan, exps);
      emit(yc, "record.csv", os.str());
      return 0;
    }
  } catch (const Error& e) {
    std::string msg = e.what();
    for (char& ch : msg)
      if (ch == '\n') ch = ' ';
    std::cerr << "error: " << to_string(e.code()) << ": " << msg << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: parse: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
