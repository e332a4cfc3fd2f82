#include "swcrt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "swcrt/csv.hpp"
#include "swcrt/data_io.hpp"
#include "swcrt/svg.hpp"
#include "swcrt/variance.hpp"

namespace swcrt {

namespace fs = std::filesystem;

namespace {

fs::path prepare_out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output.directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

std::string correlation_label(CorrelationKind k) {
  return k == CorrelationKind::Independence ? "independence" : "exchangeable";
}

}  // namespace

int resolve_threads(const std::optional<int>& cli_threads) {
  if (cli_threads && *cli_threads >= 1) return *cli_threads;
  if (const char* env = std::getenv("SWCRT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void cmd_weights(const RunConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);

  std::vector<WeightCurveRow> all;
  for (WeightFamily fam : cfg.weights.families) {
    const auto rows = weight_curve_table(fam, cfg.weights.q_list, cfg.weights.gamma_list);
    all.insert(all.end(), rows.begin(), rows.end());
  }

  if (cfg.output.csv) {
    CsvWriter csv((dir / "weights.csv").string());
    csv.header({"family", "Q", "gamma", "index", "weight", "scaled_weight"});
    for (const auto& r : all) {
      csv.field(family_name(r.family));
      csv.field(r.Q);
      csv.field(r.gamma);
      csv.field(r.index);
      csv.field(r.weight);
      csv.field(r.scaled_weight);
      csv.end_row();
    }
  }

  if (cfg.output.svg) {
    for (WeightFamily fam : cfg.weights.families) {
      Figure fig;
      for (int Q : cfg.weights.q_list) {
        const bool exposure_axis = fam == WeightFamily::W1 || fam == WeightFamily::W4;
        LineChart chart(family_name(fam) + ", Q=" + std::to_string(Q),
                        exposure_axis ? "exposure time s" : "calendar period j",
                        "scaled weight");
        chart.x_ticks_integer(true);
        chart.add_hline({0.0, "#000000", "2,3"});
        chart.add_hline({1.0, "#b22222", "4,3"});
        size_t color = 0;
        for (double g : cfg.weights.gamma_list) {
          SvgSeries s;
          for (const auto& r : all) {
            if (r.family != fam || r.Q != Q || r.gamma != g) continue;
            s.x.push_back(r.index);
            s.y.push_back(r.scaled_weight);
          }
          if (s.x.empty()) continue;
          char lab[32];
          std::snprintf(lab, sizeof(lab), "gamma=%g", g);
          s.label = lab;
          s.color = chart_palette()[color++ % chart_palette().size()];
          s.markers = true;
          chart.add_series(std::move(s));
        }
        fig.add_panel(std::move(chart));
      }
      fig.write((dir / (family_name(fam) + ".svg")).string());
    }
  }
}

void cmd_simulate(const RunConfig& cfg, int n_threads) {
  const fs::path dir = prepare_out_dir(cfg);
  ScenarioSpec scenario = *cfg.scenario;
  const auto analyses = cfg.analysis.expand();
  const auto reports =
      run_study(scenario, analyses, cfg.n_reps, cfg.base_seed, n_threads);

  if (cfg.output.csv)
    write_sim_reports_csv(reports, (dir / "simreport.csv").string());

  if (cfg.output.svg) {
    // summary panel: percent bias and coverage per estimator x correlation
    LineChart bias("percent bias: " + scenario.name, "estimator (1=IT 2=ETATE 3=CTATE)",
                   "% bias");
    bias.x_ticks_integer(true);
    bias.add_hline({0.0, "#000000", "2,3"});
    LineChart cover("coverage: " + scenario.name, "estimator (1=IT 2=ETATE 3=CTATE)",
                    "coverage");
    cover.x_ticks_integer(true);
    cover.add_hline({0.95, "#b22222", "4,3"});
    size_t color = 0;
    for (CorrelationKind ck :
         {CorrelationKind::Exchangeable, CorrelationKind::Independence}) {
      SvgSeries sb;
      sb.label = correlation_label(ck);
      sb.color = chart_palette()[color % chart_palette().size()];
      sb.markers = true;
      for (const auto& r : reports) {
        if (r.correlation != correlation_label(ck) || r.variance_method != "model")
          continue;
        const double xpos = r.estimator == "IT" ? 1 : r.estimator == "ETATE" ? 2 : 3;
        if (r.percent_bias) {
          sb.x.push_back(xpos);
          sb.y.push_back(*r.percent_bias);
        }
      }
      if (!sb.x.empty()) bias.add_series(sb);
      for (const auto& method : {"model", "CR2", "CR3"}) {
        SvgSeries sc;
        sc.label = correlation_label(ck) + "/" + method;
        sc.color = chart_palette()[color % chart_palette().size()];
        sc.dash = std::string(method) == "CR2" ? "4,3"
                  : std::string(method) == "CR3" ? "2,3" : "";
        sc.markers = true;
        for (const auto& r : reports) {
          if (r.correlation != correlation_label(ck) || r.variance_method != method)
            continue;
          const double xpos = r.estimator == "IT" ? 1 : r.estimator == "ETATE" ? 2 : 3;
          sc.x.push_back(xpos);
          sc.y.push_back(r.coverage);
        }
        if (!sc.x.empty()) cover.add_series(sc);
      }
      ++color;
    }
    Figure fig;
    fig.add_panel(std::move(bias));
    fig.add_panel(std::move(cover));
    fig.write((dir / ("sim_" + scenario.name + ".svg")).string());
  }
}

namespace {

struct EstimateRun {
  Structure structure;
  CorrelationKind correlation;
  FitResult fit;
  DesignMatrix dm;
};

void effect_curve_figure(const std::vector<EstimateRun>& runs, Structure which,
                         const std::vector<VarianceMethod>& methods,
                         const Eigen::MatrixXd& means, const fs::path& path) {
  Figure fig;
  bool any = false;
  for (const auto& run : runs) {
    if (run.structure != which) continue;
    any = true;
    const bool exposure = which == Structure::ExposureVarying;
    LineChart chart(
        std::string(exposure ? "exposure-time effects" : "calendar-time effects") +
            " (" + correlation_label(run.correlation) + ")",
        exposure ? "exposure time s" : "calendar period j",
        "effect estimate");
    chart.x_ticks_integer(true);
    chart.add_hline({0.0, "#000000", "2,3"});

    std::vector<double> xs;
    const int ntx = run.dm.n_treatment_cols;
    for (int k = 0; k < ntx; ++k) xs.push_back(exposure ? k + 1 : k + 2);

    // CI ribbons, model-based first so robust bands sit on top
    size_t band_color = 0;
    for (VarianceMethod m : methods) {
      if (m != VarianceMethod::ModelBased &&
          run.correlation != CorrelationKind::Independence)
        continue;  // robust ribbons shown for the independence fits
      Eigen::MatrixXd vc;
      try {
        vc = m == VarianceMethod::ModelBased
                 ? model_vcov(run.fit)
                 : cluster_robust_vcov(run.fit, run.dm, means, m);
      } catch (const ComputeFault&) {
        continue;
      }
      const double qz = 1.959963984540054;
      SvgBand band;
      band.color = band_color == 0 ? "#9aa7b5" : band_color == 1 ? "#c9a36a" : "#a4c2a0";
      band.opacity = 0.30;
      for (int k = 0; k < ntx; ++k) {
        const double se = std::sqrt(std::max(0.0, vc(k, k)));
        band.x.push_back(xs[k]);
        band.lo.push_back(run.fit.beta[k] - qz * se);
        band.hi.push_back(run.fit.beta[k] + qz * se);
      }
      chart.add_band(std::move(band));
      ++band_color;
    }

    SvgSeries curve;
    curve.x = xs;
    for (int k = 0; k < ntx; ++k) curve.y.push_back(run.fit.beta[k]);
    curve.color = "#1b6ca8";
    curve.markers = true;
    curve.label = exposure ? "delta estimates" : "xi estimates";
    chart.add_series(std::move(curve));

    chart.add_hline({scalar_estimate(run.fit), "#c2402a", ""});
    fig.add_panel(std::move(chart));
  }
  if (any) fig.write(path.string());
}

}  // namespace

void cmd_estimate(const RunConfig& cfg, const std::string& data_path) {
  const fs::path dir = prepare_out_dir(cfg);
  const DesignSpec& want = *cfg.design;
  const IngestedData data =
      read_trial_csv(data_path, want.n_periods, want.n_clusters);
  if (data.design.cell_size != want.cell_size && want.cell_size > 0 &&
      data.individuals)
    throw UnbalancedPanel("data cell size " + std::to_string(data.design.cell_size) +
                          " does not match the configured K=" +
                          std::to_string(want.cell_size));

  std::vector<EstimateRun> runs;
  for (Structure s : cfg.analysis.structures) {
    for (CorrelationKind ck : cfg.analysis.correlations) {
      EstimateRun run;
      run.structure = s;
      run.correlation = ck;
      run.dm = design_matrix(data.design, s, false);
      if (ck == CorrelationKind::Independence) {
        run.fit = data.individuals ? fit_gls(run.dm, data.as_trial(), 0.0)
                                   : fit_gls(run.dm, data.cell_means, 0.0);
      } else {
        run.fit = data.individuals ? fit_feasible_gls(run.dm, data.as_trial())
                                   : fit_feasible_gls(run.dm, data.cell_means);
      }
      runs.push_back(std::move(run));
    }
  }

  const int n_obs_ll = data.individuals
                           ? data.design.n_clusters * data.design.n_periods *
                                 data.design.cell_size
                           : data.design.n_clusters * data.design.n_periods;

  if (cfg.output.csv) {
    CsvWriter csv((dir / "estimates.csv").string());
    std::vector<std::string> head = {"structure", "correlation", "estimator", "point"};
    for (VarianceMethod m : cfg.analysis.variance_methods) {
      head.push_back("se_" + variance_method_name(m));
      head.push_back("ci_low_" + variance_method_name(m));
      head.push_back("ci_high_" + variance_method_name(m));
    }
    head.push_back("gamma_hat");
    head.push_back("aic");
    head.push_back("bic");
    csv.header(head);
    for (const auto& run : runs) {
      csv.field(structure_name(run.structure));
      csv.field(correlation_label(run.correlation));
      csv.field(estimator_name(run.structure));
      csv.field(scalar_estimate(run.fit));
      for (VarianceMethod m : cfg.analysis.variance_methods) {
        const VarianceReport rep =
            estimator_report(run.fit, run.dm, data.cell_means, m);
        csv.field(rep.se);
        csv.field(rep.ci_low);
        csv.field(rep.ci_high);
      }
      csv.field(run.fit.gamma_used);
      const auto [aic, bic] = information_criteria(run.fit, n_obs_ll);
      csv.field(aic);
      csv.field(bic);
      csv.end_row();
    }
  }

  if (cfg.output.svg) {
    effect_curve_figure(runs, Structure::ExposureVarying,
                        cfg.analysis.variance_methods, data.cell_means,
                        dir / "effects_exposure.svg");
    effect_curve_figure(runs, Structure::CalendarVarying,
                        cfg.analysis.variance_methods, data.cell_means,
                        dir / "effects_calendar.svg");
  }
}

void cmd_design_info(const RunConfig& cfg) {
  const fs::path dir = prepare_out_dir(cfg);
  const DesignSpec& d = *cfg.design;
  std::cout << "stepped-wedge design: I=" << d.n_clusters << " clusters, J="
            << d.n_periods << " periods, Q=" << d.n_sequences << " sequences, "
            << d.clusters_per_sequence << " cluster(s)/sequence, K=" << d.cell_size
            << " per cell\n"
            << "treated cells: " << treated_cell_count(d) << " of "
            << d.n_clusters * d.n_periods << "\n";
  if (cfg.scenario) {
    const double g = gamma_of(cfg.scenario->correlation, d.cell_size);
    std::cout << "scenario '" << cfg.scenario->name << "': gamma=" << g
              << ", ICC=" << icc(cfg.scenario->correlation)
              << ", true estimand=" << true_estimand(cfg.scenario->structure) << "\n";
  }
  if (cfg.output.csv) {
    CsvWriter csv((dir / "design.csv").string());
    csv.header({"cluster", "sequence", "period", "treated", "exposure_time"});
    for (int c = 1; c <= d.n_clusters; ++c) {
      const int q = sequence_of_cluster(d, c);
      for (int j = 1; j <= d.n_periods; ++j) {
        csv.field(c);
        csv.field(q);
        csv.field(j);
        csv.field(treatment_indicator(d, q, j));
        csv.field(exposure_time(d, q, j));
        csv.end_row();
      }
    }
  }
}

int run_command(Command command, const CliOptions& options) {
  try {
    RunConfig cfg = load_config(options.config_path, command);
    if (options.out_dir) cfg.output.directory = *options.out_dir;
    if (options.seed) {
      cfg.base_seed = *options.seed;
      if (cfg.scenario) cfg.scenario->seed = *options.seed;
    }
    switch (command) {
      case Command::Weights:
        cmd_weights(cfg);
        break;
      case Command::Simulate:
        cmd_simulate(cfg, resolve_threads(options.threads));
        break;
      case Command::Estimate:
        if (options.data_path.empty())
          throw ValidationError("estimate needs --data <file>");
        cmd_estimate(cfg, options.data_path);
        break;
      case Command::DesignInfo:
        cmd_design_info(cfg);
        break;
    }
    return 0;
  } catch (const ValidationFault& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ComputeFault& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace swcrt
