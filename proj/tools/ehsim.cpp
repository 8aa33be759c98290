// Command-line driver: single experiments, density sweeps, and the analytic
// inspection commands (battery chain, four-state matrix, clustering dump).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ehsim/battery.hpp"
#include "ehsim/config.hpp"
#include "ehsim/csv.hpp"
#include "ehsim/experiment.hpp"
#include "ehsim/state_dynamics.hpp"
#include "ehsim/svg.hpp"

namespace {

ehsim::SimConfig load_config(const std::string& path, std::uint64_t seed_override,
                             bool have_seed) {
  ehsim::SimConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ehsim::ConfigError("cannot open config file: " + path);
    cfg = ehsim::parse_config(in);
  }
  if (have_seed) cfg.base_seed = seed_override;
  for (const auto& w : cfg.validate()) std::cerr << "warning: " << w << "\n";
  return cfg;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

std::vector<ehsim::PolicyKind> parse_policy_list(const std::string& csv) {
  std::vector<ehsim::PolicyKind> out;
  if (csv == "all")
    return {ehsim::PolicyKind::Random, ehsim::PolicyKind::GridSearch,
            ehsim::PolicyKind::KnnCluster, ehsim::PolicyKind::Genie};
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(ehsim::parse_policy(tok));
  return out;
}

void emit_sweep_svgs(const std::string& stem, const std::vector<ehsim::SweepRow>& rows) {
  struct Metric {
    const char* suffix;
    const char* title;
    double (*value)(const ehsim::SweepRow&);
  };
  const Metric metrics[] = {
      {"misdetection", "Misdetection probability",
       [](const ehsim::SweepRow& r) { return r.misdetection.mean; }},
      {"ec", "Mean energy consumption per device per TTI",
       [](const ehsim::SweepRow& r) { return r.mean_ec.mean; }},
      {"info", "Mean information per event",
       [](const ehsim::SweepRow& r) { return r.mean_info.mean; }},
  };
  for (const Metric& m : metrics) {
    std::vector<ehsim::ChartSeries> series;
    for (const ehsim::SweepRow& row : rows) {
      const std::string name = ehsim::to_string(row.policy);
      auto it = std::find_if(series.begin(), series.end(),
                             [&](const auto& s) { return s.name == name; });
      if (it == series.end()) {
        series.push_back({name, {}});
        it = series.end() - 1;
      }
      it->points.emplace_back(row.n_devices, m.value(row));
    }
    std::ofstream out(stem + "." + m.suffix + ".svg");
    ehsim::write_line_chart_svg(out, m.title, "devices", m.title, series);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-harvesting IoT duty-cycling simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path, out_path, trace_path;
  std::uint64_t seed = 0;
  bool have_seed = false;
  app.add_option("--config", config_path, "configuration file (flat key = value)");
  app.add_option("--seed", seed, "override base_seed")->each([&](const std::string&) {
    have_seed = true;
  });
  app.add_option("--out", out_path, "output CSV path (default stdout)");
  app.add_option("--trace", trace_path, "per-TTI trace CSV path (simulate only)");
  int parallelism = static_cast<int>(std::thread::hardware_concurrency());
  app.add_option("--parallelism", parallelism, "worker threads for Monte Carlo runs");

  auto* sim_cmd = app.add_subcommand("simulate", "run one experiment, print the aggregate");
  auto* sweep_cmd = app.add_subcommand("sweep", "density sweep, one CSV row per (policy, N)");
  std::string densities_arg = "10,50,100,250", policies_arg = "all";
  bool svg = false;
  sweep_cmd->add_option("--densities", densities_arg, "comma-separated device counts");
  sweep_cmd->add_option("--policies", policies_arg,
                        "comma-separated policies or 'all' "
                        "(random|grid-search|knn-cluster|genie)");
  sweep_cmd->add_flag("--svg", svg, "also write line charts next to the CSV");
  auto* battery_cmd =
      app.add_subcommand("battery", "battery chain stationary solve vs closed forms");
  double p_wake = 0.0;
  battery_cmd->add_option("--p-wake", p_wake, "analytic P_{4,2} (default 0)");
  auto* matrix_cmd = app.add_subcommand("matrix", "analytic 4-state matrix and stationary");
  matrix_cmd->add_option("--p-wake", p_wake, "analytic P_{4,2} (default 0)");
  auto* cluster_cmd = app.add_subcommand("cluster", "clustering and schedule dump");
  auto* defaults_cmd =
      app.add_subcommand("defaults", "print the reference config (all keys, default values)");

  CLI11_PARSE(app, argc, argv);

  if (defaults_cmd->parsed()) {
    ehsim::serialize_config(ehsim::SimConfig{}, std::cout);
    return 0;
  }

  try {
    const ehsim::SimConfig cfg = load_config(config_path, seed, have_seed);
    std::ofstream out_file;
    std::ostream& out = open_out(out_file, out_path);

    if (sim_cmd->parsed()) {
      const auto resolved = ehsim::resolve_policy(cfg, cfg.base_seed, parallelism);
      if (cfg.policy == ehsim::PolicyKind::GridSearch) {
        std::cerr << "grid-search selected (on=" << resolved.plan.uniform_duty.on_time
                  << ", drx=" << resolved.plan.uniform_duty.drx_cycle << ")"
                  << (resolved.grid_feasible ? "" : " [infeasible: best-information fallback]")
                  << "\n";
      }
      if (!trace_path.empty()) {
        // tracing applies to the first run; aggregates cover all runs
        std::ofstream trace_out(trace_path);
        if (!trace_out) throw std::runtime_error("cannot open trace file: " + trace_path);
        ehsim::write_trace_header(trace_out);
        ehsim::run_simulation(cfg, resolved.plan, ehsim::Rng::split(cfg.base_seed, 0),
                              [&](const ehsim::TtiLog& log) { ehsim::write_trace_row(trace_out, log); });
      }
      const auto agg =
          ehsim::run_experiment(cfg, resolved.plan, cfg.n_runs, cfg.base_seed, parallelism);
      out << "metric,mean,stddev,ci95\n";
      out << "misdetection," << ehsim::csv_number(agg.misdetection.mean) << ','
          << ehsim::csv_number(agg.misdetection.stddev) << ','
          << ehsim::csv_number(agg.misdetection.ci95) << "\n";
      out << "mean_ec," << ehsim::csv_number(agg.mean_ec.mean) << ','
          << ehsim::csv_number(agg.mean_ec.stddev) << ','
          << ehsim::csv_number(agg.mean_ec.ci95) << "\n";
      out << "mean_info," << ehsim::csv_number(agg.mean_info.mean) << ','
          << ehsim::csv_number(agg.mean_info.stddev) << ','
          << ehsim::csv_number(agg.mean_info.ci95) << "\n";
    } else if (sweep_cmd->parsed()) {
      const auto rows = ehsim::sweep(cfg, parse_int_list(densities_arg),
                                     parse_policy_list(policies_arg), parallelism);
      for (const auto& row : rows) {
        if (row.policy == ehsim::PolicyKind::GridSearch)
          std::cerr << "grid-search N=" << row.n_devices << ": selected (on="
                    << row.grid_selected.on_time << ", drx=" << row.grid_selected.drx_cycle
                    << ")" << (row.grid_feasible ? "" : " [infeasible: best-information fallback]")
                    << "\n";
      }
      ehsim::write_sweep_csv(out, rows);
      if (svg) {
        std::string stem = out_path.empty() ? "sweep" : out_path;
        if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv")
          stem.resize(stem.size() - 4);
        emit_sweep_svgs(stem, rows);
      }
    } else if (battery_cmd->parsed()) {
      const ehsim::HarvestModel harvest{cfg.lambda_tau, 1.0, static_cast<int>(cfg.e_h)};
      const double p_detect = ehsim::average_activation(cfg.area(), cfg.eta, cfg.d_max);
      ehsim::DutyCycleConfig duty{1, 4, 0};
      const auto fp = ehsim::coupled_fixed_point(duty, cfg.alpha, harvest,
                                                 static_cast<int>(cfg.e_idle),
                                                 static_cast<int>(cfg.e_tx),
                                                 static_cast<int>(cfg.e_max), p_detect, p_wake);
      out << "level,stationary\n";
      for (std::size_t b = 0; b < fp.battery.probabilities.size(); ++b)
        out << b << ',' << ehsim::csv_number(fp.battery.probabilities[b]) << "\n";
      const double p_enter = cfg.alpha * p_detect + p_wake;
      const auto semi = ehsim::pr_transmit_semiclosed(p_enter, static_cast<int>(cfg.e_tx),
                                                      static_cast<int>(cfg.e_max));
      out << "summary,pr_tx_stationary=" << ehsim::csv_number(fp.p_tx_capable)
          << ",eq_binomial=" << ehsim::csv_number(semi.binomial_sum)
          << ",beta_form=" << ehsim::csv_number(semi.beta_form)
          << ",iterations=" << fp.iterations << "\n";
    } else if (matrix_cmd->parsed()) {
      const double p_detect = ehsim::average_activation(cfg.area(), cfg.eta, cfg.d_max);
      ehsim::DutyCycleConfig duty{1, 4, 0};
      const auto fp = ehsim::coupled_fixed_point(duty, cfg.alpha,
                                                 {cfg.lambda_tau, 1.0, static_cast<int>(cfg.e_h)},
                                                 static_cast<int>(cfg.e_idle),
                                                 static_cast<int>(cfg.e_tx),
                                                 static_cast<int>(cfg.e_max), p_detect, p_wake);
      const auto m = ehsim::build_transition_matrix(duty, cfg.alpha, p_detect, p_wake,
                                                    fp.p_tx_capable);
      out << "from,to_s1,to_s2,to_s3,to_s4\n";
      for (int r = 0; r < 4; ++r) {
        out << 'S' << r + 1;
        for (int c = 0; c < 4; ++c) out << ',' << ehsim::csv_number(m.at(r, c));
        out << "\n";
      }
      const auto pi = ehsim::state_stationary(m);
      out << "stationary";
      for (double v : pi) out << ',' << ehsim::csv_number(v);
      out << "\n";
    } else if (cluster_cmd->parsed()) {
      ehsim::Rng rng(cfg.base_seed);
      const auto devices = ehsim::deploy_uniform(cfg.n_devices, cfg.area(), cfg.e_max, rng);
      std::vector<ehsim::Position> pos(devices.size());
      for (std::size_t i = 0; i < devices.size(); ++i) pos[i] = devices[i].position;
      const int m = std::min(ehsim::cluster_count(cfg.area(), cfg.d_max), cfg.n_devices);
      const auto clustering = ehsim::knn_clustering(pos, m, cfg.k_neighbors, rng);
      const auto duty = ehsim::round_robin_schedule(clustering);
      out << "device_id,x,y,cluster_id,on,drx,offset\n";
      for (std::size_t i = 0; i < devices.size(); ++i)
        out << devices[i].id << ',' << ehsim::csv_number(pos[i].x) << ','
            << ehsim::csv_number(pos[i].y) << ',' << clustering.assignment[i] << ','
            << duty[i].on_time << ',' << duty[i].drx_cycle << ',' << duty[i].offset << "\n";
      std::cerr << "clusters: " << clustering.cluster_count() << "\n";
    }
  } catch (const ehsim::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
