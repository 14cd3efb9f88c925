#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include "entangle/measures.hpp"
#include "entangle/optics.hpp"
#include "entangle/qcore.hpp"
#include "entangle/rng.hpp"
#include "entangle/sampling.hpp"
#include "entangle/tomography.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

// Replaces each "--config FILE" token pair with the flags stored in the JSON
// object FILE, in place, so explicit flags given later keep precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> tokens(argv, argv + argc);
  for (std::size_t i = 0; i < tokens.size();) {
    if (tokens[i] != "--config") {
      ++i;
      continue;
    }
    if (i + 1 >= tokens.size()) {
      throw std::invalid_argument("--config needs a file argument");
    }
    std::ifstream in(tokens[i + 1]);
    if (!in) throw std::runtime_error("cannot open config file " + tokens[i + 1]);
    json cfg;
    in >> cfg;
    if (!cfg.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    std::vector<std::string> expanded;
    for (const auto& [key, value] : cfg.items()) {
      if (value.is_boolean()) {
        if (value.get<bool>()) expanded.push_back("--" + key);
      } else if (value.is_string()) {
        expanded.push_back("--" + key);
        expanded.push_back(value.get<std::string>());
      } else if (value.is_number()) {
        expanded.push_back("--" + key);
        expanded.push_back(value.dump());
      } else {
        throw std::invalid_argument("config key '" + key +
                                    "' must be a scalar (bool, number or string)");
      }
    }
    tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                 tokens.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                  expanded.begin(), expanded.end());
    i += expanded.size();
  }
  return tokens;
}

entangle::StateVariant resolve_state(const std::string& in_path,
                                     const std::string& ref_name,
                                     const std::vector<double>& params) {
  if (!in_path.empty() && !ref_name.empty()) {
    throw std::invalid_argument("give either --in or --state, not both");
  }
  if (!in_path.empty()) return entangle::load_state(in_path);
  if (!ref_name.empty()) return entangle::reference_state(ref_name, params);
  throw std::invalid_argument("need --in FILE or --state NAME");
}

json report_with_source(const std::string& source, const entangle::EntanglementReport& rep) {
  json j = entangle::report_to_json(rep);
  j["source"] = source;
  return j;
}

void write_trajectory_csv(std::ostream& out, const entangle::IterativeRun& run) {
  out << "iteration,fidelity";
  if (!run.trajectory.empty()) {
    for (const auto& p : run.trajectory.front().pair_tangles) {
      out << ",tau2_" << p.first << p.second;
    }
  }
  out << '\n';
  for (const auto& point : run.trajectory) {
    out << point.iteration << ',' << fmt_g(point.fidelity_vs_truth);
    for (const auto& p : point.pair_tangles) out << ',' << fmt_g(p.value);
    out << '\n';
  }
}

} // namespace

int main(int argc, char** argv) {
  try {
    std::vector<std::string> tokens = expand_config(argc, argv);
    std::vector<char*> args;
    args.reserve(tokens.size());
    for (auto& t : tokens) args.push_back(t.data());

    CLI::App app{
        "Tunable three-photon entangled-state laboratory: circuit simulation, "
        "entanglement measures, simulated tomography and Haar sampling studies.\n"
        "All angles on the command line are degrees. Any subcommand accepts\n"
        "--config FILE with a JSON object of flag values (explicit flags win).\n"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::uint64_t seed = kDefaultSeed;
    app.add_option("--seed", seed, "master RNG seed; every derived stream is a "
                                   "documented function of it")
        ->capture_default_str();

    // circuit
    auto* c_circuit =
        app.add_subcommand("circuit", "Run the two-beamsplitter circuit at one angle");
    double circuit_theta = 45.0;
    std::string circuit_out = "circuit_state.json";
    std::string circuit_report;
    c_circuit->add_option("--theta", circuit_theta, "wave-plate angle in degrees [0,45]")
        ->required();
    c_circuit->add_option("--out", circuit_out, "output state JSON")->capture_default_str();
    c_circuit->add_option("--report", circuit_report, "also write a measure report JSON");
    c_circuit->callback([&] {
      entangle::CircuitOutcome outcome = entangle::run_circuit(deg2rad(circuit_theta));
      entangle::save_state(circuit_out, outcome.state);
      json summary{{"theta_deg", circuit_theta},
                   {"success_probability", outcome.success_probability},
                   {"state_file", circuit_out}};
      if (!circuit_report.empty()) {
        auto rep = entangle::robustness_profile(
            entangle::density(outcome.state),
            entangle::StateVariant(entangle::ideal_family_state(outcome.theta)));
        open_out(circuit_report) << report_with_source(circuit_out, rep).dump(2) << "\n";
        summary["report_file"] = circuit_report;
      }
      std::cout << summary.dump(2) << "\n";
    });

    // scan
    auto* c_scan = app.add_subcommand("scan", "Sweep the wave-plate angle and tabulate "
                                              "success probability and measures");
    double scan_from = 0.0, scan_to = 45.0;
    int scan_steps = 46;
    std::string scan_out = "theta_scan.csv";
    c_scan->add_option("--from", scan_from, "first angle in degrees")->capture_default_str();
    c_scan->add_option("--to", scan_to, "last angle in degrees")->capture_default_str();
    c_scan->add_option("--steps", scan_steps, "number of grid points")
        ->check(CLI::Range(1, 100000))
        ->capture_default_str();
    c_scan->add_option("--out", scan_out, "output CSV")->capture_default_str();
    c_scan->callback([&] {
      std::vector<double> thetas;
      for (int i = 0; i < scan_steps; ++i) {
        double deg = scan_steps == 1
                         ? scan_from
                         : scan_from + (scan_to - scan_from) * i / (scan_steps - 1);
        thetas.push_back(deg2rad(deg));
      }
      auto rows = entangle::theta_scan(thetas);
      auto out = open_out(scan_out);
      entangle::write_theta_scan_csv(out, rows);
      std::cout << json{{"rows", rows.size()}, {"csv", scan_out}}.dump(2) << "\n";
    });

    // measures
    auto* c_measures =
        app.add_subcommand("measures", "Entanglement measures of stored or named states");
    std::vector<std::string> measures_in;
    std::string measures_state, measures_target;
    std::vector<double> measures_params;
    double measures_target_param = -1.0;
    std::string measures_out, measures_csv;
    c_measures->add_option("--in", measures_in, "state JSON file (repeatable)");
    c_measures->add_option("--state", measures_state,
                           "reference state name (w, ghz, product-zero, zero-tensor-bell, "
                           "psi+/-, phi+/-, mems, werner)");
    c_measures->add_option("--param", measures_params,
                           "parameter for parameterized reference states");
    c_measures->add_option("--target", measures_target,
                           "state file or reference name for a fidelity column");
    c_measures->add_option("--target-param", measures_target_param,
                           "parameter when --target names a parameterized family");
    c_measures->add_option("--out", measures_out, "write the report JSON here (default stdout)");
    c_measures->add_option("--csv", measures_csv, "also write a one-row-per-state CSV table");
    c_measures->callback([&] {
      std::vector<std::pair<std::string, entangle::StateVariant>> states;
      for (const auto& path : measures_in) {
        states.emplace_back(path, entangle::load_state(path));
      }
      if (!measures_state.empty()) {
        states.emplace_back(measures_state,
                            entangle::reference_state(measures_state, measures_params));
      }
      if (states.empty()) throw std::invalid_argument("need --in FILE or --state NAME");

      std::optional<entangle::StateVariant> target;
      if (!measures_target.empty()) {
        if (fs::exists(measures_target)) {
          target = entangle::load_state(measures_target);
        } else {
          std::vector<double> tp;
          if (measures_target_param >= 0.0) tp.push_back(measures_target_param);
          target = entangle::reference_state(measures_target, tp);
        }
      }

      json reports = json::array();
      std::vector<entangle::EntanglementReport> reps3; // three-qubit rows for the CSV
      json rows2 = json::array();                      // two-qubit rows for the CSV
      for (const auto& [source, state] : states) {
        auto rho = entangle::as_density(state);
        if (rho.matrix().rows() == 4) {
          json j;
          j["source"] = source;
          j["tangle"] = entangle::tangle(rho);
          j["concurrence"] = entangle::concurrence(rho);
          j["negativity"] = entangle::negativity(rho, {rho.labels().front()});
          j["linear_entropy"] = entangle::linear_entropy(rho);
          if (target) {
            j["fidelity_vs_target"] = entangle::fidelity(rho, entangle::as_density(*target));
          }
          reports.push_back(j);
          rows2.push_back(std::move(j));
        } else if (rho.matrix().rows() == 8) {
          auto rep = target ? entangle::robustness_profile(rho, *target)
                            : entangle::robustness_profile(rho);
          reports.push_back(report_with_source(source, rep));
          reps3.push_back(std::move(rep));
        } else {
          throw std::invalid_argument("measures: " + source +
                                      " is not a two- or three-qubit state");
        }
      }
      json out_doc = reports.size() == 1 ? reports[0] : json{{"reports", reports}};
      if (measures_out.empty()) {
        std::cout << out_doc.dump(2) << "\n";
      } else {
        open_out(measures_out) << out_doc.dump(2) << "\n";
        std::cout << json{{"report_file", measures_out}}.dump(2) << "\n";
      }
      if (!measures_csv.empty()) {
        if (!reps3.empty() && !rows2.empty()) {
          throw std::invalid_argument("--csv cannot mix two- and three-qubit states");
        }
        auto out = open_out(measures_csv);
        if (!rows2.empty()) {
          out << "source,tangle,concurrence,negativity,s_linear,fidelity_vs_target\n";
          for (const auto& r : rows2) {
            out << r["source"].get<std::string>() << ',' << fmt_g(r["tangle"].get<double>())
                << ',' << fmt_g(r["concurrence"].get<double>()) << ','
                << fmt_g(r["negativity"].get<double>()) << ','
                << fmt_g(r["linear_entropy"].get<double>()) << ','
                << (r.contains("fidelity_vs_target")
                        ? fmt_g(r["fidelity_vs_target"].get<double>())
                        : std::string())
                << '\n';
          }
        } else {
          out << "source,n3,tau3";
          for (const auto& p : reps3.front().pair_tangles) {
            out << ",tau2_" << p.first << p.second;
          }
          out << ",tau2_min,tau2_avg,s_linear,witness\n";
          for (std::size_t i = 0; i < reps3.size(); ++i) {
            const auto& rep = reps3[i];
            out << states[i].first << ',' << fmt_g(rep.tripartite_negativity) << ','
                << (rep.three_tangle ? fmt_g(*rep.three_tangle) : std::string());
            for (const auto& p : rep.pair_tangles) out << ',' << fmt_g(p.value);
            out << ',' << fmt_g(rep.tau2_min) << ',' << fmt_g(rep.tau2_avg) << ','
                << fmt_g(rep.linear_entropy) << ','
                << (rep.witness_value ? fmt_g(*rep.witness_value) : std::string()) << '\n';
          }
        }
      }
    });

    // tomo
    auto* c_tomo = app.add_subcommand("tomo", "Simulated noisy tomography");
    c_tomo->require_subcommand(1);

    auto* t_sim = c_tomo->add_subcommand("simulate", "Draw Poisson counts for the "
                                                     "over-complete analyzer settings");
    std::string sim_in, sim_state = "w";
    std::vector<double> sim_params;
    double sim_flux = 480.0;
    int sim_iterations = 1;
    std::string sim_out = "counts.csv";
    t_sim->add_option("--in", sim_in, "state JSON to measure");
    t_sim->add_option("--state", sim_state, "reference state name")->capture_default_str();
    t_sim->add_option("--param", sim_params, "reference state parameter");
    t_sim->add_option("--flux", sim_flux, "expected counts per unit probability, per iteration")
        ->capture_default_str();
    t_sim->add_option("--iterations", sim_iterations, "number of acquisition blocks")
        ->check(CLI::Range(1, 100000))
        ->capture_default_str();
    t_sim->add_option("--out", sim_out, "counts CSV")->capture_default_str();
    t_sim->callback([&] {
      auto rho = entangle::as_density(
          resolve_state(sim_in, sim_in.empty() ? sim_state : "", sim_params));
      auto settings = entangle::build_projector_set(rho.num_qubits());
      std::vector<entangle::MeasurementRecord> blocks;
      for (int m = 1; m <= sim_iterations; ++m) {
        auto rec = entangle::simulate_counts(
            rho, settings, sim_flux,
            entangle::derive_seed(seed, 2 * static_cast<std::uint64_t>(m)));
        rec.iteration = m;
        blocks.push_back(std::move(rec));
      }
      auto out = open_out(sim_out);
      entangle::write_counts_csv(out, blocks);
      std::int64_t total = 0;
      for (const auto& b : blocks)
        for (auto c : b.counts) total += c;
      std::cout << json{{"settings", settings.size()},
                        {"iterations", sim_iterations},
                        {"total_counts", total},
                        {"csv", sim_out}}
                       .dump(2)
                << "\n";
    });

    auto* t_rec = c_tomo->add_subcommand("reconstruct",
                                         "Fit a density matrix to a counts file");
    std::string rec_in = "counts.csv", rec_out = "reconstructed_state.json";
    std::string rec_report, rec_target;
    double rec_target_param = -1.0;
    int rec_starts = 5, rec_max_iters = 2000;
    t_rec->add_option("--in", rec_in, "counts CSV")->capture_default_str();
    t_rec->add_option("--out", rec_out, "output state JSON")->capture_default_str();
    t_rec->add_option("--report", rec_report, "also write a measure report JSON");
    t_rec->add_option("--target", rec_target, "state file or reference name for fidelity");
    t_rec->add_option("--target-param", rec_target_param,
                      "parameter when --target names a parameterized family");
    t_rec->add_option("--starts", rec_starts, "multi-start count")->capture_default_str();
    t_rec->add_option("--max-iters", rec_max_iters, "optimizer iteration cap")
        ->capture_default_str();
    t_rec->callback([&] {
      std::ifstream in(rec_in);
      if (!in) throw std::runtime_error("cannot open " + rec_in);
      auto blocks = entangle::read_counts_csv(in);
      auto merged = entangle::merge_records(blocks);
      entangle::ReconstructionOptions opts;
      opts.multistarts = rec_starts;
      opts.max_iterations = rec_max_iters;
      opts.seed = entangle::derive_seed(seed, 1);
      auto result = entangle::reconstruct(merged, opts);
      entangle::save_state(rec_out, result.rho);
      json summary{{"state_file", rec_out},
                   {"objective", result.objective},
                   {"fitted_flux", result.fitted_flux},
                   {"iterations", result.iterations},
                   {"converged", result.converged}};
      if (!rec_report.empty() || !rec_target.empty()) {
        std::optional<entangle::StateVariant> target;
        if (!rec_target.empty()) {
          if (fs::exists(rec_target)) {
            target = entangle::load_state(rec_target);
          } else {
            std::vector<double> tp;
            if (rec_target_param >= 0.0) tp.push_back(rec_target_param);
            target = entangle::reference_state(rec_target, tp);
          }
        }
        if (result.rho.num_qubits() == 3) {
          auto rep = target ? entangle::robustness_profile(result.rho, *target)
                            : entangle::robustness_profile(result.rho);
          if (target && rep.fidelity_vs_target) summary["fidelity"] = *rep.fidelity_vs_target;
          if (!rec_report.empty()) {
            open_out(rec_report) << report_with_source(rec_in, rep).dump(2) << "\n";
            summary["report_file"] = rec_report;
          }
        } else if (target) {
          auto t_rho = entangle::as_density(*target);
          summary["fidelity"] = entangle::fidelity(result.rho, t_rho);
        }
      }
      std::cout << summary.dump(2) << "\n";
    });

    auto* t_iter = c_tomo->add_subcommand(
        "iterate", "Accumulate acquisition blocks against a true state and track "
                   "the reconstruction");
    std::string iter_in, iter_state = "w";
    std::vector<double> iter_params;
    int iter_count = 10;
    double iter_flux = 480.0;
    std::string iter_out = "trajectory.csv", iter_counts_out;
    t_iter->add_option("--in", iter_in, "true state JSON");
    t_iter->add_option("--state", iter_state, "reference state name")->capture_default_str();
    t_iter->add_option("--param", iter_params, "reference state parameter");
    t_iter->add_option("--iterations", iter_count, "number of blocks")
        ->check(CLI::Range(1, 10000))
        ->capture_default_str();
    t_iter->add_option("--flux", iter_flux, "flux per block")->capture_default_str();
    t_iter->add_option("--out", iter_out, "trajectory CSV")->capture_default_str();
    t_iter->add_option("--counts-out", iter_counts_out, "also write the per-block counts CSV");
    t_iter->callback([&] {
      auto truth = entangle::as_density(
          resolve_state(iter_in, iter_in.empty() ? iter_state : "", iter_params));
      auto run = entangle::iterative_tomography(truth, iter_count, iter_flux, seed);
      auto out = open_out(iter_out);
      write_trajectory_csv(out, run);
      if (!iter_counts_out.empty()) {
        auto cout_file = open_out(iter_counts_out);
        entangle::write_counts_csv(cout_file, run.blocks);
      }
      std::cout << json{{"iterations", iter_count},
                        {"final_fidelity", run.trajectory.back().fidelity_vs_truth},
                        {"csv", iter_out}}
                       .dump(2)
                << "\n";
    });

    auto* t_err = c_tomo->add_subcommand(
        "errors", "Monte-Carlo error bars by resampling a counts file");
    std::string err_in = "counts.csv", err_target, err_out;
    double err_target_param = -1.0;
    int err_resamples = 100;
    t_err->add_option("--in", err_in, "counts CSV")->capture_default_str();
    t_err->add_option("--resamples", err_resamples, "number of Poisson resamples")
        ->check(CLI::Range(2, 100000))
        ->capture_default_str();
    t_err->add_option("--target", err_target, "state file or reference name for fidelity");
    t_err->add_option("--target-param", err_target_param,
                      "parameter when --target names a parameterized family");
    t_err->add_option("--out", err_out, "write the error report JSON here (default stdout)");
    t_err->callback([&] {
      std::ifstream in(err_in);
      if (!in) throw std::runtime_error("cannot open " + err_in);
      auto merged = entangle::merge_records(entangle::read_counts_csv(in));
      std::optional<entangle::StateVariant> target;
      if (!err_target.empty()) {
        if (fs::exists(err_target)) {
          target = entangle::load_state(err_target);
        } else {
          std::vector<double> tp;
          if (err_target_param >= 0.0) tp.push_back(err_target_param);
          target = entangle::reference_state(err_target, tp);
        }
      }
      auto mc = entangle::monte_carlo_errors(merged, err_resamples,
                                             entangle::derive_seed(seed, 2), target);
      json doc{{"resamples", mc.resamples},
               {"mean", mc.mean},
               {"stddev", mc.stddev},
               {"source", err_in}};
      if (err_out.empty()) {
        std::cout << doc.dump(2) << "\n";
      } else {
        open_out(err_out) << doc.dump(2) << "\n";
        std::cout << json{{"report_file", err_out}}.dump(2) << "\n";
      }
    });

    // haar
    auto* c_haar = app.add_subcommand(
        "haar", "Haar-random scatter study against the ideal family curve");
    std::int64_t haar_samples = 300000;
    std::string haar_out = "scatter.csv", haar_curve_out = "curve.csv";
    std::string haar_refs_out = "reference_points.csv", haar_report_out;
    int haar_curve_points = 200;
    bool haar_average = false;
    c_haar->add_option("--samples", haar_samples, "number of Haar samples")
        ->check(CLI::Range(std::int64_t{1}, std::int64_t{100000000}))
        ->capture_default_str();
    c_haar->add_option("--out", haar_out, "scatter CSV")->capture_default_str();
    c_haar->add_option("--curve-out", haar_curve_out, "family curve CSV")
        ->capture_default_str();
    c_haar->add_option("--refs-out", haar_refs_out, "GHZ/W reference point CSV")
        ->capture_default_str();
    c_haar->add_option("--curve-points", haar_curve_points, "points in the emitted curve")
        ->check(CLI::Range(2, 100000))
        ->capture_default_str();
    c_haar->add_option("--report", haar_report_out,
                       "write the boundary report JSON here (default stdout)");
    c_haar->add_flag("--average-study", haar_average,
                     "also test the average pair tangle against the curve");
    c_haar->callback([&] {
      auto scatter = entangle::scatter_study(haar_samples, seed);
      {
        auto out = open_out(haar_out);
        entangle::write_scatter_csv(out, scatter);
      }
      {
        auto out = open_out(haar_curve_out);
        entangle::write_curve_csv(out, entangle::ideal_curve(haar_curve_points));
      }
      {
        auto out = open_out(haar_refs_out);
        entangle::write_reference_points_csv(out);
      }
      // dense curve for the check itself; the emitted file stays plot sized
      auto dense = entangle::ideal_curve(2001);
      auto report = entangle::boundary_check(scatter, dense);
      json doc{{"samples", report.sample_count},
               {"violations", report.violation_count},
               {"max_excess", report.max_excess},
               {"max_tau2_min", report.max_tau2_min},
               {"clamped", report.clamped_count},
               {"w_class_fraction", report.w_class_fraction},
               {"tolerance", report.tolerance},
               {"scatter_csv", haar_out},
               {"curve_csv", haar_curve_out},
               {"refs_csv", haar_refs_out}};
      if (haar_average) {
        auto avg = entangle::average_tangle_study(haar_samples, seed, dense);
        doc["average_study"] = {{"exceed_count", avg.exceed_count},
                                {"counterexample_count", avg.counterexample_count},
                                {"max_avg_excess", avg.max_avg_excess}};
      }
      if (haar_report_out.empty()) {
        std::cout << doc.dump(2) << "\n";
      } else {
        open_out(haar_report_out) << doc.dump(2) << "\n";
        std::cout << json{{"report_file", haar_report_out}}.dump(2) << "\n";
      }
    });

    // reproduce
    auto* c_repro = app.add_subcommand(
        "reproduce", "End-to-end recipes producing figure-style data files");
    int repro_fig = 0;
    std::string repro_dir = ".";
    std::int64_t repro_samples = 300000;
    double repro_flux = 480.0;
    int repro_iterations = 10, repro_resamples = 100;
    c_repro->add_option("--fig", repro_fig, "which study: 2, 3 or 4")
        ->required()
        ->check(CLI::IsMember({2, 3, 4}));
    c_repro->add_option("--out-dir", repro_dir, "output directory")->capture_default_str();
    c_repro->add_option("--samples", repro_samples, "Haar samples (fig 4)")
        ->capture_default_str();
    c_repro->add_option("--flux", repro_flux, "flux per acquisition block")
        ->capture_default_str();
    c_repro->add_option("--iterations", repro_iterations, "acquisition blocks (fig 2)")
        ->capture_default_str();
    c_repro->add_option("--resamples", repro_resamples, "error-bar resamples (fig 2)")
        ->capture_default_str();
    c_repro->callback([&] {
      fs::create_directories(repro_dir);
      fs::path dir(repro_dir);
      json summary{{"fig", repro_fig}, {"out_dir", repro_dir}};
      auto note = [&summary](const std::string& key, const fs::path& p) {
        summary[key] = p.string();
      };

      if (repro_fig == 2) {
        auto outcome = entangle::run_circuit(std::numbers::pi / 4);
        entangle::save_state(dir / "fig2_state.json", outcome.state);
        note("state", dir / "fig2_state.json");

        auto truth = entangle::density(outcome.state);
        auto run = entangle::iterative_tomography(truth, repro_iterations, repro_flux, seed);
        {
          auto out = open_out(dir / "fig2_trajectory.csv");
          write_trajectory_csv(out, run);
        }
        note("trajectory", dir / "fig2_trajectory.csv");
        {
          auto out = open_out(dir / "fig2_counts.csv");
          entangle::write_counts_csv(out, run.blocks);
        }
        note("counts", dir / "fig2_counts.csv");

        auto merged = entangle::merge_records(run.blocks);
        auto mc = entangle::monte_carlo_errors(
            merged, repro_resamples, entangle::derive_seed(seed, 3),
            entangle::StateVariant(outcome.state));
        const auto& final_recon = run.trajectory.back().recon;
        auto rep = entangle::robustness_profile(final_recon.rho,
                                                entangle::StateVariant(outcome.state));
        rep.error_bars = mc.stddev;
        json report = report_with_source("fig2_counts.csv", rep);
        report["iterations"] = repro_iterations;
        report["flux_per_iteration"] = repro_flux;
        report["fitted_flux"] = final_recon.fitted_flux;
        open_out(dir / "fig2_report.json") << report.dump(2) << "\n";
        note("report", dir / "fig2_report.json");
        summary["final_fidelity"] = run.trajectory.back().fidelity_vs_truth;
      } else if (repro_fig == 3) {
        const double degs[] = {15.0, 21.0, 28.0, 45.0};
        std::vector<double> thetas;
        for (double d : degs) thetas.push_back(deg2rad(d));
        auto rows = entangle::theta_scan(thetas);
        {
          auto out = open_out(dir / "fig3_ideal.csv");
          entangle::write_theta_scan_csv(out, rows);
        }
        note("ideal", dir / "fig3_ideal.csv");

        auto out = open_out(dir / "fig3_plane.csv");
        out << "theta_deg,traced,tangle,s_linear,fidelity\n";
        std::uint64_t stream = 100;
        for (double d : degs) {
          auto truth = entangle::density(entangle::run_circuit(deg2rad(d)).state);
          for (const std::string traced : {"c", "e", "f"}) {
            auto result = entangle::direct_reduced_tomography(
                truth, traced, repro_flux, entangle::derive_seed(seed, stream++));
            out << fmt_g(d) << ',' << traced << ','
                << fmt_g(entangle::tangle(result.recon.rho)) << ','
                << fmt_g(entangle::linear_entropy(result.recon.rho)) << ','
                << fmt_g(entangle::fidelity(result.recon.rho, result.truth_reduced))
                << '\n';
          }
        }
        note("plane", dir / "fig3_plane.csv");

        {
          auto mems_out = open_out(dir / "fig3_mems.csv");
          mems_out << "concurrence,tangle,s_linear\n";
          for (int i = 0; i <= 100; ++i) {
            double c = i / 100.0;
            auto rho = entangle::mems_state(c);
            mems_out << fmt_g(c) << ',' << fmt_g(entangle::tangle(rho)) << ','
                     << fmt_g(entangle::linear_entropy(rho)) << '\n';
          }
        }
        note("mems_curve", dir / "fig3_mems.csv");
        {
          auto werner_out = open_out(dir / "fig3_werner.csv");
          werner_out << "p,tangle,s_linear\n";
          for (int i = 0; i <= 100; ++i) {
            double p = i / 100.0;
            auto rho = entangle::werner_state(p);
            werner_out << fmt_g(p) << ',' << fmt_g(entangle::tangle(rho)) << ','
                       << fmt_g(entangle::linear_entropy(rho)) << '\n';
          }
        }
        note("werner_curve", dir / "fig3_werner.csv");
      } else {
        auto scatter = entangle::scatter_study(repro_samples, seed);
        {
          auto out = open_out(dir / "fig4_scatter.csv");
          entangle::write_scatter_csv(out, scatter);
        }
        note("scatter", dir / "fig4_scatter.csv");
        {
          auto out = open_out(dir / "fig4_curve.csv");
          entangle::write_curve_csv(out, entangle::ideal_curve(200));
        }
        note("curve", dir / "fig4_curve.csv");
        {
          auto out = open_out(dir / "fig4_refs.csv");
          entangle::write_reference_points_csv(out);
        }
        note("refs", dir / "fig4_refs.csv");

        auto dense = entangle::ideal_curve(2001);
        auto report = entangle::boundary_check(scatter, dense);
        auto avg = entangle::average_tangle_study(repro_samples, seed, dense);
        json doc{{"samples", report.sample_count},
                 {"violations", report.violation_count},
                 {"max_excess", report.max_excess},
                 {"max_tau2_min", report.max_tau2_min},
                 {"clamped", report.clamped_count},
                 {"w_class_fraction", report.w_class_fraction},
                 {"tolerance", report.tolerance},
                 {"average_study",
                  {{"exceed_count", avg.exceed_count},
                   {"counterexample_count", avg.counterexample_count},
                   {"max_avg_excess", avg.max_avg_excess}}}};
        open_out(dir / "fig4_boundary.json") << doc.dump(2) << "\n";
        note("boundary", dir / "fig4_boundary.json");
        summary["violations"] = report.violation_count;
        summary["max_tau2_min"] = report.max_tau2_min;
      }
      std::cout << summary.dump(2) << "\n";
    });

    try {
      app.parse(static_cast<int>(args.size()), args.data());
    } catch (const CLI::ParseError& e) {
      return app.exit(e);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
}
