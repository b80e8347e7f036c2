// ttpc: simulate and verify four-partite entangled states with total
// three-party correlation, reconstruct verdicts from homodyne
// measurements, and audit the published variance formulas.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ttpc/errors.hpp"
#include "ttpc/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ttpc::ParseError("cannot open output file " + path);
  out << content;
}

void maybe_write_json(const std::optional<std::string>& cli_path,
                      const std::optional<std::string>& config_path,
                      const std::string& json_text) {
  if (cli_path) write_file(*cli_path, json_text);
  else if (config_path) write_file(*config_path, json_text);
}

struct CommonOutputs {
  std::optional<std::string> json_path;
  std::optional<std::string> csv_path;
};

void add_output_options(CLI::App* cmd, CommonOutputs& outputs,
                        bool with_csv = false) {
  cmd->add_option("-o,--output", outputs.json_path,
                  "Write the JSON report to this path");
  if (with_csv)
    cmd->add_option("--csv", outputs.csv_path,
                    "Write the plot table (quantity,paper_value,"
                    "computed_value,unit) to this path");
}

int run(int argc, char** argv) {
  CLI::App app{
      "Simulator/verifier for four-partite entangled optical states "
      "with total three-party correlation"};
  app.require_subcommand(1);

  // --- simulate ---
  auto* simulate = app.add_subcommand(
      "simulate", "Build the four-mode state from a JSON config and "
                  "evaluate nullifiers, variances, and criteria");
  std::string sim_config_path;
  CommonOutputs sim_outputs;
  std::optional<std::string> dump_cov_path;
  simulate->add_option("-c,--config", sim_config_path, "JSON config file")
      ->required();
  add_output_options(simulate, sim_outputs, /*with_csv=*/true);
  simulate->add_option("--dump-cov", dump_cov_path,
                       "Write the output covariance matrix as CSV "
                       "(row-major, 17 significant digits)");

  // --- from-measurements ---
  auto* from_meas = app.add_subcommand(
      "from-measurements", "Reconstruct the three criterion verdicts "
                           "from a measured dB table");
  std::string meas_path;
  double meas_gain = 0.0;
  CommonOutputs meas_outputs;
  from_meas->add_option("data", meas_path,
                        "CSV with combo_id,db_below_snl,uncertainty_db")
      ->required();
  from_meas->add_option("--gain", meas_gain,
                        "Electronic gain applied to every gain slot")
      ->required();
  add_output_options(from_meas, meas_outputs);

  // --- reproduce-paper ---
  auto* reproduce = app.add_subcommand(
      "reproduce-paper", "Compare computed values against the bundled "
                         "published dataset and audit the printed formulas");
  CommonOutputs repro_outputs;
  add_output_options(reproduce, repro_outputs, /*with_csv=*/true);

  // --- fit ---
  auto* fit = app.add_subcommand(
      "fit", "Least-squares fit of (r, uniform eta) to a measured dB table");
  std::string fit_path;
  std::optional<double> fix_eta;
  CommonOutputs fit_outputs;
  fit->add_option("data", fit_path,
                  "CSV with combo_id,db_below_snl,uncertainty_db")
      ->required();
  fit->add_option("--fix-eta", fix_eta, "Hold eta fixed and fit only r");
  add_output_options(fit, fit_outputs);

  // --- mc ---
  auto* mc = app.add_subcommand(
      "mc", "Monte Carlo homodyne validation of the analytic variances");
  std::string mc_config_path;
  std::optional<std::uint64_t> mc_seed;
  std::optional<std::string> mc_samples_path;
  CommonOutputs mc_outputs;
  mc->add_option("-c,--config", mc_config_path, "JSON config file")
      ->required();
  mc->add_option("--seed", mc_seed, "Override the config RNG seed");
  mc->add_option("--dump-samples", mc_samples_path,
                 "Write raw samples as CSV (combo_id,sample_index,value)");
  add_output_options(mc, mc_outputs);

  // --- audit-eq6 ---
  auto* audit = app.add_subcommand(
      "audit-eq6", "Cross-check the six published correlation-variance "
                   "formulas against the covariance engine");
  CommonOutputs audit_outputs;
  add_output_options(audit, audit_outputs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0 through here; usage errors land on the
    // same exit code as any other invalid input.
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (simulate->parsed()) {
    const ttpc::ExperimentConfig config = ttpc::load_config(sim_config_path);
    const ttpc::SimulationReport report = ttpc::run_simulate(config);
    std::cout << ttpc::render_text(report);
    maybe_write_json(sim_outputs.json_path, config.outputs.json_path,
                     ttpc::to_json(report));
    const std::optional<std::string> csv_path =
        sim_outputs.csv_path ? sim_outputs.csv_path
                             : config.outputs.csv_path;
    if (csv_path) {
      std::ofstream out(*csv_path);
      if (!out) throw ttpc::ParseError("cannot open output file " + *csv_path);
      const auto rows = ttpc::comparison_rows(report);
      ttpc::write_comparison_csv(out, rows);
    }
    if (dump_cov_path) {
      std::ofstream out(*dump_cov_path);
      if (!out)
        throw ttpc::ParseError("cannot open output file " + *dump_cov_path);
      const ttpc::GaussianState state = ttpc::build_ttpc(
          config.circuit, ttpc::Convention{config.v0});
      ttpc::write_matrix_csv(out, state.cov());
    }
    if (!report.validation.ok)
      throw ttpc::NumericalFailureError("output state failed validation: " +
                                        report.validation.message);
    return kExitOk;
  }

  if (from_meas->parsed()) {
    const auto records = ttpc::load_measurements_csv(meas_path);
    ttpc::Gains gains;
    gains.gx1 = gains.gx2 = gains.gx3 = gains.gy4 = meas_gain;
    const ttpc::MeasurementReport report =
        ttpc::run_from_measurements(records, gains);
    std::cout << ttpc::render_text(report);
    maybe_write_json(meas_outputs.json_path, std::nullopt,
                     ttpc::to_json(report));
    return kExitOk;
  }

  if (reproduce->parsed()) {
    const ttpc::ReproduceReport report = ttpc::run_reproduce_paper();
    std::cout << ttpc::render_text(report);
    maybe_write_json(repro_outputs.json_path, std::nullopt,
                     ttpc::to_json(report));
    if (repro_outputs.csv_path) {
      std::ofstream out(*repro_outputs.csv_path);
      if (!out)
        throw ttpc::ParseError("cannot open output file " +
                               *repro_outputs.csv_path);
      ttpc::write_comparison_csv(out, report.rows);
    }
    return kExitOk;
  }

  if (fit->parsed()) {
    const auto records = ttpc::load_measurements_csv(fit_path);
    ttpc::FitOptions options;
    options.fixed_eta = fix_eta;
    const ttpc::FitResult result = ttpc::fit_measurements(records, options);
    std::cout << ttpc::render_text(result);
    maybe_write_json(fit_outputs.json_path, std::nullopt,
                     ttpc::to_json(result));
    return kExitOk;
  }

  if (mc->parsed()) {
    ttpc::ExperimentConfig config = ttpc::load_config(mc_config_path);
    config.mc.enabled = true;  // the subcommand is the switch
    if (mc_seed) config.mc.seed = *mc_seed;
    const ttpc::McReport report = ttpc::run_mc(config);
    std::cout << ttpc::render_text(report);
    maybe_write_json(mc_outputs.json_path, config.outputs.json_path,
                     ttpc::to_json(report));
    if (mc_samples_path) {
      const ttpc::GaussianState state =
          ttpc::build_ttpc(config.circuit, ttpc::Convention{config.v0});
      std::vector<ttpc::LabeledCombination> combos;
      for (ttpc::ComboId id : ttpc::kAllComboIds) {
        const ttpc::CriterionTerm& term = ttpc::criterion_term(id);
        combos.push_back({ttpc::to_string(id),
                          term.realized(report.gains[term.slot.name])});
      }
      const auto batches = ttpc::sample_combinations(
          state, combos, config.mc.n, *config.mc.seed);
      std::ofstream out(*mc_samples_path);
      if (!out)
        throw ttpc::ParseError("cannot open output file " + *mc_samples_path);
      ttpc::write_batches_csv(out, batches);
    }
    return kExitOk;
  }

  if (audit->parsed()) {
    const ttpc::FormulaAuditReport report = ttpc::audit_reference_formulas();
    std::cout << ttpc::render_text(report);
    maybe_write_json(audit_outputs.json_path, std::nullopt,
                     ttpc::to_json(report));
    return kExitOk;
  }

  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ttpc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ttpc::NumericalFailureError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
