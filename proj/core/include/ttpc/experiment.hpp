#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ttpc/circuit.hpp"
#include "ttpc/criteria.hpp"
#include "ttpc/homodyne.hpp"

namespace ttpc {

// ---------------------------------------------------------------- config

struct McConfig {
  bool enabled = false;
  std::size_t n = 1'000'000;
  std::optional<std::uint64_t> seed;  ///< runs demand an explicit seed
};

struct OutputConfig {
  std::optional<std::string> json_path;
  std::optional<std::string> csv_path;
};

/// Fully-resolved run description. parse_config() is strict: unknown
/// keys anywhere are a ParseError, squeezing takes exactly one of
/// {"r": ...} / {"db": ...}, and every report embeds the resolved form.
struct ExperimentConfig {
  CircuitParams circuit;
  /// Set when the config specified squeezing in dB; circuit.r1/r2
  /// already carry the derived r.
  std::optional<double> squeezing_db;
  std::optional<Gains> gains;  ///< nullopt = optimize ("auto")
  GainTie gain_tie = GainTie::independent;
  double v0 = 0.25;
  McConfig mc;
  OutputConfig outputs;
};

/// r = db * ln(10) / 20, so that e^{-2r} = 10^{-db/10} exactly.
double r_from_db(double db);
double db_from_r(double r);

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Emits a valid config document (round-trips through parse_config).
std::string config_to_json(const ExperimentConfig& config);

// ------------------------------------------------------------ CSV tables

/// Strict reader for `combo_id,db_below_snl,uncertainty_db` tables;
/// ParseError messages carry the line number.
std::vector<MeasurementRecord> parse_measurements_csv(std::istream& is);
std::vector<MeasurementRecord> load_measurements_csv(
    const std::filesystem::path& path);
void write_measurements_csv(std::ostream& os,
                            std::span<const MeasurementRecord> records);

/// Row-major matrix dump, 17 significant digits per entry.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);

// ------------------------------------------------------- bundled dataset

/// The published measurement campaign shipped with the repo (also in
/// data/paper_dataset.csv): six dB values at gain 0.41, produced from
/// 2.6 dB of initial squeezing.
struct BundledDataset {
  std::string version;
  std::array<MeasurementRecord, 6> records;
  double gain = 0.0;
  double squeezing_db = 0.0;
  double squeezing_db_uncertainty = 0.0;
};
const BundledDataset& paper_dataset();

/// FNV-1a 64-bit, used to pin the shipped CSV byte-for-byte.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

// --------------------------------------------------------------- reports

struct TermReport {
  ComboId id;
  double gain = 0.0;
  double variance = 0.0;
  double snl = 0.0;
  double db_below_snl = 0.0;
};

struct SimulationReport {
  ExperimentConfig config;
  std::array<CriterionGains, 3> resolved_gains;
  std::array<TermReport, 6> terms;
  /// Absent when config.v0 is not 1/4 (bounds undefined there);
  /// criteria_note says why.
  std::optional<std::array<CriterionResult, 3>> criteria;
  std::string criteria_note;
  std::array<double, 4> nullifier_variances{};
  ValidationReport validation;
};
SimulationReport run_simulate(const ExperimentConfig& config);

struct MeasurementReport {
  std::array<CriterionResult, 3> results;
  Gains gains;
  std::vector<MeasurementRecord> records;
};
MeasurementReport run_from_measurements(
    std::span<const MeasurementRecord> records, const Gains& gains);

struct McReport {
  ExperimentConfig config;
  McCriteria mc;
  std::array<CriterionResult, 3> analytic;
  Gains gains;
  /// max over the six terms of |mc variance - analytic| / SE.
  double max_abs_se_ratio = 0.0;
};
McReport run_mc(const ExperimentConfig& config);

struct ComparisonRow {
  std::string quantity;
  std::string paper_value;
  std::string computed_value;
  std::string unit;
  std::string note;
};

struct ReproduceReport {
  std::vector<ComparisonRow> rows;
  /// Criterion values reconstructed from the bundled dataset at its
  /// stated gain.
  std::array<CriterionResult, 3> reconstructed;
  FormulaAuditReport audit;
};
ReproduceReport run_reproduce_paper();

/// Plot-table export, header `quantity,paper_value,computed_value,unit`.
void write_comparison_csv(std::ostream& os,
                          std::span<const ComparisonRow> rows);
std::vector<ComparisonRow> comparison_rows(const SimulationReport& report);

// ------------------------------------------------------------------- fit

struct FitOptions {
  std::optional<double> fixed_eta;  ///< collapse the loss axis
  double r_min = 0.0, r_max = 1.0, r_step = 0.01;
  double eta_min = 0.3, eta_max = 1.0, eta_step = 0.01;
  double refine_tol = 1e-4;
};

/// Least-squares fit of (r, uniform eta) to six measured dB values:
/// objective = sum over combos of (predicted_db - measured_db)^2, with
/// predictions at per-configuration exact optimal gains. Coarse grid
/// plus local pattern refinement; converged=false falls back to the
/// grid optimum.
struct FitResult {
  double r = 0.0;
  double eta = 1.0;
  bool eta_fixed = false;
  double residual_sq_db = 0.0;
  bool converged = true;
  std::array<double, 6> measured_db{};
  std::array<double, 6> predicted_db{};
  std::array<double, 6> residual_db{};  ///< predicted - measured
  std::array<double, 6> fitted_gains{};
};
FitResult fit_measurements(std::span<const MeasurementRecord> records,
                           const FitOptions& options = {});

// --------------------------------------------------------- serialization

std::string to_json(const SimulationReport& report);
std::string to_json(const MeasurementReport& report);
std::string to_json(const McReport& report);
std::string to_json(const ReproduceReport& report);
std::string to_json(const FitResult& result);
std::string to_json(const FormulaAuditReport& report);

std::string render_text(const SimulationReport& report);
std::string render_text(const MeasurementReport& report);
std::string render_text(const McReport& report);
std::string render_text(const ReproduceReport& report);
std::string render_text(const FitResult& result);
std::string render_text(const FormulaAuditReport& report);

}  // namespace ttpc
