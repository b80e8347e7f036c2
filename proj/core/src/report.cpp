#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ttpc/errors.hpp"
#include "ttpc/experiment.hpp"

namespace ttpc {
namespace {

using nlohmann::json;

constexpr double kPaperV0 = 0.25;

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

json gains_json(const Gains& gains) {
  return json{{"gx1", gains.gx1},
              {"gx2", gains.gx2},
              {"gx3", gains.gx3},
              {"gy4", gains.gy4}};
}

json criterion_result_json(const CriterionResult& result) {
  json j{{"id", to_string(result.id)},
         {"term1_variance", result.term1_variance},
         {"term2_variance", result.term2_variance},
         {"lhs", result.lhs},
         {"bound", result.bound},
         {"satisfied", result.satisfied},
         {"gains", {{"term1", result.gains_used.term1},
                    {"term2", result.gains_used.term2}}}};
  if (result.lhs_uncertainty)
    j["lhs_uncertainty"] = *result.lhs_uncertainty;
  else
    j["lhs_uncertainty"] = nullptr;
  return j;
}

json criteria_json(const std::array<CriterionResult, 3>& results) {
  json arr = json::array();
  for (const CriterionResult& r : results) arr.push_back(criterion_result_json(r));
  return arr;
}

std::string verdict_word(bool satisfied) {
  return satisfied ? "satisfied" : "not satisfied";
}

void render_criteria(std::ostringstream& os,
                     const std::array<CriterionResult, 3>& results) {
  for (const CriterionResult& r : results) {
    os << "criterion " << to_string(r.id) << ": lhs " << fmt("%.6f", r.lhs);
    if (r.lhs_uncertainty) os << " +- " << fmt("%.6f", *r.lhs_uncertainty);
    os << "  bound " << fmt("%.6f", r.bound) << "  " << verdict_word(r.satisfied)
       << "  (terms " << fmt("%.6f", r.term1_variance) << " + "
       << fmt("%.6f", r.term2_variance) << ", gains "
       << fmt("%.6f", r.gains_used.term1) << ", "
       << fmt("%.6f", r.gains_used.term2) << ")\n";
  }
}

}  // namespace

SimulationReport run_simulate(const ExperimentConfig& config) {
  config.circuit.check();
  const Convention conv{config.v0};
  const GaussianState state = build_ttpc(config.circuit, conv);

  SimulationReport report;
  report.config = config;
  if (config.gains) {
    for (const Criterion& crit : criterion_set())
      report.resolved_gains[static_cast<std::size_t>(crit.id)] = {
          (*config.gains)[crit.term1.slot.name],
          (*config.gains)[crit.term2.slot.name]};
  } else {
    report.resolved_gains = resolve_optimal_gains(state, config.gain_tie);
  }

  for (ComboId id : kAllComboIds) {
    const auto k = static_cast<std::size_t>(id);
    const CriterionTerm& term = criterion_term(id);
    const CriterionGains& pair = report.resolved_gains[k / 2];
    const double g = k % 2 == 0 ? pair.term1 : pair.term2;
    const QuadCombination combo = term.realized(g);
    TermReport& row = report.terms[k];
    row.id = id;
    row.gain = g;
    row.variance = combination_variance(state, combo);
    row.snl = snl_of_combination(combo, conv);
    row.db_below_snl = -10.0 * std::log10(row.variance / row.snl);
  }

  if (std::abs(config.v0 - kPaperV0) <= 1e-12) {
    report.criteria = evaluate_criteria(state, report.resolved_gains);
  } else {
    report.criteria_note =
        "criterion bounds are defined in the v0 = 1/4 convention; "
        "verdicts omitted for v0 = " + fmt("%.6g", config.v0);
  }
  report.nullifier_variances = nullifier_variances(state);
  report.validation = validate(state);
  return report;
}

MeasurementReport run_from_measurements(
    std::span<const MeasurementRecord> records, const Gains& gains) {
  MeasurementReport report;
  report.results = criteria_from_measurements(records, gains);
  report.gains = gains;
  report.records.assign(records.begin(), records.end());
  return report;
}

McReport run_mc(const ExperimentConfig& config) {
  if (!config.mc.enabled)
    throw std::invalid_argument("mc: config has mc.enabled = false");
  if (!config.mc.seed)
    throw std::invalid_argument(
        "mc: an explicit seed is required (config mc.seed or --seed)");
  const GaussianState state =
      build_ttpc(config.circuit, Convention{config.v0});
  McReport report;
  report.config = config;
  report.gains = config.gains ? *config.gains : optimal_named_gains(state);
  report.mc = mc_criteria(state, report.gains, config.mc.n, *config.mc.seed);
  report.analytic = evaluate_criteria(state, report.gains);
  report.max_abs_se_ratio = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    const VarianceEstimate& est = report.mc.term_estimates[k];
    if (est.standard_error > 0.0) {
      const double ratio =
          std::abs(est.variance - report.mc.analytic_variances[k]) /
          est.standard_error;
      report.max_abs_se_ratio = std::max(report.max_abs_se_ratio, ratio);
    }
  }
  return report;
}

ReproduceReport run_reproduce_paper() {
  const BundledDataset& ds = paper_dataset();
  Gains gains;
  gains.gx1 = gains.gx2 = gains.gx3 = gains.gy4 = ds.gain;

  ReproduceReport report;
  report.reconstructed = criteria_from_measurements(ds.records, gains);
  report.audit = audit_reference_formulas();

  const double r_hat = r_from_db(ds.squeezing_db);
  const GaussianState lossless = build_ttpc(CircuitParams::symmetric(r_hat));
  const std::array<CriterionGains, 3> opt =
      resolve_optimal_gains(lossless, GainTie::independent);

  auto& rows = report.rows;
  rows.push_back({"initial_squeezing_db", fmt("%.9g", ds.squeezing_db) + " +- " +
                      fmt("%.9g", ds.squeezing_db_uncertainty),
                  fmt("%.9g", db_from_r(r_hat)), "dB", "round trip through r"});
  rows.push_back({"initial_squeezing_r", "0.30 +- 0.01", fmt("%.9g", r_hat), "",
                  "r = db ln(10)/20"});
  {
    const GaussianState epr = epr_pair(r_hat);
    const QuadCombination x_sum{{0, Quad::X, 1.0}, {1, Quad::X, 1.0}};
    rows.push_back({"epr_sum_variance", "(1/2) e^{-2r}",
                    fmt("%.9g", combination_variance(epr, x_sum)), "var",
                    "two-mode squeezed pair at the fitted r"});
  }
  rows.push_back({"optimal_gain_formula", fmt("%.9g", ds.gain),
                  fmt("%.9g", optimal_gain_formula(r_hat)), "",
                  "MISMATCH: tanh(2r) at the published squeezing differs "
                  "from the published operating gain"});

  for (ComboId id : kAllComboIds) {
    const auto k = static_cast<std::size_t>(id);
    const CriterionTerm& term = criterion_term(id);
    const CriterionGains& pair = opt[k / 2];
    const double g = k % 2 == 0 ? pair.term1 : pair.term2;
    const QuadCombination combo = term.realized(g);
    const double variance = combination_variance(lossless, combo);
    const double db = -10.0 * std::log10(variance / snl_of_combination(combo));
    const MeasurementRecord& rec = ds.records[k];
    rows.push_back({to_string(id) + "_db_below_snl",
                    fmt("%.9g", rec.db_below_snl) + " +- " +
                        fmt("%.9g", rec.uncertainty_db),
                    fmt("%.9g", db), "dB",
                    "lossless prediction at optimal gains"});
  }

  static const char* kPaperCriteria[3] = {"1.11 +- 0.01", "0.94 +- 0.01",
                                          "0.97 +- 0.01"};
  for (const CriterionResult& res : report.reconstructed) {
    const auto i = static_cast<std::size_t>(res.id);
    const double rounded = std::round(res.lhs * 100.0) / 100.0;
    rows.push_back({"criterion_" + to_string(res.id), kPaperCriteria[i],
                    fmt("%.9g", res.lhs), "var",
                    "reconstructed from the bundled dB table at gain " +
                        fmt("%.9g", ds.gain) + "; +- " +
                        fmt("%.4f", res.lhs_uncertainty.value_or(0.0)) +
                        " propagated; rounds to " + fmt("%.2f", rounded) +
                        "; " + verdict_word(res.satisfied)});
  }

  for (const FormulaAuditLine& line : report.audit.lines) {
    const bool ok = line.status == FormulaStatus::confirmed;
    std::string note = ok ? "max relative deviation " +
                                fmt("%.3g", line.max_rel_deviation)
                          : line.note;
    rows.push_back({"formula_line_" + std::to_string(line.line) + "_" +
                        to_string(line.combo),
                    "as printed", ok ? "CONFIRMED" : "DISCREPANT", "", note});
  }
  return report;
}

void write_comparison_csv(std::ostream& os,
                          std::span<const ComparisonRow> rows) {
  os << "quantity,paper_value,computed_value,unit\n";
  for (const ComparisonRow& row : rows)
    os << row.quantity << ',' << row.paper_value << ',' << row.computed_value
       << ',' << row.unit << '\n';
}

std::vector<ComparisonRow> comparison_rows(const SimulationReport& report) {
  std::vector<ComparisonRow> rows;
  for (const TermReport& term : report.terms) {
    rows.push_back({to_string(term.id) + "_variance", "",
                    fmt("%.9g", term.variance), "var", ""});
    rows.push_back({to_string(term.id) + "_db_below_snl", "",
                    fmt("%.9g", term.db_below_snl), "dB", ""});
  }
  if (report.criteria)
    for (const CriterionResult& res : *report.criteria)
      rows.push_back({"criterion_" + to_string(res.id), "",
                      fmt("%.9g", res.lhs), "var", ""});
  for (std::size_t i = 0; i < report.nullifier_variances.size(); ++i)
    rows.push_back({"nullifier_" + std::to_string(i + 1), "",
                    fmt("%.9g", report.nullifier_variances[i]), "var", ""});
  return rows;
}

// --------------------------------------------------------- serialization

std::string to_json(const SimulationReport& report) {
  json root;
  root["kind"] = "simulate";
  root["config"] = json::parse(config_to_json(report.config));
  root["derived"] = {
      {"r1", report.config.circuit.r1},
      {"r2", report.config.circuit.r2},
      {"squeezing_db", report.config.squeezing_db
                           ? json(*report.config.squeezing_db)
                           : json(db_from_r(report.config.circuit.r1))}};
  json gains;
  static const char* kCritNames[3] = {"I", "II", "III"};
  for (std::size_t i = 0; i < 3; ++i)
    gains[kCritNames[i]] = {{"term1", report.resolved_gains[i].term1},
                            {"term2", report.resolved_gains[i].term2}};
  root["resolved_gains"] = gains;
  json terms = json::array();
  for (const TermReport& term : report.terms)
    terms.push_back({{"combo_id", to_string(term.id)},
                     {"gain", term.gain},
                     {"variance", term.variance},
                     {"snl", term.snl},
                     {"db_below_snl", term.db_below_snl}});
  root["terms"] = terms;
  root["criteria"] =
      report.criteria ? criteria_json(*report.criteria) : json(nullptr);
  root["criteria_note"] = report.criteria_note;
  root["nullifier_variances"] = report.nullifier_variances;
  root["validation"] = {
      {"ok", report.validation.ok},
      {"max_symmetry_error", report.validation.max_symmetry_error},
      {"min_heisenberg_eigenvalue",
       report.validation.min_heisenberg_eigenvalue},
      {"message", report.validation.message}};
  return root.dump(2);
}

std::string to_json(const MeasurementReport& report) {
  json root;
  root["kind"] = "from-measurements";
  root["gains"] = gains_json(report.gains);
  json records = json::array();
  for (const MeasurementRecord& rec : report.records)
    records.push_back({{"combo_id", to_string(rec.combo_id)},
                       {"db_below_snl", rec.db_below_snl},
                       {"uncertainty_db", rec.uncertainty_db}});
  root["records"] = records;
  root["criteria"] = criteria_json(report.results);
  return root.dump(2);
}

std::string to_json(const McReport& report) {
  json root;
  root["kind"] = "mc";
  root["config"] = json::parse(config_to_json(report.config));
  root["n"] = report.mc.n;
  root["seed"] = report.mc.seed;
  root["gains"] = gains_json(report.gains);
  json terms = json::array();
  for (std::size_t k = 0; k < 6; ++k) {
    const VarianceEstimate& est = report.mc.term_estimates[k];
    const double analytic = report.mc.analytic_variances[k];
    terms.push_back(
        {{"combo_id", to_string(kAllComboIds[k])},
         {"analytic_variance", analytic},
         {"mc_variance", est.variance},
         {"standard_error", est.standard_error},
         {"db_below_snl", est.db_below_snl},
         {"abs_se_ratio", est.standard_error > 0.0
                              ? std::abs(est.variance - analytic) /
                                    est.standard_error
                              : 0.0}});
  }
  root["terms"] = terms;
  root["criteria_mc"] = criteria_json(report.mc.results);
  root["criteria_analytic"] = criteria_json(report.analytic);
  root["max_abs_se_ratio"] = report.max_abs_se_ratio;
  return root.dump(2);
}

std::string to_json(const FormulaAuditReport& report) {
  json root;
  root["kind"] = "formula-audit";
  root["tolerance"] = report.tolerance;
  root["r_grid"] = report.r_grid;
  root["g_grid"] = report.g_grid;
  json lines = json::array();
  for (const FormulaAuditLine& line : report.lines) {
    json j{{"line", line.line},
           {"combo_id", to_string(line.combo)},
           {"status", line.status == FormulaStatus::confirmed ? "CONFIRMED"
                                                              : "DISCREPANT"},
           {"max_rel_deviation", line.max_rel_deviation},
           {"note", line.note}};
    if (line.line == 1) j["max_gap_rel_error"] = line.max_gap_rel_error;
    lines.push_back(j);
  }
  root["lines"] = lines;
  return root.dump(2);
}

std::string to_json(const ReproduceReport& report) {
  json root;
  root["kind"] = "reproduce-paper";
  json rows = json::array();
  for (const ComparisonRow& row : report.rows)
    rows.push_back({{"quantity", row.quantity},
                    {"paper_value", row.paper_value},
                    {"computed_value", row.computed_value},
                    {"unit", row.unit},
                    {"note", row.note}});
  root["rows"] = rows;
  root["criteria"] = criteria_json(report.reconstructed);
  root["audit"] = json::parse(to_json(report.audit));
  return root.dump(2);
}

std::string to_json(const FitResult& result) {
  json root;
  root["kind"] = "fit";
  root["r"] = result.r;
  root["eta"] = result.eta;
  root["eta_fixed"] = result.eta_fixed;
  root["residual_sq_db"] = result.residual_sq_db;
  root["converged"] = result.converged;
  json terms = json::array();
  for (std::size_t k = 0; k < 6; ++k)
    terms.push_back({{"combo_id", to_string(kAllComboIds[k])},
                     {"measured_db", result.measured_db[k]},
                     {"predicted_db", result.predicted_db[k]},
                     {"residual_db", result.residual_db[k]},
                     {"gain", result.fitted_gains[k]}});
  root["terms"] = terms;
  return root.dump(2);
}

// --------------------------------------------------------- text rendering

std::string render_text(const SimulationReport& report) {
  std::ostringstream os;
  os << "four-mode output: r1 " << fmt("%.6f", report.config.circuit.r1)
     << ", r2 " << fmt("%.6f", report.config.circuit.r2) << ", bs_phase "
     << fmt("%.6f", report.config.circuit.bs_phase) << ", v0 "
     << fmt("%.6g", report.config.v0) << "\n";
  os << "losses:";
  for (double eta : report.config.circuit.losses) os << ' ' << fmt("%.4g", eta);
  os << "  escape:";
  for (double eta : report.config.circuit.nopa_escape)
    os << ' ' << fmt("%.4g", eta);
  os << "\n";
  os << "validation: " << (report.validation.ok ? "ok" : "FAILED")
     << " (symmetry err " << fmt("%.3g", report.validation.max_symmetry_error)
     << ", min heisenberg eig "
     << fmt("%.3g", report.validation.min_heisenberg_eigenvalue) << ")";
  if (!report.validation.ok) os << "  " << report.validation.message;
  os << "\n";
  os << "nullifier variances:";
  for (double v : report.nullifier_variances) os << ' ' << fmt("%.6f", v);
  os << "\n\n";
  os << "term   gain       variance   snl        dB below SNL\n";
  for (const TermReport& term : report.terms) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-6s %9.6f  %9.6f  %9.6f  %6.3f\n",
                  to_string(term.id).c_str(), term.gain, term.variance,
                  term.snl, term.db_below_snl);
    os << buf;
  }
  os << "\n";
  if (report.criteria) {
    render_criteria(os, *report.criteria);
  } else {
    os << report.criteria_note << "\n";
  }
  return os.str();
}

std::string render_text(const MeasurementReport& report) {
  std::ostringstream os;
  os << "reconstruction from " << report.records.size()
     << " measured combinations (gains gx1 "
     << fmt("%.6g", report.gains.gx1) << ", gx2 "
     << fmt("%.6g", report.gains.gx2) << ", gx3 "
     << fmt("%.6g", report.gains.gx3) << ", gy4 "
     << fmt("%.6g", report.gains.gy4) << ")\n";
  render_criteria(os, report.results);
  return os.str();
}

std::string render_text(const McReport& report) {
  std::ostringstream os;
  os << "monte carlo: n " << report.mc.n << ", seed " << report.mc.seed
     << "\n\n";
  os << "term   analytic    mc          SE          |diff|/SE\n";
  for (std::size_t k = 0; k < 6; ++k) {
    const VarianceEstimate& est = report.mc.term_estimates[k];
    const double analytic = report.mc.analytic_variances[k];
    const double ratio = est.standard_error > 0.0
                             ? std::abs(est.variance - analytic) /
                                   est.standard_error
                             : 0.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-6s %10.6f  %10.6f  %10.3g  %6.2f\n",
                  to_string(kAllComboIds[k]).c_str(), analytic, est.variance,
                  est.standard_error, ratio);
    os << buf;
  }
  os << "max |diff|/SE: " << fmt("%.2f", report.max_abs_se_ratio) << "\n\n";
  os << "criteria from MC estimates:\n";
  render_criteria(os, report.mc.results);
  return os.str();
}

std::string render_text(const ReproduceReport& report) {
  std::ostringstream os;
  os << "quantity                 paper            computed       unit  note\n";
  for (const ComparisonRow& row : report.rows) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-24s %-16s %-14s %-5s %s\n",
                  row.quantity.c_str(), row.paper_value.c_str(),
                  row.computed_value.c_str(), row.unit.c_str(),
                  row.note.c_str());
    os << buf;
  }
  return os.str();
}

std::string render_text(const FitResult& result) {
  std::ostringstream os;
  os << "fit: r " << fmt("%.6f", result.r) << ", eta "
     << fmt("%.6f", result.eta) << (result.eta_fixed ? " (fixed)" : "")
     << ", residual " << fmt("%.6f", result.residual_sq_db) << " dB^2"
     << (result.converged ? "" : "  WARNING: refinement did not converge; "
                                 "returning the coarse-grid optimum")
     << "\n\n";
  os << "term   measured  predicted  residual   gain\n";
  for (std::size_t k = 0; k < 6; ++k) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-6s %8.3f  %9.3f  %8.3f  %8.6f\n",
                  to_string(kAllComboIds[k]).c_str(), result.measured_db[k],
                  result.predicted_db[k], result.residual_db[k],
                  result.fitted_gains[k]);
    os << buf;
  }
  return os.str();
}

std::string render_text(const FormulaAuditReport& report) {
  std::ostringstream os;
  os << "published-formula audit (tolerance " << fmt("%.1g", report.tolerance)
     << ", " << report.r_grid.size() << " x " << report.g_grid.size()
     << " grid)\n";
  for (const FormulaAuditLine& line : report.lines) {
    os << "line " << line.line << " (" << to_string(line.combo) << "): "
       << (line.status == FormulaStatus::confirmed ? "CONFIRMED" : "DISCREPANT")
       << ", max rel deviation " << fmt("%.3g", line.max_rel_deviation);
    if (line.line == 1)
      os << ", gap matches (3/2) e^{-2r} to "
         << fmt("%.3g", line.max_gap_rel_error);
    if (!line.note.empty()) os << "\n       " << line.note;
    os << "\n";
  }
  return os.str();
}

}  // namespace ttpc
