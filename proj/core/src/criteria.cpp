#include "ttpc/criteria.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ttpc/circuit.hpp"
#include "ttpc/errors.hpp"

namespace ttpc {
namespace {

const double kSqrt2 = std::numbers::sqrt2;
constexpr double kPaperV0 = 0.25;
constexpr double kConventionTol = 1e-12;
constexpr double kAuditTol = 1e-12;

void require_paper_convention(const GaussianState& state, const char* who) {
  if (std::abs(state.convention().v0 - kPaperV0) > kConventionTol)
    throw ConventionMismatchError(
        std::string(who) +
        ": criterion bounds are fixed in the v0 = 1/4 convention; "
        "rescale_convention first");
}

void require_four_modes(const GaussianState& state, const char* who) {
  if (state.n_modes() != 4)
    throw std::invalid_argument(std::string(who) +
                                ": state must have exactly 4 modes");
}

QuadCombination slot_base(const GainSlot& slot) {
  return QuadCombination{{slot.mode, slot.quad, 1.0}};
}

// Var(term(g)) = Vf + 2 w C + w^2 Vb with w = sign * multiplier * g; the
// parabola in g has vertex at g* = -sign * C / (multiplier * Vb).
struct SlotQuadratic {
  double c = 0.0;   // Cov(fixed, base)
  double vb = 0.0;  // Var(base)
};

SlotQuadratic slot_quadratic(const GaussianState& state,
                             const CriterionTerm& term) {
  SlotQuadratic q;
  q.c = combination_covariance(state, term.fixed, slot_base(term.slot));
  q.vb = combination_variance(state, slot_base(term.slot));
  if (!(q.vb > 1e-12 * state.convention().v0))
    throw SingularInputError("optimal gain: slot quadrature " +
                             to_string(term.id) +
                             " has (near-)zero variance");
  return q;
}

}  // namespace

std::string to_string(CriterionId id) {
  switch (id) {
    case CriterionId::I: return "I";
    case CriterionId::II: return "II";
    case CriterionId::III: return "III";
  }
  throw std::invalid_argument("bad CriterionId");
}

std::string to_string(ComboId id) {
  switch (id) {
    case ComboId::I1: return "I1";
    case ComboId::I2: return "I2";
    case ComboId::II1: return "II1";
    case ComboId::II2: return "II2";
    case ComboId::III1: return "III1";
    case ComboId::III2: return "III2";
  }
  throw std::invalid_argument("bad ComboId");
}

std::optional<ComboId> parse_combo_id(std::string_view text) {
  for (ComboId id : kAllComboIds)
    if (text == to_string(id)) return id;
  return std::nullopt;
}

std::string to_string(GainName name) {
  switch (name) {
    case GainName::gx1: return "gx1";
    case GainName::gx2: return "gx2";
    case GainName::gx3: return "gx3";
    case GainName::gy4: return "gy4";
  }
  throw std::invalid_argument("bad GainName");
}

double Gains::operator[](GainName name) const {
  switch (name) {
    case GainName::gx1: return gx1;
    case GainName::gx2: return gx2;
    case GainName::gx3: return gx3;
    case GainName::gy4: return gy4;
  }
  throw std::invalid_argument("bad GainName");
}

double& Gains::operator[](GainName name) {
  switch (name) {
    case GainName::gx1: return gx1;
    case GainName::gx2: return gx2;
    case GainName::gx3: return gx3;
    case GainName::gy4: return gy4;
  }
  throw std::invalid_argument("bad GainName");
}

QuadCombination CriterionTerm::realized(double g) const {
  if (!std::isfinite(g))
    throw std::invalid_argument("CriterionTerm: non-finite gain");
  QuadCombination combo = fixed;
  combo.add(slot.mode, slot.quad, slot.sign * slot.multiplier * g);
  return combo;
}

const std::array<Criterion, 3>& criterion_set() {
  // Modes are b1..b4 = 0..3. Gain slots:
  //   I1:  sqrt2 X_1 + Y_2 + g_x1 X_0            bound contribution
  //   I2:  Y_1 + sqrt2 X_2 - g_y4 Y_3
  //   II1: X_0 + Y_2 + sqrt2 g_x2 X_1
  //   II2: Y_0 + X_2 - sqrt2 g_y4 Y_3
  //   III1: X_1 + X_3 + sqrt2 g_x1 X_0
  //   III2: Y_1 - Y_3 + sqrt2 g_x3 X_2
  static const std::array<Criterion, 3> set = {
      Criterion{
          CriterionId::I,
          CriterionTerm{ComboId::I1,
                        QuadCombination{{1, Quad::X, kSqrt2}, {2, Quad::Y, 1.0}},
                        GainSlot{GainName::gx1, 0, Quad::X, 1.0, +1.0}},
          CriterionTerm{ComboId::I2,
                        QuadCombination{{1, Quad::Y, 1.0}, {2, Quad::X, kSqrt2}},
                        GainSlot{GainName::gy4, 3, Quad::Y, 1.0, -1.0}},
          kSqrt2},
      Criterion{
          CriterionId::II,
          CriterionTerm{ComboId::II1,
                        QuadCombination{{0, Quad::X, 1.0}, {2, Quad::Y, 1.0}},
                        GainSlot{GainName::gx2, 1, Quad::X, kSqrt2, +1.0}},
          CriterionTerm{ComboId::II2,
                        QuadCombination{{0, Quad::Y, 1.0}, {2, Quad::X, 1.0}},
                        GainSlot{GainName::gy4, 3, Quad::Y, kSqrt2, -1.0}},
          1.0},
      Criterion{
          CriterionId::III,
          CriterionTerm{ComboId::III1,
                        QuadCombination{{1, Quad::X, 1.0}, {3, Quad::X, 1.0}},
                        GainSlot{GainName::gx1, 0, Quad::X, kSqrt2, +1.0}},
          CriterionTerm{ComboId::III2,
                        QuadCombination{{1, Quad::Y, 1.0}, {3, Quad::Y, -1.0}},
                        GainSlot{GainName::gx3, 2, Quad::X, kSqrt2, +1.0}},
          1.0},
  };
  return set;
}

const Criterion& criterion(CriterionId id) {
  return criterion_set()[static_cast<std::size_t>(id)];
}

const CriterionTerm& criterion_term(ComboId id) {
  const int index = static_cast<int>(id);
  const Criterion& crit = criterion_set()[static_cast<std::size_t>(index / 2)];
  return index % 2 == 0 ? crit.term1 : crit.term2;
}

CriterionResult evaluate_criterion(const GaussianState& state,
                                   const Criterion& crit,
                                   const CriterionGains& gains) {
  require_paper_convention(state, "evaluate_criterion");
  require_four_modes(state, "evaluate_criterion");
  CriterionResult result;
  result.id = crit.id;
  result.term1_variance =
      combination_variance(state, crit.term1.realized(gains.term1));
  result.term2_variance =
      combination_variance(state, crit.term2.realized(gains.term2));
  result.lhs = result.term1_variance + result.term2_variance;
  result.bound = crit.bound;
  result.satisfied = result.lhs < result.bound;
  result.gains_used = gains;
  return result;
}

std::array<CriterionResult, 3> evaluate_criteria(const GaussianState& state,
                                                 const Gains& gains) {
  std::array<CriterionGains, 3> per_criterion;
  for (const Criterion& crit : criterion_set())
    per_criterion[static_cast<std::size_t>(crit.id)] = {
        gains[crit.term1.slot.name], gains[crit.term2.slot.name]};
  return evaluate_criteria(state, per_criterion);
}

std::array<CriterionResult, 3> evaluate_criteria(
    const GaussianState& state, const std::array<CriterionGains, 3>& gains) {
  std::array<CriterionResult, 3> out;
  for (const Criterion& crit : criterion_set()) {
    const auto i = static_cast<std::size_t>(crit.id);
    out[i] = evaluate_criterion(state, crit, gains[i]);
  }
  return out;
}

CriterionGains optimal_gains_exact(const GaussianState& state,
                                   const Criterion& crit) {
  require_four_modes(state, "optimal_gains_exact");
  const SlotQuadratic q1 = slot_quadratic(state, crit.term1);
  const SlotQuadratic q2 = slot_quadratic(state, crit.term2);
  return {-crit.term1.slot.sign * q1.c / (crit.term1.slot.multiplier * q1.vb),
          -crit.term2.slot.sign * q2.c / (crit.term2.slot.multiplier * q2.vb)};
}

Gains optimal_named_gains(const GaussianState& state) {
  require_four_modes(state, "optimal_named_gains");
  // Minimize, per name, the summed variances of every term carrying it:
  // g* = -sum_k sign_k mult_k C_k / (sum_k mult_k^2 * Vb).
  Gains gains;
  for (GainName name : {GainName::gx1, GainName::gx2, GainName::gx3,
                        GainName::gy4}) {
    double numerator = 0.0;
    double denominator = 0.0;
    for (const Criterion& crit : criterion_set())
      for (const CriterionTerm* term : {&crit.term1, &crit.term2}) {
        if (term->slot.name != name) continue;
        const SlotQuadratic q = slot_quadratic(state, *term);
        numerator -= term->slot.sign * term->slot.multiplier * q.c;
        denominator += term->slot.multiplier * term->slot.multiplier * q.vb;
      }
    gains[name] = numerator / denominator;
  }
  return gains;
}

std::array<CriterionGains, 3> resolve_optimal_gains(const GaussianState& state,
                                                    GainTie tie) {
  std::array<CriterionGains, 3> out;
  if (tie == GainTie::independent) {
    for (const Criterion& crit : criterion_set())
      out[static_cast<std::size_t>(crit.id)] =
          optimal_gains_exact(state, crit);
    return out;
  }
  const Gains named = optimal_named_gains(state);
  for (const Criterion& crit : criterion_set())
    out[static_cast<std::size_t>(crit.id)] = {named[crit.term1.slot.name],
                                              named[crit.term2.slot.name]};
  return out;
}

double optimal_gain_formula(double r) {
  if (!std::isfinite(r) || r < 0.0)
    throw std::invalid_argument("optimal_gain_formula: r must be >= 0");
  return std::tanh(2.0 * r);
}

double snl_of_combination(const QuadCombination& combo,
                          const Convention& convention) {
  if (!(convention.v0 > 0.0) || !std::isfinite(convention.v0))
    throw std::invalid_argument("snl_of_combination: v0 must be > 0");
  return convention.v0 * combo.coeff_norm_sq();
}

double variance_from_db(const QuadCombination& combo, double db_below_snl,
                        const Convention& convention) {
  if (!std::isfinite(db_below_snl))
    throw std::invalid_argument("variance_from_db: non-finite db");
  return snl_of_combination(combo, convention) *
         std::pow(10.0, -db_below_snl / 10.0);
}

std::array<CriterionResult, 3> criteria_from_measurements(
    std::span<const MeasurementRecord> records, const Gains& gains) {
  std::array<const MeasurementRecord*, 6> by_id{};
  for (const MeasurementRecord& rec : records) {
    const auto i = static_cast<std::size_t>(rec.combo_id);
    if (by_id[i])
      throw std::invalid_argument(
          "criteria_from_measurements: duplicate combo_id " +
          to_string(rec.combo_id));
    if (!std::isfinite(rec.db_below_snl))
      throw std::invalid_argument(
          "criteria_from_measurements: non-finite db for " +
          to_string(rec.combo_id));
    if (!std::isfinite(rec.uncertainty_db) || rec.uncertainty_db < 0.0)
      throw std::invalid_argument(
          "criteria_from_measurements: bad uncertainty for " +
          to_string(rec.combo_id));
    by_id[i] = &rec;
  }
  std::string missing;
  for (ComboId id : kAllComboIds)
    if (!by_id[static_cast<std::size_t>(id)])
      missing += (missing.empty() ? "" : ", ") + to_string(id);
  if (!missing.empty())
    throw std::invalid_argument(
        "criteria_from_measurements: missing combo_id " + missing);

  // dB is a log scale: sigma_V = V * ln(10)/10 * sigma_dB to first order.
  const double kLog = std::numbers::ln10 / 10.0;
  const Convention conv{};  // reconstruction lives in the 1/4 convention
  std::array<CriterionResult, 3> out;
  for (const Criterion& crit : criterion_set()) {
    CriterionResult result;
    result.id = crit.id;
    result.bound = crit.bound;
    double sigma_sq = 0.0;
    double variances[2];
    const CriterionTerm* terms[2] = {&crit.term1, &crit.term2};
    double gain_values[2] = {gains[crit.term1.slot.name],
                             gains[crit.term2.slot.name]};
    for (int t = 0; t < 2; ++t) {
      const MeasurementRecord& rec =
          *by_id[static_cast<std::size_t>(terms[t]->id)];
      const QuadCombination combo = terms[t]->realized(gain_values[t]);
      const double v = variance_from_db(combo, rec.db_below_snl, conv);
      variances[t] = v;
      const double sigma_v = v * kLog * rec.uncertainty_db;
      sigma_sq += sigma_v * sigma_v;
    }
    result.term1_variance = variances[0];
    result.term2_variance = variances[1];
    result.lhs = variances[0] + variances[1];
    result.satisfied = result.lhs < result.bound;
    result.gains_used = {gain_values[0], gain_values[1]};
    result.lhs_uncertainty = std::sqrt(sigma_sq);
    out[static_cast<std::size_t>(crit.id)] = result;
  }
  return out;
}

double reference_variance_formula(int line, double r, double g) {
  if (line < 1 || line > 6)
    throw std::invalid_argument("reference_variance_formula: line must be 1..6");
  if (!std::isfinite(r) || r < 0.0)
    throw std::invalid_argument("reference_variance_formula: r must be >= 0");
  if (!std::isfinite(g))
    throw std::invalid_argument("reference_variance_formula: non-finite g");
  const double up = std::exp(2.0 * r);
  const double dn = std::exp(-2.0 * r);
  const double gm = (g - 1.0) * (g - 1.0);
  const double gp = (g + 1.0) * (g + 1.0);
  switch (line) {
    case 1:
      return 0.5 * (gm * up + gp * dn + dn);
    case 2:
      return 0.5 * (gm * up + (g * g + 2.0 * g + 5.0) * dn);
    default:
      return gm * up + gp * dn;
  }
}

FormulaAuditReport audit_reference_formulas(std::span<const double> r_grid,
                                            std::span<const double> g_grid) {
  static const std::vector<double> kDefaultR = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6,
                                                0.7, 0.8, 0.9, 1.0, 1.1, 1.2};
  static const std::vector<double> kDefaultG = {0.2, 0.3, 0.4, 0.5, 0.6,
                                                0.7, 0.8, 0.9, 1.0};
  FormulaAuditReport report;
  report.tolerance = kAuditTol;
  if (r_grid.empty()) report.r_grid = kDefaultR;
  else report.r_grid.assign(r_grid.begin(), r_grid.end());
  if (g_grid.empty()) report.g_grid = kDefaultG;
  else report.g_grid.assign(g_grid.begin(), g_grid.end());
  for (double r : report.r_grid)
    if (!std::isfinite(r) || r < 0.0)
      throw std::invalid_argument("audit_reference_formulas: bad r grid");

  report.lines.resize(6);
  for (int line = 1; line <= 6; ++line) {
    FormulaAuditLine& row = report.lines[static_cast<std::size_t>(line - 1)];
    row.line = line;
    row.combo = kAllComboIds[static_cast<std::size_t>(line - 1)];
  }

  for (double r : report.r_grid) {
    // Engine oracle in the formulas' v0 = 1 convention.
    const GaussianState state =
        rescale_convention(build_ttpc(CircuitParams::symmetric(r)), 1.0);
    const double gap_expected = 1.5 * std::exp(-2.0 * r);
    for (double g : report.g_grid) {
      for (int line = 1; line <= 6; ++line) {
        FormulaAuditLine& row =
            report.lines[static_cast<std::size_t>(line - 1)];
        const CriterionTerm& term = criterion_term(row.combo);
        const double engine =
            combination_variance(state, term.realized(g));
        const double formula = reference_variance_formula(line, r, g);
        const double rel =
            std::abs(formula - engine) / std::max(std::abs(engine), 1e-300);
        row.max_rel_deviation = std::max(row.max_rel_deviation, rel);
        if (line == 1) {
          const double gap_rel =
              std::abs((engine - formula) - gap_expected) / gap_expected;
          row.max_gap_rel_error = std::max(row.max_gap_rel_error, gap_rel);
        }
      }
    }
  }

  for (FormulaAuditLine& row : report.lines) {
    if (row.line == 1) {
      row.status = FormulaStatus::discrepant;
      row.note =
          "printed form is low by (3/2) e^{-2r}: the engine matches "
          "0.5[(g-1)^2 e^{2r} + (g+1)^2 e^{-2r} + 4 e^{-2r}]";
    } else {
      row.status = row.max_rel_deviation < kAuditTol
                       ? FormulaStatus::confirmed
                       : FormulaStatus::discrepant;
    }
  }
  return report;
}

}  // namespace ttpc
