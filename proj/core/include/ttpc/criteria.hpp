#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttpc/gaussian.hpp"

namespace ttpc {

/// The three pairwise inseparability criteria. Each is a sum of two
/// correlation variances compared against a fixed bound (sqrt2, 1, 1);
/// a strict `lhs < bound` certifies the corresponding inseparability.
enum class CriterionId : int { I = 0, II = 1, III = 2 };
std::string to_string(CriterionId id);

/// The six measured correlation variances, in the order the published
/// spectra are labeled (a)-(f).
enum class ComboId : int { I1 = 0, I2 = 1, II1 = 2, II2 = 3, III1 = 4, III2 = 5 };
inline constexpr std::array<ComboId, 6> kAllComboIds{
    ComboId::I1, ComboId::I2, ComboId::II1,
    ComboId::II2, ComboId::III1, ComboId::III2};
std::string to_string(ComboId id);
std::optional<ComboId> parse_combo_id(std::string_view text);

/// Named electronic gains. A name may appear in several terms (g_y4 in
/// I2 and II2, g_x1 in I1 and III1); see GainTie for how optimization
/// treats that.
enum class GainName : int { gx1 = 0, gx2 = 1, gx3 = 2, gy4 = 3 };
std::string to_string(GainName name);

struct Gains {
  double gx1 = 0.0;
  double gx2 = 0.0;
  double gx3 = 0.0;
  double gy4 = 0.0;

  double operator[](GainName name) const;
  double& operator[](GainName name);
};

/// The gain-scaled slot of a criterion term: contributes
/// sign * multiplier * g on quadrature (mode, quad).
struct GainSlot {
  GainName name;
  int mode;
  Quad quad;
  double multiplier;  ///< 1 or sqrt2
  double sign;        ///< +1 or -1
};

/// One correlation variance: a fixed combination plus one gain slot.
struct CriterionTerm {
  ComboId id;
  QuadCombination fixed;
  GainSlot slot;

  /// The full combination at gain value g.
  QuadCombination realized(double g) const;
};

struct Criterion {
  CriterionId id;
  CriterionTerm term1;
  CriterionTerm term2;
  double bound;
};

/// The fixed criterion/term table over output modes b1..b4 = 0..3.
const std::array<Criterion, 3>& criterion_set();
const Criterion& criterion(CriterionId id);
const CriterionTerm& criterion_term(ComboId id);

/// Gain values actually used by the two terms of one criterion.
struct CriterionGains {
  double term1 = 0.0;
  double term2 = 0.0;
};

struct CriterionResult {
  CriterionId id;
  double term1_variance = 0.0;
  double term2_variance = 0.0;
  double lhs = 0.0;
  double bound = 0.0;
  bool satisfied = false;  ///< strict lhs < bound
  CriterionGains gains_used;
  /// One-sigma uncertainty on lhs; set on measurement/MC paths.
  std::optional<double> lhs_uncertainty;
};

/// Evaluates one criterion on a 4-mode state in the v0 = 1/4 convention
/// (ConventionMismatchError otherwise: the bounds are fixed numbers in
/// that convention).
CriterionResult evaluate_criterion(const GaussianState& state,
                                   const Criterion& crit,
                                   const CriterionGains& gains);

/// All three criteria with named gains shared across terms.
std::array<CriterionResult, 3> evaluate_criteria(const GaussianState& state,
                                                 const Gains& gains);
std::array<CriterionResult, 3> evaluate_criteria(
    const GaussianState& state, const std::array<CriterionGains, 3>& gains);

/// Whether slot names shared between criteria are optimized per term
/// (independent) or constrained equal wherever the name appears.
enum class GainTie { independent, shared };

/// Exact per-term optimal gains for one criterion: the variance is an
/// upward parabola in g, minimized at g* = -Cov(fixed, slot quadrature)
/// / (multiplier * sign * Var(slot quadrature)). SingularInputError if
/// a slot quadrature has (near-)zero variance.
CriterionGains optimal_gains_exact(const GaussianState& state,
                                   const Criterion& crit);

/// Per-criterion optimal gains. With GainTie::shared, each named slot
/// takes the single value minimizing the sum of all term variances that
/// carry the name.
std::array<CriterionGains, 3> resolve_optimal_gains(
    const GaussianState& state, GainTie tie = GainTie::independent);

/// Shared-tie optimum expressed per named slot.
Gains optimal_named_gains(const GaussianState& state);

/// Closed-form optimum tanh(2r) valid for every slot on the lossless
/// symmetric circuit output. Requires finite r >= 0.
double optimal_gain_formula(double r);

/// Shot-noise level of a combination: v0 * sum of squared coefficients.
double snl_of_combination(const QuadCombination& combo,
                          const Convention& convention = {});

/// Inverts "db below the SNL": snl * 10^(-db/10). Negative db (above
/// shot noise) is allowed.
double variance_from_db(const QuadCombination& combo, double db_below_snl,
                        const Convention& convention = {});

/// One row of a measurement campaign: a combination's noise power
/// relative to its shot-noise level.
struct MeasurementRecord {
  ComboId combo_id;
  double db_below_snl = 0.0;
  double uncertainty_db = 0.0;
};

/// Reconstructs the three criterion verdicts from six measured dB
/// values (one per ComboId, each exactly once) at the stated gains, in
/// the v0 = 1/4 convention. lhs uncertainties are first-order
/// propagated: sigma_V = V * ln(10)/10 * sigma_dB per term, summed in
/// quadrature.
std::array<CriterionResult, 3> criteria_from_measurements(
    std::span<const MeasurementRecord> records, const Gains& gains);

/// The published analytic forms of the six correlation variances in the
/// v0 = 1 convention, reproduced verbatim (line = 1..6 in ComboId
/// order). Line 1 as printed disagrees with the covariance engine; see
/// audit_reference_formulas.
double reference_variance_formula(int line, double r, double g);

enum class FormulaStatus { confirmed, discrepant };

struct FormulaAuditLine {
  int line = 0;
  ComboId combo;
  FormulaStatus status = FormulaStatus::discrepant;
  /// max over the grid of |formula - engine| / |engine|.
  double max_rel_deviation = 0.0;
  /// Line 1 only: max relative error of (engine - formula) against the
  /// reconstructed gap (3/2) e^{-2r}.
  double max_gap_rel_error = 0.0;
  std::string note;
};

struct FormulaAuditReport {
  std::vector<FormulaAuditLine> lines;
  double tolerance = 0.0;
  std::vector<double> r_grid;
  std::vector<double> g_grid;
};

/// Sweeps the published formulas against the covariance engine (circuit
/// output rescaled to v0 = 1) over a grid. Empty grids use the default
/// r in {0.1..1.2}, g in {0.2..1.0}.
FormulaAuditReport audit_reference_formulas(std::span<const double> r_grid = {},
                                            std::span<const double> g_grid = {});

}  // namespace ttpc
