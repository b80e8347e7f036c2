#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ttpc/experiment.hpp"

namespace ttpc {
namespace {

std::array<double, 6> measured_by_combo(
    std::span<const MeasurementRecord> records) {
  std::array<bool, 6> seen{};
  std::array<double, 6> out{};
  for (const MeasurementRecord& rec : records) {
    const auto i = static_cast<std::size_t>(rec.combo_id);
    if (seen[i])
      throw std::invalid_argument("fit: duplicate combo_id " +
                                  to_string(rec.combo_id));
    if (!std::isfinite(rec.db_below_snl))
      throw std::invalid_argument("fit: non-finite db for " +
                                  to_string(rec.combo_id));
    seen[i] = true;
    out[i] = rec.db_below_snl;
  }
  std::string missing;
  for (ComboId id : kAllComboIds)
    if (!seen[static_cast<std::size_t>(id)])
      missing += (missing.empty() ? "" : ", ") + to_string(id);
  if (!missing.empty())
    throw std::invalid_argument("fit: missing combo_id " + missing);
  return out;
}

struct Prediction {
  std::array<double, 6> db{};
  std::array<double, 6> gain{};
};

// Lossy symmetric model: r1 = r2 = r, one uniform eta on all four
// output modes; gains re-optimized exactly for every trial point.
Prediction predict(double r, double eta) {
  CircuitParams params = CircuitParams::symmetric(r);
  params.losses = {eta, eta, eta, eta};
  const GaussianState state = build_ttpc(params);
  const std::array<CriterionGains, 3> gains =
      resolve_optimal_gains(state, GainTie::independent);
  Prediction pred;
  for (ComboId id : kAllComboIds) {
    const auto k = static_cast<std::size_t>(id);
    const CriterionTerm& term = criterion_term(id);
    const CriterionGains& pair = gains[k / 2];
    const double g = k % 2 == 0 ? pair.term1 : pair.term2;
    const QuadCombination combo = term.realized(g);
    const double variance = combination_variance(state, combo);
    const double snl = snl_of_combination(combo);
    pred.db[k] = -10.0 * std::log10(variance / snl);
    pred.gain[k] = g;
  }
  return pred;
}

double objective(const Prediction& pred, const std::array<double, 6>& meas) {
  double total = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    const double diff = pred.db[k] - meas[k];
    total += diff * diff;
  }
  return total;
}

}  // namespace

FitResult fit_measurements(std::span<const MeasurementRecord> records,
                           const FitOptions& options) {
  const std::array<double, 6> meas = measured_by_combo(records);
  if (options.fixed_eta) {
    const double eta = *options.fixed_eta;
    if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0)
      throw std::invalid_argument("fit: fixed eta must be in [0, 1]");
  }
  if (!(options.r_min <= options.r_max) || options.r_step <= 0.0 ||
      !(options.eta_min <= options.eta_max) || options.eta_step <= 0.0 ||
      options.refine_tol <= 0.0)
    throw std::invalid_argument("fit: malformed search options");

  const bool eta_fixed = options.fixed_eta.has_value();
  const double eta_lo = eta_fixed ? *options.fixed_eta : options.eta_min;
  const double eta_hi = eta_fixed ? *options.fixed_eta : options.eta_max;

  const auto eval = [&](double r, double eta) {
    return objective(predict(r, eta), meas);
  };

  // Coarse grid. Indexed, not accumulated: repeated += drifts the last
  // eta past 1 and the circuit rejects it.
  const auto grid_count = [](double lo, double hi, double step) {
    return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  };
  const int nr = grid_count(options.r_min, options.r_max, options.r_step);
  const int ne =
      eta_fixed ? 1 : grid_count(eta_lo, eta_hi, options.eta_step);
  double best_r = options.r_min;
  double best_eta = eta_lo;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nr; ++i) {
    const double r =
        std::min(options.r_min + i * options.r_step, options.r_max);
    for (int j = 0; j < ne; ++j) {
      const double eta = std::min(eta_lo + j * options.eta_step, eta_hi);
      const double value = eval(r, eta);
      if (value < best_obj) {
        best_obj = value;
        best_r = r;
        best_eta = eta;
      }
    }
  }
  const double grid_r = best_r;
  const double grid_eta = best_eta;
  const double grid_obj = best_obj;

  // Pattern refinement with step halving down to refine_tol.
  const auto clamp = [](double x, double lo, double hi) {
    return std::min(std::max(x, lo), hi);
  };
  double step = 0.5 * std::max(options.r_step, options.eta_step);
  bool converged = false;
  for (int iter = 0; iter < 10000; ++iter) {
    if (step < options.refine_tol) {
      converged = true;
      break;
    }
    double trial_r = best_r;
    double trial_eta = best_eta;
    double trial_obj = best_obj;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int de = -1; de <= 1; ++de) {
        if (dr == 0 && de == 0) continue;
        if (eta_fixed && de != 0) continue;
        const double r =
            clamp(best_r + dr * step, options.r_min, options.r_max);
        const double eta = clamp(best_eta + de * step, eta_lo, eta_hi);
        const double value = eval(r, eta);
        if (value < trial_obj) {
          trial_obj = value;
          trial_r = r;
          trial_eta = eta;
        }
      }
    }
    if (trial_obj < best_obj) {
      best_obj = trial_obj;
      best_r = trial_r;
      best_eta = trial_eta;
    } else {
      step *= 0.5;
    }
  }
  if (!converged) {
    best_r = grid_r;
    best_eta = grid_eta;
    best_obj = grid_obj;
  }

  FitResult result;
  result.r = best_r;
  result.eta = best_eta;
  result.eta_fixed = eta_fixed;
  result.converged = converged;
  result.residual_sq_db = best_obj;
  result.measured_db = meas;
  const Prediction pred = predict(best_r, best_eta);
  result.predicted_db = pred.db;
  result.fitted_gains = pred.gain;
  for (std::size_t k = 0; k < 6; ++k)
    result.residual_db[k] = pred.db[k] - meas[k];
  return result;
}

}  // namespace ttpc
