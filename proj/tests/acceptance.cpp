// Acceptance gate: one line per criterion, exit code = number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <random>
#include <string>
#include <vector>

#include "ttpc/circuit.hpp"
#include "ttpc/criteria.hpp"
#include "ttpc/experiment.hpp"
#include "ttpc/gaussian.hpp"
#include "ttpc/homodyne.hpp"

using namespace ttpc;

namespace {

int g_failures = 0;

void report(int index, bool ok, const std::string& detail) {
  std::printf("[%2d] %s — %s\n", index, ok ? "PASS" : "FAIL", detail.c_str());
  if (!ok) ++g_failures;
}

void guard(int index, const std::string& name, bool (*body)(std::string&)) {
  std::string detail = name;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = name + ": exception: " + e.what();
  }
  report(index, ok, detail);
}

std::string fmt(const char* pattern, double a, double b = 0.0,
                double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// 1. EPR correlations at r = 0.30 and at 2.6 dB.
bool c1(std::string& detail) {
  const double expected = 0.5 * std::exp(-0.6);
  const GaussianState epr = epr_pair(0.30);
  const double v_sum = combination_variance(
      epr, QuadCombination{{0, Quad::X, 1.0}, {1, Quad::X, 1.0}});
  const double v_diff = combination_variance(
      epr, QuadCombination{{0, Quad::Y, 1.0}, {1, Quad::Y, -1.0}});

  const GaussianState at_db = epr_pair(r_from_db(2.6));
  const QuadCombination sum{{0, Quad::X, 1.0}, {1, Quad::X, 1.0}};
  const double v = combination_variance(at_db, sum);
  const double db = -10.0 * std::log10(v / snl_of_combination(sum));

  const bool ok = std::abs(v_sum - expected) < 1e-9 &&
                  std::abs(v_diff - expected) < 1e-9 &&
                  std::abs(db - 2.6) < 1e-9;
  detail = fmt("EPR pair: Var(X1+X2) = Var(Y1-Y2) = %.15f (0.5 e^{-0.6}, "
               "+-1e-9); dB readout at 2.6 dB input = %.12f",
               v_sum, db);
  return ok;
}

// 2. Nullifier variances scale as e^{-2r}; -> 0 at deep squeezing.
bool c2(std::string& detail) {
  bool ok = true;
  double worst = 0.0;
  for (double r : {0.0, 0.3, 1.0, 3.0}) {
    const auto values =
        nullifier_variances(build_ttpc(CircuitParams::symmetric(r)));
    const double expected = std::exp(-2.0 * r);
    for (double v : values) {
      const double rel = std::abs(v - expected) / expected;
      worst = std::max(worst, rel);
      ok = ok && rel < 1e-10;
      if (r == 3.0) ok = ok && v < 2.5e-3;  // "-> 0" limit, vacuum units
    }
  }
  detail = fmt("nullifiers at r in {0, 0.3, 1, 3}: all e^{-2r}, worst "
               "relative error %.3g (< 1e-10); r = 3 values < 2.5e-3",
               worst);
  return ok;
}

// 3. Exact optimal gains on lossless states follow (e^{4r}-1)/(e^{4r}+1).
bool c3(std::string& detail) {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uni(0.0, 2.0);
  double worst = 0.0;
  bool ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    const double r = uni(rng);
    const double formula = (std::exp(4.0 * r) - 1.0) / (std::exp(4.0 * r) + 1.0);
    const GaussianState state = build_ttpc(CircuitParams::symmetric(r));
    for (const Criterion& crit : criterion_set()) {
      const CriterionGains gains = optimal_gains_exact(state, crit);
      for (double g : {gains.term1, gains.term2}) {
        worst = std::max(worst, std::abs(g - formula));
        ok = ok && std::abs(g - formula) < 1e-10;
      }
    }
  }
  detail = fmt("optimal gains on 50 random lossless r in [0, 2]: all six "
               "slots match (e^{4r}-1)/(e^{4r}+1), worst |delta| %.3g",
               worst);
  return ok;
}

// 4. Bundled-dataset reconstruction reproduces the published verdicts.
bool c4(std::string& detail) {
  const BundledDataset& ds = paper_dataset();
  Gains gains;
  gains.gx1 = gains.gx2 = gains.gx3 = gains.gy4 = ds.gain;
  const auto results = criteria_from_measurements(ds.records, gains);

  // Independent recipe: variance = v0 * sum(coeff^2) * 10^{-db/10}.
  double recipe[3] = {0.0, 0.0, 0.0};
  const double g2 = ds.gain * ds.gain;
  const double norms[6] = {3.0 + g2, 3.0 + g2, 2.0 + 2.0 * g2,
                           2.0 + 2.0 * g2, 2.0 + 2.0 * g2, 2.0 + 2.0 * g2};
  for (int k = 0; k < 6; ++k)
    recipe[k / 2] += 0.25 * norms[k] *
                     std::pow(10.0, -ds.records[static_cast<std::size_t>(k)]
                                          .db_below_snl / 10.0);

  const double target[3] = {1.112, 0.940, 0.974};
  const char* rounded[3] = {"1.11", "0.94", "0.97"};
  bool ok = true;
  for (int k = 0; k < 3; ++k) {
    const double lhs = results[static_cast<std::size_t>(k)].lhs;
    ok = ok && std::abs(lhs - recipe[k]) < 1e-12;  // engine == recipe
    ok = ok && std::abs(recipe[k] - target[k]) < 0.005;
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", lhs);
    ok = ok && rounded[k] == std::string(buf);
    ok = ok && results[static_cast<std::size_t>(k)].satisfied;
  }
  detail = fmt("dataset verdicts: I = %.6f, II = %.6f, III = %.6f; round to "
               "1.11 / 0.94 / 0.97, raw within 0.005 of (1.112, 0.940, 0.974)",
               results[0].lhs, results[1].lhs, results[2].lhs);
  return ok;
}

// 5. Lossless theory point at r = 0.30 with automatic gains.
bool c5(std::string& detail) {
  const GaussianState state = build_ttpc(CircuitParams::symmetric(0.30));
  const auto results = evaluate_criteria(state, optimal_named_gains(state));
  // Oracle closed forms. The target list prints I as 0.970591; the value
  // 1/(2 cosh 0.6) + e^{-0.6} = 0.970587, so the last printed digits there
  // are a transcription slip and the closed form is what is asserted.
  const double expected_i = 0.5 / std::cosh(0.6) + std::exp(-0.6);
  const double expected_ii = 1.0 / std::cosh(0.6);
  bool ok = std::abs(results[0].lhs - expected_i) < 1e-6 &&
            std::abs(results[1].lhs - expected_ii) < 1e-6 &&
            std::abs(results[2].lhs - expected_ii) < 1e-6;
  for (const auto& res : results) ok = ok && res.satisfied;
  detail = fmt("lossless r = 0.30, auto gains: I = %.6f (closed form "
               "0.970587; list prints 0.970591), II = III = %.6f, all three "
               "satisfied",
               results[0].lhs, results[1].lhs);
  return ok;
}

// 6. Published formula audit: lines 2-6 confirmed, line 1 discrepant by
//    exactly (3/2) e^{-2r}.
bool c6(std::string& detail) {
  const std::vector<double> r_grid{0.0, 0.3, 0.6, 1.0};
  const std::vector<double> g_grid{0.0, 0.41, 0.537, 1.0};
  const FormulaAuditReport audit = audit_reference_formulas(r_grid, g_grid);
  bool ok = audit.lines.size() == 6;
  double worst_dev = 0.0, worst_gap = 0.0;
  for (const auto& line : audit.lines) {
    if (line.line == 1) {
      ok = ok && line.status == FormulaStatus::discrepant;
      ok = ok && line.max_gap_rel_error < 1e-10;
      worst_gap = line.max_gap_rel_error;
    } else {
      ok = ok && line.status == FormulaStatus::confirmed;
      ok = ok && line.max_rel_deviation < 1e-12;
      worst_dev = std::max(worst_dev, line.max_rel_deviation);
    }
  }
  detail = fmt("formula audit on the 4x4 grid: lines 2-6 CONFIRMED (worst "
               "relative deviation %.3g < 1e-12); line 1 DISCREPANT with gap "
               "(3/2) e^{-2r} reproduced to %.3g (< 1e-10), documented",
               worst_dev, worst_gap);
  return ok;
}

// 7. Monte Carlo consistency at n = 1e6 with a fixed seed.
bool c7(std::string& detail) {
  const GaussianState state = build_ttpc(CircuitParams::symmetric(0.30));
  const Gains gains = optimal_named_gains(state);

  const auto start = std::chrono::steady_clock::now();
  const McCriteria mc = mc_criteria(state, gains, 1'000'000, 42);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();

  bool ok = seconds < 10.0;
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    const double ratio =
        std::abs(mc.term_estimates[k].variance - mc.analytic_variances[k]) /
        mc.term_estimates[k].standard_error;
    worst_ratio = std::max(worst_ratio, ratio);
    ok = ok && ratio < 4.0;
  }

  const McCriteria again = mc_criteria(state, gains, 1'000'000, 42);
  for (std::size_t k = 0; k < 6; ++k)
    ok = ok && again.term_estimates[k].variance ==
                   mc.term_estimates[k].variance &&
         again.term_estimates[k].db_below_snl ==
             mc.term_estimates[k].db_below_snl;

  detail = fmt("Monte Carlo n = 1e6, seed 42: all six terms within 4 SE of "
               "analytic (worst %.2f SE), %.2f s, bit-identical re-run",
               worst_ratio, seconds);
  return ok;
}

// 8. Uniform loss interpolates every combo variance toward its SNL.
bool c8(std::string& detail) {
  const double r = 0.30;
  const GaussianState pure = build_ttpc(CircuitParams::symmetric(r));
  std::vector<QuadCombination> combos;
  for (ComboId id : kAllComboIds)
    combos.push_back(criterion_term(id).realized(0.41));
  for (const auto& n : nullifier_set()) combos.push_back(n);

  bool ok = true;
  double worst = 0.0;
  for (double eta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    CircuitParams params = CircuitParams::symmetric(r);
    params.losses = {eta, eta, eta, eta};
    const GaussianState lossy = build_ttpc(params);
    for (const auto& combo : combos) {
      const double expected = eta * combination_variance(pure, combo) +
                              (1.0 - eta) * snl_of_combination(combo);
      const double actual = combination_variance(lossy, combo);
      const double rel = std::abs(actual - expected) / expected;
      worst = std::max(worst, rel);
      ok = ok && rel < 1e-10;
    }
  }
  detail = fmt("loss interpolation over eta in {0, .25, .5, .75, 1}: ten "
               "combinations all match eta*pure + (1-eta)*SNL, worst relative "
               "error %.3g",
               worst);
  return ok;
}

// 9. Fit round trip from a synthetic (r = 0.30, eta = 0.8) dataset.
bool c9(std::string& detail) {
  CircuitParams params = CircuitParams::symmetric(0.30);
  params.losses = {0.8, 0.8, 0.8, 0.8};
  const GaussianState state = build_ttpc(params);
  const auto gains = resolve_optimal_gains(state);

  std::vector<MeasurementRecord> records;
  for (ComboId id : kAllComboIds) {
    const auto c = static_cast<std::size_t>(static_cast<int>(id) / 2);
    const double g =
        (static_cast<int>(id) % 2 == 0) ? gains[c].term1 : gains[c].term2;
    const QuadCombination combo = criterion_term(id).realized(g);
    const double v = combination_variance(state, combo);
    records.push_back(
        {id, -10.0 * std::log10(v / snl_of_combination(combo)), 0.05});
  }

  const FitResult fit = fit_measurements(records);
  const bool ok = std::abs(fit.r - 0.30) <= 0.01 &&
                  std::abs(fit.eta - 0.80) <= 0.01;
  detail = fmt("fit round trip: synthetic (r = 0.30, eta = 0.80) recovered "
               "as (r = %.4f, eta = %.4f), both within +-0.01",
               fit.r, fit.eta);
  return ok;
}

// 10. Documented exclusions (no computation to gate).
bool c10(std::string& detail) {
  // The physical squeezed-light generation (pump powers, thresholds,
  // cavity locking) is out of scope, and the published +-0.01 error bars
  // on I/II/III follow no stated recipe; first-order propagation of the
  // +-0.1 dB uncertainties gives the larger spreads reported instead.
  // The property suites in tests/ stand in for both. Check the report
  // actually flags the substitution.
  const ReproduceReport repro = run_reproduce_paper();
  bool flagged = false;
  for (const auto& row : repro.rows)
    if (row.quantity.rfind("criterion_", 0) == 0 &&
        row.paper_value.find("0.01") != std::string::npos)
      flagged = true;
  detail = "documented exclusion: physical squeezing generation and the "
           "published +-0.01 error-bar recipe are out of scope; propagated "
           "uncertainties are printed and flagged instead";
  return flagged;
}

}  // namespace

int main() {
  guard(1, "EPR correlation", c1);
  guard(2, "nullifier scaling", c2);
  guard(3, "optimal gain formula", c3);
  guard(4, "dataset verdict reconstruction", c4);
  guard(5, "lossless theory point", c5);
  guard(6, "published formula audit", c6);
  guard(7, "Monte Carlo consistency", c7);
  guard(8, "loss interpolation", c8);
  guard(9, "fit round trip", c9);
  guard(10, "documented exclusions", c10);

  if (g_failures == 0)
    std::printf("acceptance: all 10 criteria pass\n");
  else
    std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
  return g_failures;
}
