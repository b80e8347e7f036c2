#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ttpc/criteria.hpp"
#include "ttpc/gaussian.hpp"

namespace ttpc {

/// A quadrature combination to sample, with the label used in exports.
struct LabeledCombination {
  std::string label;
  QuadCombination combo;
};

/// Samples of one combination. Reproducible: the same (seed, stream)
/// always yields the same values, independent of thread count.
struct SampleBatch {
  std::string combo_id;
  std::size_t n = 0;  ///< == values.size()
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::vector<double> values;
};

/// Draws n joint quadrature samples from the state (Cholesky of the
/// covariance, jitter up to 1e-12 on the diagonal if the factorization
/// needs it, NumericalFailureError beyond that) and projects each draw
/// onto every combination, so sampled combinations stay correlated
/// exactly as the state dictates. Requires n >= 2. All batches share
/// the run's joint draws; sample block b consumes substream
/// base_stream + b of the seed (fixed generator recipe in the README).
std::vector<SampleBatch> sample_combinations(
    const GaussianState& state, std::span<const LabeledCombination> combos,
    std::size_t n, std::uint64_t seed, std::uint64_t base_stream = 0);

struct VarianceEstimate {
  double variance = 0.0;        ///< unbiased, n-1 divisor
  double standard_error = 0.0;  ///< variance * sqrt(2/(n-1)), Gaussian theory
  std::size_t n = 0;
  double db_below_snl = 0.0;    ///< -10 log10(variance/snl), capped at 99
};

/// Sample variance of a batch against a shot-noise level snl > 0.
VarianceEstimate estimate(const SampleBatch& batch, double snl);

/// Monte Carlo end-to-end: sample the six criterion combinations at the
/// given gains, estimate each variance, and push the estimates through
/// the measurement-reconstruction path.
struct McCriteria {
  std::array<CriterionResult, 3> results;  ///< lhs_uncertainty = sampling SE
  std::array<VarianceEstimate, 6> term_estimates;   ///< ComboId order
  std::array<double, 6> analytic_variances;         ///< engine values
  std::array<MeasurementRecord, 6> records;         ///< as fed downstream
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

McCriteria mc_criteria(const GaussianState& state, const Gains& gains,
                       std::size_t n, std::uint64_t seed);

/// CSV export, header `combo_id,sample_index,value`.
void write_batches_csv(std::ostream& os, std::span<const SampleBatch> batches);

}  // namespace ttpc
