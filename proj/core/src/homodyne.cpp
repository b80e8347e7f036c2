#include "ttpc/homodyne.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

#include <Eigen/Cholesky>

#include "ttpc/errors.hpp"

namespace ttpc {
namespace {

constexpr std::size_t kBlockSamples = 8192;
constexpr double kDbCap = 99.0;
constexpr double kMaxJitter = 1e-12;

std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// One fixed 64-bit key per (seed, stream); feeds mt19937_64. Frozen —
// changing this changes every sampled value.
std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  s = a ^ (stream * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
  return splitmix64(s);
}

// 53-bit uniform in (0, 1]; never 0 so log() below is safe.
double uniform53(std::mt19937_64& gen) {
  return static_cast<double>((gen() >> 11) + 1) * 0x1.0p-53;
}

// Standard normals in fixed order via Box-Muller, pairwise.
void fill_normals(std::mt19937_64& gen, std::span<double> out) {
  const std::size_t pairs = out.size() / 2;
  for (std::size_t p = 0; p < pairs; ++p) {
    const double u1 = uniform53(gen);
    const double u2 = uniform53(gen);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[2 * p] = radius * std::cos(angle);
    out[2 * p + 1] = radius * std::sin(angle);
  }
  if (out.size() % 2 == 1) {
    const double u1 = uniform53(gen);
    const double u2 = uniform53(gen);
    out[out.size() - 1] =
        std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const Eigen::MatrixXd jittered =
      cov + kMaxJitter * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
  Eigen::LLT<Eigen::MatrixXd> retry(jittered);
  if (retry.info() == Eigen::Success) return retry.matrixL();
  throw NumericalFailureError(
      "sample_combinations: covariance is not positive definite within "
      "jitter tolerance 1e-12");
}

}  // namespace

std::vector<SampleBatch> sample_combinations(
    const GaussianState& state, std::span<const LabeledCombination> combos,
    std::size_t n, std::uint64_t seed, std::uint64_t base_stream) {
  if (n < 2) throw std::invalid_argument("sample_combinations: n must be >= 2");
  if (combos.empty())
    throw std::invalid_argument("sample_combinations: no combinations");
  const int dim = 2 * state.n_modes();
  if (!state.cov().allFinite() || !state.mean().allFinite())
    throw std::invalid_argument("sample_combinations: non-finite state");

  const Eigen::MatrixXd chol = cholesky_factor(state.cov());

  // value_i = c . mean + (L^T c) . z_i, so precompute one weight vector
  // per combination and a constant offset.
  const std::size_t n_combos = combos.size();
  std::vector<Eigen::VectorXd> weights(n_combos);
  std::vector<double> offsets(n_combos);
  for (std::size_t k = 0; k < n_combos; ++k) {
    const Eigen::VectorXd c = combos[k].combo.embedded(state.n_modes());
    weights[k] = chol.transpose() * c;
    offsets[k] = c.dot(state.mean());
  }

  std::vector<SampleBatch> batches(n_combos);
  for (std::size_t k = 0; k < n_combos; ++k) {
    batches[k].combo_id = combos[k].label;
    batches[k].n = n;
    batches[k].seed = seed;
    batches[k].stream = base_stream;
    batches[k].values.resize(n);
  }

  const std::size_t n_blocks = (n + kBlockSamples - 1) / kBlockSamples;
  const auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * kBlockSamples;
    const std::size_t count = std::min(kBlockSamples, n - begin);
    std::mt19937_64 gen(stream_key(seed, base_stream + b));
    std::vector<double> z(count * static_cast<std::size_t>(dim));
    fill_normals(gen, z);
    for (std::size_t i = 0; i < count; ++i) {
      const double* zi = z.data() + i * static_cast<std::size_t>(dim);
      for (std::size_t k = 0; k < n_combos; ++k) {
        double acc = offsets[k];
        const double* w = weights[k].data();
        for (int d = 0; d < dim; ++d) acc += w[d] * zi[static_cast<std::size_t>(d)];
        batches[k].values[begin + i] = acc;
      }
    }
  };

  // Blocks are independent substreams writing disjoint slices, so any
  // thread partition produces identical output.
  const std::size_t hw = std::max<std::size_t>(
      1, std::min<std::size_t>(std::thread::hardware_concurrency(), 8));
  const std::size_t n_threads = std::min(hw, n_blocks);
  if (n_threads <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t b = t; b < n_blocks; b += n_threads) run_block(b);
      });
    for (std::thread& th : pool) th.join();
  }
  return batches;
}

VarianceEstimate estimate(const SampleBatch& batch, double snl) {
  if (!(snl > 0.0) || !std::isfinite(snl))
    throw std::invalid_argument("estimate: snl must be finite and > 0");
  const std::size_t n = batch.values.size();
  if (n < 2) throw std::invalid_argument("estimate: need at least 2 samples");
  double mean = 0.0;
  for (double v : batch.values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : batch.values) ss += (v - mean) * (v - mean);
  VarianceEstimate est;
  est.n = n;
  est.variance = ss / static_cast<double>(n - 1);
  est.standard_error =
      est.variance * std::sqrt(2.0 / static_cast<double>(n - 1));
  const double db = -10.0 * std::log10(est.variance / snl);
  est.db_below_snl = std::isfinite(db) ? std::min(db, kDbCap) : kDbCap;
  return est;
}

McCriteria mc_criteria(const GaussianState& state, const Gains& gains,
                       std::size_t n, std::uint64_t seed) {
  if (std::abs(state.convention().v0 - 0.25) > 1e-12)
    throw ConventionMismatchError(
        "mc_criteria: criterion bounds are fixed in the v0 = 1/4 convention");
  McCriteria mc;
  mc.n = n;
  mc.seed = seed;

  std::vector<LabeledCombination> combos;
  combos.reserve(kAllComboIds.size());
  for (ComboId id : kAllComboIds) {
    const CriterionTerm& term = criterion_term(id);
    combos.push_back({to_string(id), term.realized(gains[term.slot.name])});
  }
  for (std::size_t k = 0; k < combos.size(); ++k)
    mc.analytic_variances[k] = combination_variance(state, combos[k].combo);

  const std::vector<SampleBatch> batches =
      sample_combinations(state, combos, n, seed);

  const double kLog = 10.0 / std::numbers::ln10;
  for (std::size_t k = 0; k < combos.size(); ++k) {
    const double snl = snl_of_combination(combos[k].combo, state.convention());
    const VarianceEstimate est = estimate(batches[k], snl);
    mc.term_estimates[k] = est;
    // Map the variance SE back to a dB error bar for the record.
    const double sigma_db =
        est.variance > 0.0 ? kLog * est.standard_error / est.variance : 0.0;
    mc.records[k] = {kAllComboIds[k], est.db_below_snl, sigma_db};
  }
  mc.results = criteria_from_measurements(mc.records, gains);
  return mc;
}

void write_batches_csv(std::ostream& os,
                       std::span<const SampleBatch> batches) {
  os << "combo_id,sample_index,value\n";
  char buf[64];
  for (const SampleBatch& batch : batches)
    for (std::size_t i = 0; i < batch.values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", batch.values[i]);
      os << batch.combo_id << ',' << i << ',' << buf << '\n';
    }
}

}  // namespace ttpc
