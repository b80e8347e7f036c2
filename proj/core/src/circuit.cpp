#include "ttpc/circuit.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ttpc {
namespace {

const double kSqrt2 = std::numbers::sqrt2;

void check_unit_interval(double x, const char* name) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.0)
    throw std::invalid_argument(std::string("CircuitParams: ") + name +
                                " must be in [0, 1]");
}

}  // namespace

CircuitParams CircuitParams::symmetric(double r) {
  CircuitParams p;
  p.r1 = r;
  p.r2 = r;
  return p;
}

void CircuitParams::check() const {
  if (!std::isfinite(r1) || r1 < 0.0)
    throw std::invalid_argument("CircuitParams: r1 must be finite and >= 0");
  if (!std::isfinite(r2) || r2 < 0.0)
    throw std::invalid_argument("CircuitParams: r2 must be finite and >= 0");
  if (!std::isfinite(bs_phase))
    throw std::invalid_argument("CircuitParams: bs_phase must be finite");
  for (double eta : losses) check_unit_interval(eta, "losses[]");
  for (double eta : nopa_escape) check_unit_interval(eta, "nopa_escape[]");
}

GaussianState build_ttpc(const CircuitParams& params, Convention convention) {
  params.check();
  GaussianState state = vacuum_state(4, convention);
  // Intermediate labels: modes (a1, a2, a3, a4).
  state = apply_symplectic(state, squeeze_deamp_pair(params.r1), {0, 1});
  state = apply_symplectic(state, squeeze_deamp_pair(params.r2), {2, 3});
  for (int m = 0; m < 2; ++m)
    if (params.nopa_escape[0] < 1.0)
      state = loss_channel(state, m, params.nopa_escape[0]);
  for (int m = 2; m < 4; ++m)
    if (params.nopa_escape[1] < 1.0)
      state = loss_channel(state, m, params.nopa_escape[1]);
  // 50/50 splitter on (a2, a3); its outputs are b2 and b4.
  state = apply_symplectic(
      state, beam_splitter(std::numbers::pi / 4, params.bs_phase), {1, 2});
  // Slots now hold (b1, b2, b4, b3); reorder to (b1, b2, b3, b4).
  state = permute_modes(state, {0, 1, 3, 2});
  for (int m = 0; m < 4; ++m)
    if (params.losses[static_cast<std::size_t>(m)] < 1.0)
      state = loss_channel(state, m,
                           params.losses[static_cast<std::size_t>(m)]);
  return state;
}

GaussianState epr_pair(double r, Convention convention) {
  GaussianState state = vacuum_state(2, convention);
  return apply_symplectic(state, squeeze_deamp_pair(r), {0, 1});
}

const std::array<QuadCombination, 4>& nullifier_set() {
  static const std::array<QuadCombination, 4> set = {
      QuadCombination{{0, Quad::X, kSqrt2}, {3, Quad::X, 1.0}, {1, Quad::X, 1.0}},
      QuadCombination{{1, Quad::Y, kSqrt2}, {0, Quad::Y, -1.0}, {2, Quad::X, 1.0}},
      QuadCombination{{2, Quad::Y, kSqrt2}, {1, Quad::X, 1.0}, {3, Quad::X, -1.0}},
      QuadCombination{{3, Quad::Y, -kSqrt2}, {2, Quad::X, 1.0}, {0, Quad::Y, 1.0}},
  };
  return set;
}

std::array<double, 4> nullifier_variances(const GaussianState& state) {
  if (state.n_modes() < 4)
    throw std::invalid_argument("nullifier_variances: need at least 4 modes");
  std::array<double, 4> out{};
  const auto& set = nullifier_set();
  for (std::size_t i = 0; i < set.size(); ++i)
    out[i] = combination_variance(state, set[i]);
  return out;
}

}  // namespace ttpc
