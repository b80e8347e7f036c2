#pragma once

#include <array>
#include <numbers>

#include "ttpc/gaussian.hpp"

namespace ttpc {

/// Parameters of the two-squeezer + beam-splitter network that prepares
/// the four-partite state. Output modes are labeled b1..b4 = 0..3.
struct CircuitParams {
  double r1 = 0.0;  ///< squeezing of the first pair (modes a1, a2)
  double r2 = 0.0;  ///< squeezing of the second pair (modes a3, a4)
  /// Phase of the 50/50 beam splitter combining a2 and a3. The default
  /// pi/2 realizes b2 = (a2 + i a3)/sqrt2, b4 = (a2 - i a3)/sqrt2.
  double bs_phase = std::numbers::pi / 2;
  /// Transmissivity of a loss channel applied to each output mode b1..b4
  /// after the network (detection/propagation loss).
  std::array<double, 4> losses{1.0, 1.0, 1.0, 1.0};
  /// Escape efficiency of each squeezer pair, applied to its two modes
  /// before the beam splitter. Untouched by the fit; defaults to 1.
  std::array<double, 2> nopa_escape{1.0, 1.0};

  static CircuitParams symmetric(double r);

  /// Throws std::invalid_argument on out-of-range fields.
  void check() const;
};

/// Builds the four-mode output state in b-order: squeeze (a1,a2) by r1
/// and (a3,a4) by r2, combine a2 with a3 on the beam splitter, then
/// apply per-mode losses. b1 = a1, b3 = a4 pass through untouched.
GaussianState build_ttpc(const CircuitParams& params,
                         Convention convention = {});

/// Two-mode squeezed pair: Var(X1 + X2) = Var(Y1 - Y2) = 2 v0 e^{-2r}.
GaussianState epr_pair(double r, Convention convention = {});

/// The four excess-noise operators of the state; each variance equals
/// 4 v0 e^{-2r} on the lossless symmetric output (vacuum value 4 v0):
///   sqrt2 X_0 + X_3 + X_1,      sqrt2 Y_1 - Y_0 + X_2,
///   sqrt2 Y_2 + X_1 - X_3,     -sqrt2 Y_3 + X_2 + Y_0.
const std::array<QuadCombination, 4>& nullifier_set();

/// Variances of the four nullifiers; requires at least 4 modes.
std::array<double, 4> nullifier_variances(const GaussianState& state);

}  // namespace ttpc
