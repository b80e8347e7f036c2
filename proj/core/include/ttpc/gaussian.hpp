#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ttpc {

// Quadrature ordering is (X1, Y1, X2, Y2, ...) throughout: mode m owns
// vector slots 2m and 2m+1, with a = X + iY.

/// Vacuum normalization. v0 is the variance of a single vacuum
/// quadrature; the default 1/4 makes Var(X) + Var(Y) = 1/2 for vacuum.
struct Convention {
  double v0 = 0.25;
};

enum class Quad : int { X = 0, Y = 1 };

struct QuadTerm {
  int mode = 0;
  Quad quad = Quad::X;
  double coeff = 1.0;
};

/// Weighted linear form over (mode, quadrature) slots,
/// e.g. sqrt2*X_1 + Y_3 - g*X_0.
struct QuadCombination {
  std::vector<QuadTerm> terms;

  QuadCombination() = default;
  QuadCombination(std::initializer_list<QuadTerm> list) : terms(list) {}

  QuadCombination& add(int mode, Quad quad, double coeff);

  /// Coefficient vector in the 2n quadrature space. Throws
  /// std::invalid_argument for an empty combination, an out-of-range
  /// mode, or a non-finite coefficient.
  Eigen::VectorXd embedded(int n_modes) const;

  /// Sum of squared coefficients; repeated (mode, quad) slots accumulate
  /// before squaring. Throws like embedded().
  double coeff_norm_sq() const;
};

/// Block-diagonal symplectic form Omega, blocks [[0, 1], [-1, 0]].
Eigen::MatrixXd symplectic_form(int n_modes);

/// Linear map on 2k quadratures satisfying S^T Omega S = Omega
/// (checked on construction to 1e-10).
class SymplecticOp {
 public:
  explicit SymplecticOp(Eigen::MatrixXd matrix);

  int arity() const { return static_cast<int>(matrix_.rows()) / 2; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  /// Exact symplectic inverse -Omega S^T Omega (no linear solve).
  SymplecticOp inverse() const;

 private:
  Eigen::MatrixXd matrix_;
};

/// Composition: (after * before) applies before first.
SymplecticOp operator*(const SymplecticOp& after, const SymplecticOp& before);

/// Two-mode squeezer in the de-amplifying convention:
///   X1' = X1 cosh r - X2 sinh r,   Y1' = Y1 cosh r + Y2 sinh r,
///   X2' = X2 cosh r - X1 sinh r,   Y2' = Y2 cosh r + Y1 sinh r.
/// Squeezes the sums X1+X2 and differences Y1-Y2 by e^{-r}. Requires
/// finite r >= 0.
SymplecticOp squeeze_deamp_pair(double r);

/// Two-mode beam splitter with power transmittance cos^2(angle). The
/// annihilation-operator map is
///   b1 = cos(a) a1 + e^{i p} sin(a) a2,
///   b2 = -e^{-2ip} sin(a) a1 + e^{-ip} cos(a) a2,
/// so (0, 0) is the identity and (pi/4, pi/2) is the locked 50/50 form
/// b1 = (a1 + i a2)/sqrt2, b2 = (a1 - i a2)/sqrt2.
SymplecticOp beam_splitter(double transmittance_angle, double phase);

/// Single-mode rotation a -> e^{i angle} a.
SymplecticOp phase_rotation(double angle);

/// n-mode Gaussian state: mean vector and covariance over 2n
/// quadratures, tagged with its vacuum convention. Immutable; channel
/// functions return new states. The constructor checks shapes only;
/// content checks (symmetry, uncertainty relation) live in validate().
class GaussianState {
 public:
  GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov,
                Convention convention = {});

  int n_modes() const { return static_cast<int>(mean_.size()) / 2; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  const Convention& convention() const { return convention_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Convention convention_;
};

GaussianState vacuum_state(int n_modes, Convention convention = {});

/// Applies op to the listed modes (distinct, in range, count = arity).
GaussianState apply_symplectic(const GaussianState& state,
                               const SymplecticOp& op,
                               const std::vector<int>& modes);

/// Pure-loss channel with transmissivity eta in [0, 1] on one mode:
/// diagonal block -> eta B + (1 - eta) v0 I, cross blocks scale by
/// sqrt(eta), mean scales by sqrt(eta). Equivalent to a beam splitter
/// to a discarded vacuum ancilla.
GaussianState loss_channel(const GaussianState& state, int mode, double eta);

/// Var(sum_k c_k q_k) = c^T cov c.
double combination_variance(const GaussianState& state,
                            const QuadCombination& combo);

/// Cov(a, b) = a^T cov b between two combinations.
double combination_covariance(const GaussianState& state,
                              const QuadCombination& a,
                              const QuadCombination& b);

/// Switches vacuum normalization: cov scales by v0_new/v0_old, mean by
/// the square root of that factor. Physics (dB ratios, verdicts against
/// rescaled bounds) is invariant.
GaussianState rescale_convention(const GaussianState& state, double v0_new);

/// new_from_old[i] = j moves old mode j to new slot i. Must be a
/// permutation of 0..n-1.
GaussianState permute_modes(const GaussianState& state,
                            const std::vector<int>& new_from_old);

/// Reduced state of the listed modes (distinct, in range), in order.
GaussianState marginal(const GaussianState& state,
                       const std::vector<int>& modes);

struct ValidationReport {
  bool ok = false;
  /// max |cov - cov^T| entry.
  double max_symmetry_error = 0.0;
  /// Smallest eigenvalue of the Hermitian matrix cov + i v0 Omega;
  /// physical states have it >= 0 (slack -1e-9 tolerated).
  double min_heisenberg_eigenvalue = 0.0;
  std::string message;
};

/// Checks symmetry (1e-10) and the uncertainty-relation invariant.
ValidationReport validate(const GaussianState& state);

}  // namespace ttpc
