#include "ttpc/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

#include "ttpc/errors.hpp"

namespace ttpc {
namespace {

constexpr double kSymplecticTol = 1e-10;
constexpr double kSymmetryTol = 1e-10;
constexpr double kHeisenbergSlack = -1e-9;

int slot(int mode, Quad quad) { return 2 * mode + static_cast<int>(quad); }

void check_mode_list(const std::vector<int>& modes, int n_modes,
                     std::size_t expected, const char* who) {
  if (modes.size() != expected)
    throw std::invalid_argument(std::string(who) + ": expected " +
                                std::to_string(expected) + " modes, got " +
                                std::to_string(modes.size()));
  for (int m : modes)
    if (m < 0 || m >= n_modes)
      throw std::invalid_argument(std::string(who) + ": mode " +
                                  std::to_string(m) + " out of range");
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = i + 1; j < modes.size(); ++j)
      if (modes[i] == modes[j])
        throw std::invalid_argument(std::string(who) + ": repeated mode " +
                                    std::to_string(modes[i]));
}

// Quadrature 2x2 block of a complex passive amplitude u = p + iq acting
// as b += u a with a = X + iY: (X, Y) -> (pX - qY, qX + pY).
Eigen::Matrix2d passive_block(std::complex<double> u) {
  Eigen::Matrix2d block;
  block << u.real(), -u.imag(), u.imag(), u.real();
  return block;
}

Eigen::MatrixXd symmetrized(Eigen::MatrixXd m) {
  return 0.5 * (m + m.transpose()).eval();
}

}  // namespace

QuadCombination& QuadCombination::add(int mode, Quad quad, double coeff) {
  terms.push_back({mode, quad, coeff});
  return *this;
}

Eigen::VectorXd QuadCombination::embedded(int n_modes) const {
  if (terms.empty())
    throw std::invalid_argument("QuadCombination: empty combination");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * n_modes);
  for (const QuadTerm& t : terms) {
    if (t.mode < 0 || t.mode >= n_modes)
      throw std::invalid_argument("QuadCombination: mode " +
                                  std::to_string(t.mode) + " out of range");
    if (!std::isfinite(t.coeff))
      throw std::invalid_argument("QuadCombination: non-finite coefficient");
    c[slot(t.mode, t.quad)] += t.coeff;
  }
  return c;
}

double QuadCombination::coeff_norm_sq() const {
  if (terms.empty())
    throw std::invalid_argument("QuadCombination: empty combination");
  int max_mode = 0;
  for (const QuadTerm& t : terms) {
    if (t.mode < 0)
      throw std::invalid_argument("QuadCombination: negative mode");
    max_mode = std::max(max_mode, t.mode);
  }
  return embedded(max_mode + 1).squaredNorm();
}

Eigen::MatrixXd symplectic_form(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("symplectic_form: n_modes < 1");
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (int m = 0; m < n_modes; ++m) {
    omega(2 * m, 2 * m + 1) = 1.0;
    omega(2 * m + 1, 2 * m) = -1.0;
  }
  return omega;
}

SymplecticOp::SymplecticOp(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
  const auto rows = matrix_.rows();
  if (rows < 2 || rows != matrix_.cols() || rows % 2 != 0)
    throw std::invalid_argument("SymplecticOp: matrix must be square 2k x 2k");
  if (!matrix_.allFinite())
    throw std::invalid_argument("SymplecticOp: non-finite entries");
  const Eigen::MatrixXd omega = symplectic_form(static_cast<int>(rows) / 2);
  const double defect =
      (matrix_.transpose() * omega * matrix_ - omega).cwiseAbs().maxCoeff();
  if (defect > kSymplecticTol)
    throw std::invalid_argument(
        "SymplecticOp: matrix is not symplectic (defect " +
        std::to_string(defect) + ")");
}

SymplecticOp SymplecticOp::inverse() const {
  const Eigen::MatrixXd omega = symplectic_form(arity());
  return SymplecticOp(-omega * matrix_.transpose() * omega);
}

SymplecticOp operator*(const SymplecticOp& after, const SymplecticOp& before) {
  if (after.arity() != before.arity())
    throw std::invalid_argument("SymplecticOp: arity mismatch in composition");
  return SymplecticOp(after.matrix() * before.matrix());
}

SymplecticOp squeeze_deamp_pair(double r) {
  if (!std::isfinite(r) || r < 0.0)
    throw std::invalid_argument("squeeze_deamp_pair: r must be finite and >= 0");
  const double ch = std::cosh(r);
  const double sh = std::sinh(r);
  Eigen::Matrix4d s;
  // Order (X1, Y1, X2, Y2).
  s << ch, 0, -sh, 0,
       0, ch, 0, sh,
       -sh, 0, ch, 0,
       0, sh, 0, ch;
  return SymplecticOp(s);
}

SymplecticOp beam_splitter(double transmittance_angle, double phase) {
  if (!std::isfinite(transmittance_angle) || !std::isfinite(phase))
    throw std::invalid_argument("beam_splitter: non-finite parameter");
  using namespace std::complex_literals;
  const double c = std::cos(transmittance_angle);
  const double s = std::sin(transmittance_angle);
  const std::complex<double> u11 = c;
  const std::complex<double> u12 = std::exp(1i * phase) * s;
  const std::complex<double> u21 = -std::exp(-2.0i * phase) * s;
  const std::complex<double> u22 = std::exp(-1i * phase) * c;
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m.block<2, 2>(0, 0) = passive_block(u11);
  m.block<2, 2>(0, 2) = passive_block(u12);
  m.block<2, 2>(2, 0) = passive_block(u21);
  m.block<2, 2>(2, 2) = passive_block(u22);
  return SymplecticOp(m);
}

SymplecticOp phase_rotation(double angle) {
  if (!std::isfinite(angle))
    throw std::invalid_argument("phase_rotation: non-finite angle");
  return SymplecticOp(
      passive_block(std::exp(std::complex<double>(0.0, angle))));
}

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov,
                             Convention convention)
    : mean_(std::move(mean)), cov_(std::move(cov)), convention_(convention) {
  const auto dim = mean_.size();
  if (dim < 2 || dim % 2 != 0)
    throw std::invalid_argument("GaussianState: mean must have even size >= 2");
  if (cov_.rows() != dim || cov_.cols() != dim)
    throw std::invalid_argument("GaussianState: cov must be 2n x 2n");
  if (!(convention_.v0 > 0.0) || !std::isfinite(convention_.v0))
    throw std::invalid_argument("GaussianState: v0 must be finite and > 0");
}

GaussianState vacuum_state(int n_modes, Convention convention) {
  if (n_modes < 1) throw std::invalid_argument("vacuum_state: n_modes < 1");
  if (!(convention.v0 > 0.0) || !std::isfinite(convention.v0))
    throw std::invalid_argument("vacuum_state: v0 must be finite and > 0");
  return GaussianState(
      Eigen::VectorXd::Zero(2 * n_modes),
      convention.v0 * Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes),
      convention);
}

GaussianState apply_symplectic(const GaussianState& state,
                               const SymplecticOp& op,
                               const std::vector<int>& modes) {
  const int n = state.n_modes();
  check_mode_list(modes, n, static_cast<std::size_t>(op.arity()),
                  "apply_symplectic");
  // Embed: identity elsewhere, op entries scattered over the touched slots.
  Eigen::MatrixXd big = Eigen::MatrixXd::Identity(2 * n, 2 * n);
  const Eigen::MatrixXd& s = op.matrix();
  std::vector<int> slots;
  slots.reserve(modes.size() * 2);
  for (int m : modes) {
    slots.push_back(2 * m);
    slots.push_back(2 * m + 1);
  }
  // A touched row of the identity has its only nonzero on the diagonal,
  // which is itself a touched column, so scattering s covers everything.
  for (std::size_t i = 0; i < slots.size(); ++i)
    for (std::size_t j = 0; j < slots.size(); ++j)
      big(slots[i], slots[j]) = s(static_cast<Eigen::Index>(i),
                                  static_cast<Eigen::Index>(j));
  return GaussianState(big * state.mean(),
                       symmetrized(big * state.cov() * big.transpose()),
                       state.convention());
}

GaussianState loss_channel(const GaussianState& state, int mode, double eta) {
  const int n = state.n_modes();
  if (mode < 0 || mode >= n)
    throw std::invalid_argument("loss_channel: mode out of range");
  if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0)
    throw std::invalid_argument("loss_channel: eta must be in [0, 1]");
  const double root = std::sqrt(eta);
  const int a = 2 * mode;
  Eigen::MatrixXd cov = state.cov();
  Eigen::VectorXd mean = state.mean();
  // Cross blocks scale by sqrt(eta); done by scaling the two rows and
  // columns, which scales the diagonal block by eta as a side effect.
  cov.row(a) *= root;
  cov.row(a + 1) *= root;
  cov.col(a) *= root;
  cov.col(a + 1) *= root;
  cov(a, a) += (1.0 - eta) * state.convention().v0;
  cov(a + 1, a + 1) += (1.0 - eta) * state.convention().v0;
  mean[a] *= root;
  mean[a + 1] *= root;
  return GaussianState(std::move(mean), symmetrized(std::move(cov)),
                       state.convention());
}

double combination_variance(const GaussianState& state,
                            const QuadCombination& combo) {
  const Eigen::VectorXd c = combo.embedded(state.n_modes());
  const double v = c.dot(state.cov() * c);
  // Clamp roundoff-negative values; a genuinely indefinite cov still
  // shows through for anything beyond noise level.
  if (v < 0.0 && v > -1e-12) return 0.0;
  return v;
}

double combination_covariance(const GaussianState& state,
                              const QuadCombination& a,
                              const QuadCombination& b) {
  const Eigen::VectorXd ca = a.embedded(state.n_modes());
  const Eigen::VectorXd cb = b.embedded(state.n_modes());
  return ca.dot(state.cov() * cb);
}

GaussianState rescale_convention(const GaussianState& state, double v0_new) {
  if (!(v0_new > 0.0) || !std::isfinite(v0_new))
    throw std::invalid_argument("rescale_convention: v0 must be > 0");
  const double factor = v0_new / state.convention().v0;
  return GaussianState(std::sqrt(factor) * state.mean(), factor * state.cov(),
                       Convention{v0_new});
}

GaussianState permute_modes(const GaussianState& state,
                            const std::vector<int>& new_from_old) {
  const int n = state.n_modes();
  check_mode_list(new_from_old, n, static_cast<std::size_t>(n),
                  "permute_modes");
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    p(2 * i, 2 * new_from_old[i]) = 1.0;
    p(2 * i + 1, 2 * new_from_old[i] + 1) = 1.0;
  }
  return GaussianState(p * state.mean(),
                       symmetrized(p * state.cov() * p.transpose()),
                       state.convention());
}

GaussianState marginal(const GaussianState& state,
                       const std::vector<int>& modes) {
  const int n = state.n_modes();
  if (modes.empty()) throw std::invalid_argument("marginal: no modes");
  check_mode_list(modes, n, modes.size(), "marginal");
  const int k = static_cast<int>(modes.size());
  Eigen::VectorXd mean(2 * k);
  Eigen::MatrixXd cov(2 * k, 2 * k);
  for (int i = 0; i < k; ++i) {
    mean.segment<2>(2 * i) = state.mean().segment<2>(2 * modes[i]);
    for (int j = 0; j < k; ++j)
      cov.block<2, 2>(2 * i, 2 * j) =
          state.cov().block<2, 2>(2 * modes[i], 2 * modes[j]);
  }
  return GaussianState(std::move(mean), std::move(cov), state.convention());
}

ValidationReport validate(const GaussianState& state) {
  ValidationReport report;
  if (!state.cov().allFinite() || !state.mean().allFinite()) {
    report.ok = false;
    report.message = "non-finite entries";
    return report;
  }
  report.max_symmetry_error =
      (state.cov() - state.cov().transpose()).cwiseAbs().maxCoeff();
  // Uncertainty relation: cov + i v0 Omega >= 0 as a Hermitian matrix.
  const int n = state.n_modes();
  Eigen::MatrixXcd h = state.cov().cast<std::complex<double>>();
  h += std::complex<double>(0.0, state.convention().v0) *
       symplectic_form(n).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) {
    report.ok = false;
    report.message = "eigendecomposition failed";
    return report;
  }
  report.min_heisenberg_eigenvalue = solver.eigenvalues().minCoeff();
  const bool symmetric = report.max_symmetry_error <= kSymmetryTol;
  const bool uncertain = report.min_heisenberg_eigenvalue >= kHeisenbergSlack;
  report.ok = symmetric && uncertain;
  if (!symmetric) report.message = "covariance is not symmetric";
  else if (!uncertain) report.message = "uncertainty relation violated";
  return report;
}

}  // namespace ttpc
