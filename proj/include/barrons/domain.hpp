#pragma once

#include <span>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace barrons {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when caller-supplied data violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a runtime invariant that the algorithms guarantee is broken.
/// Seeing one means there is a bug, not bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr double kSimplexSumTol = 1e-9;
inline constexpr double kFloorSlack = 1e-12;

/// Asset count N and horizon T. Requires N >= 2 and T > N.
class ProblemDims {
 public:
  ProblemDims(int assets, int horizon);

  int assets() const { return assets_; }
  int horizon() const { return horizon_; }

  /// Lower bound 1/(NT) on every coordinate of the clipped simplex.
  double floor() const { return 1.0 / (static_cast<double>(assets_) * horizon_); }

  bool operator==(const ProblemDims&) const = default;

 private:
  int assets_;
  int horizon_;
};

/// One period's price relatives, scaled so the largest entry is exactly 1.
class MarketRound {
 public:
  /// Divides by the maximum entry. Rejects empty, negative, non-finite and
  /// all-zero input.
  static MarketRound normalize(std::span<const double> raw);
  static MarketRound normalize(const Vector& raw);

  const Vector& relatives() const { return r_; }
  int size() const { return static_cast<int>(r_.size()); }
  double operator[](int i) const { return r_[i]; }

 private:
  explicit MarketRound(Vector r) : r_(std::move(r)) {}
  Vector r_;
};

/// A portfolio: nonnegative weights summing to one.
///
/// Two membership levels exist. `clipped` enforces x_i >= 1/(NT) (the
/// decision set of the OMD learners and the comparator class); `simplex`
/// only enforces x_i >= 0 (EG, OGD, Soft-Bayes, grid Universal Portfolio).
class PortfolioState {
 public:
  static PortfolioState clipped(Vector x, const ProblemDims& dims);
  static PortfolioState simplex(Vector x);
  static PortfolioState uniform(int n);

  const Vector& weights() const { return x_; }
  int size() const { return static_cast<int>(x_.size()); }
  double operator[](int i) const { return x_[i]; }

  bool in_clipped_simplex(const ProblemDims& dims) const;

 private:
  explicit PortfolioState(Vector x) : x_(std::move(x)) {}
  Vector x_;
};

/// Loss f(x) = -ln<x, r> in nats and its gradient -r/<x, r>.
struct LossRecord {
  double loss = 0.0;
  Vector gradient;
};

LossRecord loss_and_gradient(const PortfolioState& x, const MarketRound& r);

/// -ln<u, r> for a raw weight vector. Throws ValidationError when <u, r> <= 0.
double log_loss(const Vector& u, const MarketRound& r);

/// Maps u' on the full simplex to (1 - 1/T) u' + 1/(NT); the image lies in
/// the clipped simplex and loses at most 2 nats against u' on any sequence.
PortfolioState smooth_comparator(const Vector& u_prime, const ProblemDims& dims);

/// Explains why `x` is not a point of the requested simplex, or returns an
/// empty string when it is.
std::string clipped_membership_error(const Vector& x, const ProblemDims& dims);
std::string simplex_membership_error(const Vector& x);

}  // namespace barrons
