#include "barrons/domain.hpp"

#include <cmath>
#include <sstream>

namespace barrons {

ProblemDims::ProblemDims(int assets, int horizon) : assets_(assets), horizon_(horizon) {
  if (assets < 2) {
    throw ValidationError("asset count must be at least 2, got " + std::to_string(assets));
  }
  if (horizon <= assets) {
    throw ValidationError("horizon T must exceed asset count N (T=" + std::to_string(horizon) +
                          ", N=" + std::to_string(assets) + ")");
  }
}

MarketRound MarketRound::normalize(std::span<const double> raw) {
  if (raw.empty()) {
    throw ValidationError("price-relative vector is empty");
  }
  double max_entry = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = raw[i];
    if (!std::isfinite(v)) {
      throw ValidationError("price relative " + std::to_string(i) + " is not finite");
    }
    if (v < 0.0) {
      throw ValidationError("price relative " + std::to_string(i) + " is negative");
    }
    max_entry = std::max(max_entry, v);
  }
  if (max_entry <= 0.0) {
    throw ValidationError("price-relative vector has no positive entry");
  }
  Vector r(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t i = 0; i < raw.size(); ++i) {
    // The maximal entry maps to exactly 1.0 since v / v == 1 in IEEE arithmetic.
    r[static_cast<Eigen::Index>(i)] = raw[i] / max_entry;
  }
  return MarketRound(std::move(r));
}

MarketRound MarketRound::normalize(const Vector& raw) {
  return normalize(std::span<const double>(raw.data(), static_cast<std::size_t>(raw.size())));
}

std::string simplex_membership_error(const Vector& x) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || x[i] < 0.0) {
      os << "weight " << i << " = " << x[i] << " is not a finite nonnegative number";
      return os.str();
    }
  }
  const double sum = x.sum();
  if (std::abs(sum - 1.0) > kSimplexSumTol) {
    os << "weights sum to " << sum << ", not 1";
    return os.str();
  }
  return {};
}

std::string clipped_membership_error(const Vector& x, const ProblemDims& dims) {
  if (x.size() != dims.assets()) {
    return "weight vector has " + std::to_string(x.size()) + " entries, expected " +
           std::to_string(dims.assets());
  }
  if (auto err = simplex_membership_error(x); !err.empty()) {
    return err;
  }
  const double lb = dims.floor() - kFloorSlack;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < lb) {
      std::ostringstream os;
      os.precision(17);
      os << "weight " << i << " = " << x[i] << " is below the floor 1/(NT) = " << dims.floor();
      return os.str();
    }
  }
  return {};
}

PortfolioState PortfolioState::clipped(Vector x, const ProblemDims& dims) {
  if (auto err = clipped_membership_error(x, dims); !err.empty()) {
    throw ValidationError("not in the clipped simplex: " + err);
  }
  return PortfolioState(std::move(x));
}

PortfolioState PortfolioState::simplex(Vector x) {
  if (x.size() < 1) {
    throw ValidationError("empty weight vector");
  }
  if (auto err = simplex_membership_error(x); !err.empty()) {
    throw ValidationError("not in the simplex: " + err);
  }
  return PortfolioState(std::move(x));
}

PortfolioState PortfolioState::uniform(int n) {
  if (n < 1) {
    throw ValidationError("uniform portfolio needs at least one asset");
  }
  return PortfolioState(Vector::Constant(n, 1.0 / n));
}

bool PortfolioState::in_clipped_simplex(const ProblemDims& dims) const {
  return clipped_membership_error(x_, dims).empty();
}

double log_loss(const Vector& u, const MarketRound& r) {
  if (u.size() != r.size()) {
    throw ValidationError("portfolio and market round differ in size");
  }
  const double wealth = u.dot(r.relatives());
  if (!(wealth > 0.0)) {
    throw ValidationError("portfolio earns nothing in this round: <x, r> = " +
                          std::to_string(wealth));
  }
  return -std::log(wealth);
}

LossRecord loss_and_gradient(const PortfolioState& x, const MarketRound& r) {
  const double loss = log_loss(x.weights(), r);
  const double wealth = x.weights().dot(r.relatives());
  return LossRecord{loss, -r.relatives() / wealth};
}

PortfolioState smooth_comparator(const Vector& u_prime, const ProblemDims& dims) {
  if (u_prime.size() != dims.assets()) {
    throw ValidationError("comparator has the wrong number of assets");
  }
  if (auto err = simplex_membership_error(u_prime); !err.empty()) {
    throw ValidationError("comparator is not on the simplex: " + err);
  }
  const double shrink = 1.0 - 1.0 / dims.horizon();
  Vector u = shrink * u_prime + Vector::Constant(dims.assets(), dims.floor());
  return PortfolioState::clipped(std::move(u), dims);
}

}  // namespace barrons
