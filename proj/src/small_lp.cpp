#include "conjcalc/small_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conjcalc/errors.hpp"

namespace conjcalc::lp {
namespace {

constexpr double kCoefZero = 1e-12;
constexpr double kFeasTol = 1e-9;
constexpr std::size_t kMaxConstraints = 200000;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Scales so the largest |coefficient| is 1. Returns false for an all-zero row,
// in which case the caller checks 0 <= b.
bool normalize(Constraint& c) {
  double scale = c.a.cwiseAbs().maxCoeff();
  if (scale <= kCoefZero) {
    c.a.setZero();
    return false;
  }
  c.a /= scale;
  c.b /= scale;
  for (Eigen::Index i = 0; i < c.a.size(); ++i)
    if (std::abs(c.a[i]) <= kCoefZero) c.a[i] = 0.0;
  return true;
}

// Normalizes, drops trivial rows and duplicates (keeping the tightest bound).
// Returns false when a trivial row is violated.
bool tidy(std::vector<Constraint>& cs) {
  std::vector<Constraint> kept;
  kept.reserve(cs.size());
  for (auto& c : cs) {
    if (!normalize(c)) {
      if (c.b < -kFeasTol) return false;
      continue;
    }
    kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(), [](const Constraint& x, const Constraint& y) {
    for (Eigen::Index i = 0; i < x.a.size(); ++i)
      if (x.a[i] != y.a[i]) return x.a[i] < y.a[i];
    return x.b < y.b;
  });
  std::vector<Constraint> unique;
  unique.reserve(kept.size());
  for (auto& c : kept) {
    if (!unique.empty() && (unique.back().a - c.a).cwiseAbs().maxCoeff() <= 1e-14) continue;
    unique.push_back(std::move(c));
  }
  cs = std::move(unique);
  return true;
}

// Eliminates variable j. Returns false on detected infeasibility.
bool eliminate(std::vector<Constraint>& cs, int j) {
  std::vector<Constraint> pos, neg, out;
  for (auto& c : cs) {
    if (c.a[j] > 0.0)
      pos.push_back(c);
    else if (c.a[j] < 0.0)
      neg.push_back(c);
    else
      out.push_back(c);
  }
  if (pos.size() * neg.size() + out.size() > kMaxConstraints)
    throw Error("Fourier-Motzkin elimination exceeded its constraint budget");
  for (const auto& p : pos) {
    for (const auto& q : neg) {
      Constraint r;
      const double sp = p.a[j];
      const double sq = -q.a[j];
      r.a = p.a / sp + q.a / sq;
      r.b = p.b / sp + q.b / sq;
      r.a[j] = 0.0;
      out.push_back(std::move(r));
    }
  }
  cs = std::move(out);
  return tidy(cs);
}

// Bounds on variable j implied by `cs` once the variables in `known` are fixed.
std::pair<double, double> interval_for(const std::vector<Constraint>& cs, const Vec& z, int j) {
  double lo = -kInf, hi = kInf;
  for (const auto& c : cs) {
    const double aj = c.a[j];
    if (aj == 0.0) continue;
    double rest = c.b;
    for (Eigen::Index k = 0; k < c.a.size(); ++k)
      if (k != j) rest -= c.a[k] * z[k];
    const double bound = rest / aj;
    if (aj > 0.0)
      hi = std::min(hi, bound);
    else
      lo = std::max(lo, bound);
  }
  return {lo, hi};
}

double pick(double lo, double hi) {
  if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
  if (std::isfinite(lo)) return lo <= 0.0 ? 0.0 : lo + 1.0;
  if (std::isfinite(hi)) return hi >= 0.0 ? 0.0 : hi - 1.0;
  return 0.0;
}

}  // namespace

std::optional<Vec> feasible_point(const std::vector<Constraint>& constraints, int dim) {
  std::vector<std::vector<Constraint>> stages;
  std::vector<Constraint> cs = constraints;
  if (!tidy(cs)) return std::nullopt;
  for (int j = 0; j < dim; ++j) {
    stages.push_back(cs);
    if (!eliminate(cs, j)) return std::nullopt;
  }
  // All variables are eliminated; tidy() has already checked 0 <= b for each row.
  Vec z = Vec::Zero(dim);
  for (int j = dim - 1; j >= 0; --j) {
    // Variables < j are still unknown here but have zero coefficients in stage j.
    auto [lo, hi] = interval_for(stages[j], z, j);
    if (lo > hi + kFeasTol * (1.0 + std::abs(lo) + std::abs(hi))) return std::nullopt;
    z[j] = lo > hi ? 0.5 * (lo + hi) : pick(lo, hi);
  }
  return z;
}

std::optional<ExtReal> maximize(const Vec& obj, const std::vector<Constraint>& constraints,
                                int dim) {
  // Extra variable zeta with zeta - obj . z <= 0; after eliminating z the
  // rows mentioning zeta bound it from above.
  std::vector<Constraint> cs;
  cs.reserve(constraints.size() + 1);
  for (const auto& c : constraints) {
    Constraint e;
    e.a = Vec::Zero(dim + 1);
    e.a.head(dim) = c.a;
    e.b = c.b;
    cs.push_back(std::move(e));
  }
  Constraint objective;
  objective.a = Vec::Zero(dim + 1);
  objective.a.head(dim) = -obj;
  objective.a[dim] = 1.0;
  cs.push_back(objective);

  if (!tidy(cs)) return std::nullopt;
  for (int j = 0; j < dim; ++j)
    if (!eliminate(cs, j)) return std::nullopt;

  double hi = kInf;
  for (const auto& c : cs) {
    if (c.a[dim] > 0.0) hi = std::min(hi, c.b / c.a[dim]);
  }
  if (!std::isfinite(hi)) return ExtReal::infinity();
  return ExtReal(hi);
}

}  // namespace conjcalc::lp
