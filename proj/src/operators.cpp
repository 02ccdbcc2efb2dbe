#include "conjcalc/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conjcalc/errors.hpp"

namespace conjcalc {
namespace {

void check_square(const Mat& M, const char* what) {
  const auto n = M.rows();
  if (M.cols() != n) throw InvalidOperator(std::string(what) + " must be square");
  if (n < 1 || n > kMaxDim) throw InvalidOperator(std::string(what) + ": dimension must be in 1..3");
  if (!M.allFinite()) throw InvalidOperator(std::string(what) + " must have finite entries");
  const double scale = M.cwiseAbs().maxCoeff();
  if (scale == 0.0 || std::abs(M.determinant()) < 1e-12 * std::pow(scale, static_cast<double>(n)))
    throw InvalidOperator(std::string(what) + " is not invertible");
}

void check_vec(const Vec& v, long n, const char* what) {
  if (v.size() != n) throw DimensionMismatch(what, n, v.size());
  if (!v.allFinite()) throw InvalidOperator(std::string(what) + " must be finite");
}

void check_scalars(double tau, double shift, const char* shift_name) {
  if (!std::isfinite(tau) || !(tau > 0.0)) throw InvalidOperator("tau must be > 0");
  if (!std::isfinite(shift)) throw InvalidOperator(std::string(shift_name) + " must be finite");
}

double rel(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) worst = std::max(worst, rel(a(i, j), b(i, j)));
  return worst;
}

// For a scaled signed permutation, source_axis[j] is the row i with E(i, j) != 0.
std::optional<std::vector<int>> monomial_pattern(const Mat& E) {
  const auto n = E.rows();
  std::vector<int> source(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    int nonzero = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (E(i, j) == 0.0) continue;
      if (++nonzero > 1 || source[static_cast<std::size_t>(j)] != -1) return std::nullopt;
      source[static_cast<std::size_t>(j)] = static_cast<int>(i);
    }
  }
  return source;
}

GridFn apply_to_grid(const PreservingOp& T, const GridFn& f) {
  const int n = f.dim();
  const Mat Einv = T.E().inverse();
  const auto& src_axes = f.axes();

  std::vector<GridAxis> axes(static_cast<std::size_t>(n));
  const auto pattern = monomial_pattern(T.E());
  if (pattern) {
    // x_j = (z_i - c_i) / E(i, j) maps source axis i onto target axis j
    for (int j = 0; j < n; ++j) {
      const int i = (*pattern)[static_cast<std::size_t>(j)];
      const auto& ax = src_axes[static_cast<std::size_t>(i)];
      const double e = T.E()(i, j);
      const double a = (ax.lo - T.c()[i]) / e;
      const double b = (ax.hi - T.c()[i]) / e;
      axes[static_cast<std::size_t>(j)] = {std::min(a, b), std::max(a, b), ax.count};
    }
  } else {
    // bounding box of the pulled-back corners
    Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
    Vec hi = -lo;
    for (int corner = 0; corner < (1 << n); ++corner) {
      Point z(n);
      for (int k = 0; k < n; ++k) {
        const auto& ax = src_axes[static_cast<std::size_t>(k)];
        z[k] = ((corner >> k) & 1) ? ax.hi : ax.lo;
      }
      const Point x = Einv * (z - T.c());
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    for (int k = 0; k < n; ++k)
      axes[static_cast<std::size_t>(k)] = {lo[k], hi[k], src_axes[static_cast<std::size_t>(k)].count};
  }

  std::size_t total = 1;
  for (const auto& ax : axes) total *= static_cast<std::size_t>(ax.count);
  const GridFn shape(axes, std::vector<double>(total, 0.0));
  std::vector<double> values(total);
  std::vector<int> src_idx(static_cast<std::size_t>(n));
  for (std::size_t flat = 0; flat < total; ++flat) {
    const Point x = shape.node(flat);
    double fx;
    if (pattern) {
      const auto idx = shape.multi_index(flat);
      for (int j = 0; j < n; ++j) {
        const int i = (*pattern)[static_cast<std::size_t>(j)];
        const int cnt = src_axes[static_cast<std::size_t>(i)].count;
        src_idx[static_cast<std::size_t>(i)] =
            T.E()(i, j) > 0.0 ? idx[static_cast<std::size_t>(j)] : cnt - 1 - idx[static_cast<std::size_t>(j)];
      }
      fx = f.raw_values()[f.flat_index(src_idx)];
    } else {
      fx = f(T.E() * x + T.c()).raw();
    }
    values[flat] = std::isfinite(fx) ? T.tau() * fx + T.w().dot(x) + T.beta() : fx;
  }
  return GridFn(std::move(axes), std::move(values));
}

}  // namespace

PreservingOp::PreservingOp(Mat E, Point c, DualVec w, double tau, double beta)
    : E_(std::move(E)), c_(std::move(c)), w_(std::move(w)), tau_(tau), beta_(beta) {
  check_square(E_, "E");
  check_vec(c_, E_.rows(), "c");
  check_vec(w_, E_.rows(), "w");
  check_scalars(tau_, beta_, "beta");
}

PreservingOp PreservingOp::identity(int dim) {
  return PreservingOp(Mat::Identity(dim, dim), Vec::Zero(dim), Vec::Zero(dim), 1.0, 0.0);
}

ReversingOp::ReversingOp(Mat H, DualVec v, Point y, double rho, double tau)
    : H_(std::move(H)), v_(std::move(v)), y_(std::move(y)), rho_(rho), tau_(tau) {
  check_square(H_, "H");
  check_vec(v_, H_.rows(), "v");
  check_vec(y_, H_.rows(), "y");
  check_scalars(tau_, rho_, "rho");
}

ReversingOp ReversingOp::conjugation(int dim) {
  return ReversingOp(Mat::Identity(dim, dim), Vec::Zero(dim), Vec::Zero(dim), 0.0, 1.0);
}

AffineAction affine_action(const PreservingOp& T) {
  return {T.tau() * T.E().transpose(), T.w(), T.tau() * T.c(), T.tau(), T.beta()};
}

AffineFn act(const AffineAction& A, const AffineFn& h) {
  if (h.dim() != A.D.rows()) throw DimensionMismatch("act", A.D.rows(), h.dim());
  return AffineFn(A.D * h.slope + A.w, A.d.dot(h.slope) + A.tau * h.offset + A.beta);
}

ConvexFn apply_preserving(const PreservingOp& T, const ConvexFn& f) {
  if (f.dim() != T.dim()) throw DimensionMismatch("apply_preserving", T.dim(), f.dim());

  if (const auto* poly = f.polyhedral()) {
    const AffineAction A = affine_action(T);
    std::vector<AffineFn> pieces;
    pieces.reserve(poly->pieces().size());
    for (const auto& p : poly->pieces()) pieces.push_back(act(A, p));
    std::vector<Halfspace> domain;
    domain.reserve(poly->domain().size());
    for (const auto& h : poly->domain())
      domain.emplace_back(T.E().transpose() * h.normal, h.bound - h.normal.dot(T.c()));
    return PolyhedralFn(std::move(pieces), std::move(domain));
  }

  if (const auto* ind = f.indicator()) {
    const Point x = T.E().inverse() * (ind->anchor() - T.c());
    return PointIndicatorFn(x, T.tau() * ind->level() + T.w().dot(x) + T.beta());
  }

  return apply_to_grid(T, *f.grid());
}

PreservingOp compose(const PreservingOp& T1, const PreservingOp& T2) {
  if (T1.dim() != T2.dim()) throw DimensionMismatch("compose", T1.dim(), T2.dim());
  // T1(T2 f)(x) = tau1 [tau2 f(E2(E1 x + c1) + c2) + <w2, E1 x + c1> + beta2] + <w1,x> + beta1
  return PreservingOp(T2.E() * T1.E(), T2.E() * T1.c() + T2.c(),
                      T1.tau() * T1.E().transpose() * T2.w() + T1.w(), T1.tau() * T2.tau(),
                      T1.tau() * T2.w().dot(T1.c()) + T1.tau() * T2.beta() + T1.beta());
}

PreservingOp invert(const PreservingOp& T) {
  const Mat Einv = T.E().inverse();
  const Point Einv_c = Einv * T.c();
  return PreservingOp(Einv, -Einv_c, -(Einv.transpose() * T.w()) / T.tau(), 1.0 / T.tau(),
                      (Einv_c.dot(T.w()) - T.beta()) / T.tau());
}

InvolutionVerdict classify_involution(const PreservingOp& T, double tol) {
  const int n = T.dim();
  const Mat I = Mat::Identity(n, n);
  InvolutionVerdict v;
  auto check = [&](double residual, const char* name) {
    if (!(residual <= tol)) v.failed_conditions.emplace_back(name);
  };
  check((T.E() * T.E() - I).cwiseAbs().maxCoeff(), "E^2 = I");
  check(((T.E() + I) * T.c()).cwiseAbs().maxCoeff(), "(E + I)c = 0");
  check(((T.E().transpose() + I) * T.w()).cwiseAbs().maxCoeff(), "(E^T + I)w = 0");
  check(std::abs(T.tau() - 1.0), "tau = 1");
  check(std::abs(T.beta() + 0.5 * T.c().dot(T.w())), "beta = -<c,w>/2");
  v.is_involution = v.failed_conditions.empty();
  return v;
}

ConvexFn apply_reversing(const ReversingOp& S, const ConvexFn& f, ConjPreference pref,
                         const std::optional<std::vector<GridAxis>>& dual_axes) {
  if (f.dim() != S.dim()) throw DimensionMismatch("apply_reversing", S.dim(), f.dim());
  return apply_preserving(dual_side(S), conjugate(f, pref, dual_axes).fn);
}

ReversingOp to_reversing(const PreservingOp& T) {
  // (T f)*(u) = tau f*(tau^{-1} E^{-T}(u - w)) - <u, E^{-1}c> + <w, E^{-1}c> - beta
  const Mat Einv = T.E().inverse();
  const Point Einv_c = Einv * T.c();
  return ReversingOp(Einv / T.tau(), -(Einv.transpose() * T.w()) / T.tau(), -Einv_c,
                     T.w().dot(Einv_c) - T.beta(), T.tau());
}

PreservingOp from_reversing(const ReversingOp& S) {
  const Mat E = S.H().inverse() / S.tau();
  const DualVec w = -S.tau() * (E.transpose() * S.v());
  const Point c = -(E * S.y());
  return PreservingOp(E, c, w, S.tau(), -w.dot(S.y()) - S.rho());
}

PreservingOp dualize(const PreservingOp& T) {
  return dual_side(to_reversing(T));
}

PreservingOp compose_reversing(const ReversingOp& S2, const ReversingOp& S1) {
  if (S1.dim() != S2.dim()) throw DimensionMismatch("compose_reversing", S2.dim(), S1.dim());
  // S_i = F o T_i and F o T2 = R2 o F, so S2 o S1 = R2 o F o F o T1 = R2 o T1.
  return compose(dualize(from_reversing(S2)), from_reversing(S1));
}

PreservingOp dual_side(const ReversingOp& S) {
  return PreservingOp(S.H().transpose(), S.v(), S.y(), S.tau(), S.rho());
}

ReversingOp from_dual_side(const PreservingOp& R) {
  return ReversingOp(R.E().transpose(), R.c(), R.w(), R.beta(), R.tau());
}

double parameter_distance(const PreservingOp& a, const PreservingOp& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("parameter_distance", a.dim(), b.dim());
  return std::max({rel(a.E(), b.E()), rel(a.c(), b.c()), rel(a.w(), b.w()), rel(a.tau(), b.tau()),
                   rel(a.beta(), b.beta())});
}

double parameter_distance(const ReversingOp& a, const ReversingOp& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("parameter_distance", a.dim(), b.dim());
  return std::max({rel(a.H(), b.H()), rel(a.v(), b.v()), rel(a.y(), b.y()), rel(a.rho(), b.rho()),
                   rel(a.tau(), b.tau())});
}

}  // namespace conjcalc
