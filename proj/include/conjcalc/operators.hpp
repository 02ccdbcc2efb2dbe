#pragma once

#include <string>
#include <vector>

#include "conjcalc/conjugate.hpp"
#include "conjcalc/convex_fn.hpp"

namespace conjcalc {

/// T[E,c,w,tau,beta](f)(x) = tau f(Ex + c) + <w,x> + beta, with E invertible and
/// tau > 0. Every fully order preserving operator on convex functions has this
/// form.
class PreservingOp {
 public:
  PreservingOp(Mat E, Point c, DualVec w, double tau, double beta);

  static PreservingOp identity(int dim);

  int dim() const noexcept { return static_cast<int>(E_.rows()); }
  const Mat& E() const noexcept { return E_; }
  const Point& c() const noexcept { return c_; }
  const DualVec& w() const noexcept { return w_; }
  double tau() const noexcept { return tau_; }
  double beta() const noexcept { return beta_; }

 private:
  Mat E_;
  Point c_;
  DualVec w_;
  double tau_;
  double beta_;
};

/// S[H,v,y,rho,tau](f)(u) = tau f*(H^T u + v) + <u,y> + rho.
class ReversingOp {
 public:
  ReversingOp(Mat H, DualVec v, Point y, double rho, double tau);

  /// Plain Fenchel conjugation.
  static ReversingOp conjugation(int dim);

  int dim() const noexcept { return static_cast<int>(H_.rows()); }
  const Mat& H() const noexcept { return H_; }
  const DualVec& v() const noexcept { return v_; }
  const Point& y() const noexcept { return y_; }
  double rho() const noexcept { return rho_; }
  double tau() const noexcept { return tau_; }

 private:
  Mat H_;
  DualVec v_;
  Point y_;
  double rho_;
  double tau_;
};

/// Action of T on affine functions: (u, alpha) -> (D u + w, <d,u> + tau alpha + beta)
/// with D = tau E^T and d = tau c.
struct AffineAction {
  Mat D;
  DualVec w;
  DualVec d;
  double tau;
  double beta;
};

AffineAction affine_action(const PreservingOp& T);
AffineFn act(const AffineAction& A, const AffineFn& h);

/// Exact for polyhedral and point-indicator inputs. Grids are resampled on the
/// pullback of their box at the source resolution; when E is a scaled signed
/// permutation the pulled-back nodes coincide with source nodes and values are
/// copied, otherwise the multilinear interpolant is sampled.
ConvexFn apply_preserving(const PreservingOp& T, const ConvexFn& f);

/// compose(T1, T2)(f) = T1(T2(f)).
PreservingOp compose(const PreservingOp& T1, const PreservingOp& T2);

PreservingOp invert(const PreservingOp& T);

struct InvolutionVerdict {
  bool is_involution = false;
  std::vector<std::string> failed_conditions;
};

/// Checks E^2 = I, (E + I)c = 0, (E^T + I)w = 0, tau = 1 and beta = -<c,w>/2,
/// each in max-norm against `tol`.
InvolutionVerdict classify_involution(const PreservingOp& T, double tol = 1e-9);

/// S(f) = tau f*(H^T u + v) + <u,y> + rho, computed as an affine transform of
/// conjugate(f). `dual_axes` is forwarded to the grid conjugate.
ConvexFn apply_reversing(const ReversingOp& S, const ConvexFn& f,
                         ConjPreference pref = ConjPreference::automatic,
                         const std::optional<std::vector<GridAxis>>& dual_axes = std::nullopt);

/// S with apply_reversing(S, f) = conjugate(apply_preserving(T, f)).
ReversingOp to_reversing(const PreservingOp& T);

/// Inverse of to_reversing.
PreservingOp from_reversing(const ReversingOp& S);

/// R on the dual side with conjugate(T f) = R(conjugate(f)).
PreservingOp dualize(const PreservingOp& T);

/// The preserving operator S2 o S1.
PreservingOp compose_reversing(const ReversingOp& S2, const ReversingOp& S1);

/// The preserving operator R with S(f) = R(f*): E_R = H^T, c_R = v, w_R = y,
/// tau_R = tau, beta_R = rho.
PreservingOp dual_side(const ReversingOp& S);
/// Inverse of dual_side.
ReversingOp from_dual_side(const PreservingOp& R);

/// Largest relative deviation between corresponding parameters.
double parameter_distance(const PreservingOp& a, const PreservingOp& b);
double parameter_distance(const ReversingOp& a, const ReversingOp& b);

}  // namespace conjcalc
