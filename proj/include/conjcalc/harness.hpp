#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "conjcalc/convex_fn.hpp"
#include "conjcalc/operators.hpp"

namespace conjcalc {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Lifting maps on affine functions to convex functions (n = 1)

/// Piecewise-affine map on the real line. Between consecutive breaks the map is
/// u -> scale * u + shift; the value at each break is given separately, so the
/// map may jump there.
class PiecewiseAffineMap {
 public:
  struct Cell {
    double scale = 1.0;
    double shift = 0.0;
  };

  /// `cells.size()` must be `breaks.size() + 1` and `at_breaks.size()` must be
  /// `breaks.size()`; breaks strictly ascending.
  PiecewiseAffineMap(std::vector<double> breaks, std::vector<Cell> cells,
                     std::vector<double> at_breaks);

  static PiecewiseAffineMap identity();

  const std::vector<double>& breaks() const noexcept { return breaks_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const std::vector<double>& at_breaks() const noexcept { return at_breaks_; }

  double operator()(double u) const;

 private:
  std::vector<double> breaks_;
  std::vector<Cell> cells_;
  std::vector<double> at_breaks_;
};

/// alpha -> scale * alpha + shift with scale > 0.
struct IncreasingAffine {
  double scale = 1.0;
  double shift = 0.0;

  IncreasingAffine() = default;
  IncreasingAffine(double scale, double shift);
  double operator()(double alpha) const { return scale * alpha + shift; }
};

/// R^(h_{u,alpha}) = h_{psi(u), phi(alpha)}.
struct LiftedOp {
  PiecewiseAffineMap slope_map = PiecewiseAffineMap::identity();
  IncreasingAffine offset_map;

  static LiftedOp identity() { return {}; }
  /// psi(u) = u for |u| < 1 and -u otherwise, phi the identity.
  static LiftedOp flip();
  static LiftedOp offset_shift(double delta);
};

/// R(f) = sup of R^(h) over the affine minorants h of f. Because phi is
/// increasing only tight minorants matter, and since psi and f* are both affine
/// between consecutive candidates the supremum is attained at the conjugate's
/// breakpoints, at psi's breaks, or in a one-sided limit there. Computed in
/// exact arithmetic.
PolyhedralFn lift(const LiftedOp& R, const PolyhedralFn& f);

// ---------------------------------------------------------------------------
// Reports

struct Failure {
  int trial = 0;
  std::uint64_t seed = 0;
  /// FNV-1a over the trial's inputs.
  std::uint64_t digest = 0;
  Point x;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string note;
};

struct PropertyReport {
  enum class Expectation { no_failures, failures };

  std::string property;
  int trials = 0;
  std::uint64_t seed = 0;
  Expectation expectation = Expectation::no_failures;
  std::vector<Failure> failures;
  std::vector<std::pair<std::string, double>> metrics;

  bool meets_expectation() const noexcept {
    return failures.empty() == (expectation == Expectation::no_failures);
  }
  std::optional<double> metric(const std::string& name) const;
};

/// Line-oriented text block; doubles are written with 17 significant digits.
void write_report(std::ostream& os, const PropertyReport& report);
std::string to_text(const PropertyReport& report);

/// Shortest text that reads back to exactly `x` is not required; this gives 17
/// significant digits and "inf"/"-inf" for infinities.
std::string format_double(double x);

std::uint64_t fnv1a(std::uint64_t hash, double x);
std::uint64_t digest(const ConvexFn& f, std::uint64_t hash = 14695981039346656037ULL);
std::uint64_t digest(const PreservingOp& T, std::uint64_t hash = 14695981039346656037ULL);
std::uint64_t digest(const ReversingOp& S, std::uint64_t hash = 14695981039346656037ULL);

// ---------------------------------------------------------------------------
// Generators. Each trial uses Rng(seed + trial), so a failure is replayed by
// calling the same generators with its recorded seed.

/// 2 to 6 pieces with slopes and offsets uniform in [-5, 5]; one time in three
/// the domain is cut by one or two halfspaces that keep the origin inside.
PolyhedralFn random_polyhedral(Rng& rng, int dim);

/// (f, g) with f <= g exactly: g adds a random piece to f and sometimes a
/// further domain cut.
std::pair<PolyhedralFn, PolyhedralFn> ordered_pair(Rng& rng, int dim);

/// E with singular values in a moderate range, c and w in [-3, 3]^n,
/// tau in [0.5, 3], beta in [-5, 5].
PreservingOp random_preserving(Rng& rng, int dim);
ReversingOp random_reversing(Rng& rng, int dim);

/// E = P D P^{-1} with D = diag(+-1), c and w in the -1 eigenspaces of E and
/// E^T, tau = 1, beta = -<c,w>/2. `min_plus` forces that many +1 eigenvalues.
PreservingOp random_involution(Rng& rng, int dim, int min_plus = 0);

enum class Perturbation { tau, beta, E, c, w };

std::string_view to_string(Perturbation p) noexcept;

/// A compliant involution with exactly one condition broken by `magnitude`.
PreservingOp perturbed_involution(Rng& rng, int dim, Perturbation which, double magnitude);

// ---------------------------------------------------------------------------
// Property checks

using OpFactory = std::function<PreservingOp(Rng&)>;

/// f <= g implies T f <= T g on ordered pairs, one fresh operator per trial.
PropertyReport check_order_preserving(const OpFactory& make_op, int dim, int trials,
                                      std::uint64_t seed, double eps = kOrderEps);
PropertyReport check_order_preserving(const PreservingOp& T, int trials, std::uint64_t seed,
                                      double eps = kOrderEps);

enum class OrderDirection {
  /// f <= g implies R f <= R g
  forward,
  /// R f <= R g implies f <= g; odd trials use unordered random pairs and even
  /// trials the shapes a|x| and max{bx, 0} with a < 1 <= b
  reverse,
};

PropertyReport check_order_preserving(const LiftedOp& R, int trials, std::uint64_t seed,
                                      OrderDirection direction = OrderDirection::forward);

enum class PairKind { polyhedral, grid };

using ReversingFactory = std::function<ReversingOp(Rng&)>;

/// f <= g implies S f >= S g. Grid pairs are sampled polyhedral functions on
/// a shared 1-D grid of `grid_nodes` nodes; both conjugates use the same dual
/// axes.
PropertyReport check_order_reversing(const ReversingFactory& make_op, int dim, int trials,
                                     std::uint64_t seed, PairKind kind = PairKind::polyhedral,
                                     double tol = kOrderEps, int grid_nodes = 513);
PropertyReport check_order_reversing(const ReversingOp& S, int trials, std::uint64_t seed,
                                     PairKind kind = PairKind::polyhedral,
                                     double tol = kOrderEps, int grid_nodes = 513);

/// T(T(f)) = f on every function of the suite, relative tolerance `tol`. The
/// metric "parametric" holds classify_involution's verdict (1 or 0).
PropertyReport check_involution_behavioral(const PreservingOp& T,
                                           const std::vector<ConvexFn>& suite,
                                           double tol = 1e-9);

/// Even trials draw a compliant involution, odd trials one with a single
/// condition broken by a magnitude in [1e-3, 1e-1] (cycling through tau, beta,
/// E, c, w). A failure is any trial where the parametric or the behavioral
/// verdict disagrees with how the operator was built.
PropertyReport check_involution_agreement(int trials, std::uint64_t seed);

/// Random polyhedral functions and one point indicator.
std::vector<ConvexFn> involution_suite(int dim, std::uint64_t seed, int count = 4);

/// f** equals f (canonical form, bitwise) and the tight-minorant supremum agrees
/// with f** on samples, for random 1-D polyhedral f.
PropertyReport check_fenchel_moreau(int trials, std::uint64_t seed);

/// T(sup{f, g}) = sup{T f, T g}, comparing pieces and domains bitwise.
PropertyReport check_sup_preservation(int dim, int trials, std::uint64_t seed);

using VecMap = std::function<DualVec(const DualVec&)>;

/// u -> <M(u), x> quasiconvex for every direction x: sampled on a 33-point
/// s-grid between a lattice of pairs and `trials` random pairs in the box.
/// When `inverse` is given it is scanned the same way and a failure on either
/// side is reported.
PropertyReport check_quasiconvex_map(const VecMap& M, const std::optional<VecMap>& inverse,
                                     int dim, const std::vector<Point>& directions, int trials,
                                     std::uint64_t seed, double box_lo = -2.0,
                                     double box_hi = 2.0);

/// Distance of M(s u1 + (1-s) u2) from the segment [M(u2), M(u1)] over a
/// 33-point s-grid. Metric "max_deviation"; failures are deviations > 1e-9.
PropertyReport check_segments_to_segments(const VecMap& M, int dim, int trials,
                                          std::uint64_t seed, double box_lo = -1.0,
                                          double box_hi = 1.0);

/// u if |u| < 1, -u otherwise (Euclidean norm).
DualVec radial_flip(const DualVec& u);
/// (u_1, u_2^3) in two dimensions.
DualVec cubic_map(const DualVec& u);

/// R = lift(flip), f1 = |x|/2, f2 = max{x, 0}. Asserts R f1 <= R f2 and that
/// f1 <= f2 fails; metrics carry the witness and the values there.
PropertyReport counterexample_flip();

// ---------------------------------------------------------------------------
// Suites for the command line

inline constexpr std::string_view kSuiteNames[] = {"order", "reversing", "involution",
                                                   "fenchel-moreau", "counterexample", "all"};

/// Throws InvalidArgument for an unknown suite.
std::vector<PropertyReport> run_suite(std::string_view name, int trials, std::uint64_t seed);

}  // namespace conjcalc
