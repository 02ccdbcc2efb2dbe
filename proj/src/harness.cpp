#include "conjcalc/harness.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ostream>
#include <sstream>

#include <Eigen/SVD>

#include "conjcalc/conjugate.hpp"
#include "conjcalc/errors.hpp"
#include "conjcalc/exact_pwl.hpp"
#include "conjcalc/parallel.hpp"

namespace conjcalc {

// ---------------------------------------------------------------------------
// Lifting

PiecewiseAffineMap::PiecewiseAffineMap(std::vector<double> breaks, std::vector<Cell> cells,
                                       std::vector<double> at_breaks)
    : breaks_(std::move(breaks)), cells_(std::move(cells)), at_breaks_(std::move(at_breaks)) {
  if (cells_.size() != breaks_.size() + 1 || at_breaks_.size() != breaks_.size())
    throw InvalidArgument("PiecewiseAffineMap: need one more cell than breaks and a value per break");
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    if (!(breaks_[i - 1] < breaks_[i]))
      throw InvalidArgument("PiecewiseAffineMap: breaks must be strictly ascending");
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(breaks_.begin(), breaks_.end(), finite) ||
      !std::all_of(at_breaks_.begin(), at_breaks_.end(), finite) ||
      !std::all_of(cells_.begin(), cells_.end(),
                   [&](const Cell& c) { return finite(c.scale) && finite(c.shift); }))
    throw InvalidArgument("PiecewiseAffineMap: non-finite parameter");
}

PiecewiseAffineMap PiecewiseAffineMap::identity() { return PiecewiseAffineMap({}, {Cell{}}, {}); }

double PiecewiseAffineMap::operator()(double u) const {
  const auto it = std::lower_bound(breaks_.begin(), breaks_.end(), u);
  const auto k = static_cast<std::size_t>(it - breaks_.begin());
  if (it != breaks_.end() && *it == u) return at_breaks_[k];
  return cells_[k].scale * u + cells_[k].shift;
}

IncreasingAffine::IncreasingAffine(double s, double t) : scale(s), shift(t) {
  if (!std::isfinite(s) || !std::isfinite(t) || !(s > 0.0))
    throw InvalidArgument("offset map must be increasing (scale > 0)");
}

LiftedOp LiftedOp::flip() {
  using Cell = PiecewiseAffineMap::Cell;
  return {PiecewiseAffineMap({-1.0, 1.0}, {Cell{-1.0, 0.0}, Cell{1.0, 0.0}, Cell{-1.0, 0.0}},
                             {1.0, -1.0}),
          IncreasingAffine{}};
}

LiftedOp LiftedOp::offset_shift(double delta) {
  return {PiecewiseAffineMap::identity(), IncreasingAffine(1.0, delta)};
}

PolyhedralFn lift(const LiftedOp& R, const PolyhedralFn& f) {
  using exact::Rational;
  using exact::to_rational;
  if (f.dim() != 1) throw DimensionMismatch("lift", 1, f.dim());
  // re-validate in case the fields were assigned directly
  const IncreasingAffine phi(R.offset_map.scale, R.offset_map.shift);
  const auto& psi = R.slope_map;

  const exact::Pwl1 F = exact::from_polyhedral(f);
  const exact::Pwl1 C = exact::conjugate(F);
  const Rational phi_s = to_rational(phi.scale);
  const Rational phi_t = to_rational(phi.shift);

  std::vector<Rational> breaks;
  for (double b : psi.breaks()) breaks.push_back(to_rational(b));
  auto in_dom = [&](const Rational& u) { return (!C.lo || *C.lo <= u) && (!C.hi || u <= *C.hi); };
  auto cell_at = [&](std::size_t k, const Rational& u) {
    const auto& cell = psi.cells()[k];
    return to_rational(cell.scale) * u + to_rational(cell.shift);
  };

  std::vector<Rational> candidates;
  for (const auto& v : exact::vertices(C)) candidates.push_back(v.x);
  for (const auto& b : breaks)
    if (in_dom(b)) candidates.push_back(b);
  if (candidates.empty()) candidates.push_back(Rational(0));  // dom f* is the whole line here
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<exact::Line> lines;
  for (const auto& u : candidates) {
    const Rational offset = phi_s * (-C.value(u)) + phi_t;
    const auto lower = static_cast<std::size_t>(std::lower_bound(breaks.begin(), breaks.end(), u) -
                                                breaks.begin());
    const auto upper = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), u) -
                                                breaks.begin());
    const Rational at_u = lower != upper ? to_rational(psi.at_breaks()[lower]) : cell_at(lower, u);
    lines.push_back({at_u, offset});
    if (!C.lo || *C.lo < u) lines.push_back({cell_at(lower, u), offset});
    if (!C.hi || u < *C.hi) lines.push_back({cell_at(upper, u), offset});
  }

  // Beyond the last candidate u -> psi(u) x + phi(-f*(u)) is affine in u; it stays
  // bounded only where its u-coefficient has the right sign.
  std::optional<Rational> lo, hi;
  auto clip = [&](const Rational& a, const Rational& rhs, bool upper_side) {
    // keep { x : a x <= rhs } when upper_side, { x : a x >= rhs } otherwise
    if (a == 0) {
      if (upper_side ? rhs < 0 : rhs > 0) throw ImproperFunction("lift: result is +inf everywhere");
      return;
    }
    const Rational bound = rhs / a;
    const bool is_upper = upper_side == (a > 0);
    if (is_upper) {
      if (!hi || bound < *hi) hi = bound;
    } else if (!lo || bound > *lo) {
      lo = bound;
    }
  };
  if (!C.hi) {
    if (!F.hi) throw InvalidArgument("lift: inconsistent conjugate domain");
    clip(to_rational(psi.cells().back().scale), phi_s * *F.hi, true);
  }
  if (!C.lo) {
    if (!F.lo) throw InvalidArgument("lift: inconsistent conjugate domain");
    clip(to_rational(psi.cells().front().scale), phi_s * *F.lo, false);
  }
  if (lo && hi && *lo > *hi) throw ImproperFunction("lift: result is +inf everywhere");
  return exact::to_polyhedral(exact::canonicalize(std::move(lines), lo, hi));
}

// ---------------------------------------------------------------------------
// Reports

std::optional<double> PropertyReport::metric(const std::string& name) const {
  for (const auto& [key, value] : metrics)
    if (key == name) return value;
  return std::nullopt;
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

namespace {

std::string format_point(const Point& x) {
  std::string s;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (k) s += ',';
    s += format_double(x[k]);
  }
  return s;
}

constexpr std::uint64_t kFnvBasis = 14695981039346656037ULL;

std::uint64_t fnv1a_bytes(std::uint64_t hash, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    hash ^= p[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace

std::uint64_t fnv1a(std::uint64_t hash, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  return fnv1a_bytes(hash, &bits, sizeof bits);
}

namespace {

std::uint64_t hash_entries(std::uint64_t hash, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) hash = fnv1a(hash, m.data()[i]);
  return hash;
}

}  // namespace

std::uint64_t digest(const ConvexFn& f, std::uint64_t hash) {
  hash = fnv1a(hash, static_cast<double>(f.kind()));
  if (const auto* p = f.polyhedral()) {
    for (const auto& piece : p->pieces()) hash = fnv1a(hash_entries(hash, piece.slope), piece.offset);
    for (const auto& h : p->domain()) hash = fnv1a(hash_entries(hash, h.normal), h.bound);
  } else if (const auto* ind = f.indicator()) {
    hash = fnv1a(hash_entries(hash, ind->anchor()), ind->level());
  } else {
    const auto& g = *f.grid();
    for (const auto& ax : g.axes())
      hash = fnv1a(fnv1a(fnv1a(hash, ax.lo), ax.hi), static_cast<double>(ax.count));
    for (double v : g.raw_values()) hash = fnv1a(hash, v);
  }
  return hash;
}

std::uint64_t digest(const PreservingOp& T, std::uint64_t hash) {
  hash = hash_entries(hash_entries(hash_entries(hash, T.E()), T.c()), T.w());
  return fnv1a(fnv1a(hash, T.tau()), T.beta());
}

std::uint64_t digest(const ReversingOp& S, std::uint64_t hash) {
  hash = hash_entries(hash_entries(hash_entries(hash, S.H()), S.v()), S.y());
  return fnv1a(fnv1a(hash, S.rho()), S.tau());
}

void write_report(std::ostream& os, const PropertyReport& r) {
  os << "property " << r.property << '\n'
     << "trials " << r.trials << '\n'
     << "seed " << r.seed << '\n'
     << "expectation "
     << (r.expectation == PropertyReport::Expectation::no_failures ? "no_failures" : "failures")
     << '\n'
     << "failures " << r.failures.size() << '\n';
  for (const auto& [name, value] : r.metrics) os << "metric " << name << ' ' << format_double(value) << '\n';
  for (const auto& f : r.failures) {
    std::array<char, 17> hex{};
    std::snprintf(hex.data(), hex.size(), "%016llx", static_cast<unsigned long long>(f.digest));
    os << "failure trial=" << f.trial << " seed=" << f.seed << " digest=" << hex.data()
       << " x=" << format_point(f.x) << " lhs=" << format_double(f.lhs)
       << " rhs=" << format_double(f.rhs);
    if (!f.note.empty()) os << " note=" << f.note;
    os << '\n';
  }
  os << "status " << (r.meets_expectation() ? "pass" : "fail") << '\n' << "end\n";
}

std::string to_text(const PropertyReport& report) {
  std::ostringstream os;
  write_report(os, report);
  return os.str();
}

// ---------------------------------------------------------------------------
// Generators

namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Vec uniform_vec(Rng& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int k = 0; k < n; ++k) v[k] = uniform(rng, lo, hi);
  return v;
}

Halfspace random_cut(Rng& rng, int dim) {
  Vec a;
  do {
    a = uniform_vec(rng, dim, -1.0, 1.0);
  } while (a.cwiseAbs().maxCoeff() < 0.1);
  return Halfspace(a, uniform(rng, 1.0, 5.0));
}

Mat well_conditioned(Rng& rng, int n) {
  for (;;) {
    Mat M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = uniform(rng, -2.0, 2.0);
    const Eigen::JacobiSVD<Mat> svd(M);
    const auto& s = svd.singularValues();
    if (s[n - 1] >= 0.3 && s[0] <= 20.0 * s[n - 1]) return M;
  }
}

struct InvolutionParts {
  Mat P;
  Vec d;   // diagonal of +-1 entries (possibly scaled by a perturbation)
  Vec zc;  // coordinates of c in the columns of P
  Vec zw;  // coordinates of w in the columns of P^{-T}

  PreservingOp build(double tau = 1.0, double beta_shift = 0.0) const {
    const Mat Pinv = P.inverse();
    const Mat E = P * d.asDiagonal() * Pinv;
    const Point c = P * zc;
    const DualVec w = Pinv.transpose() * zw;
    return PreservingOp(E, c, w, tau, -0.5 * c.dot(w) + beta_shift);
  }
};

InvolutionParts involution_parts(Rng& rng, int dim, int min_plus) {
  InvolutionParts parts;
  parts.P = well_conditioned(rng, dim);
  parts.d = Vec(dim);
  for (int k = 0; k < dim; ++k) parts.d[k] = uniform_int(rng, 0, 1) ? 1.0 : -1.0;
  while ((parts.d.array() > 0).count() < std::min(min_plus, dim)) {
    const int k = uniform_int(rng, 0, dim - 1);
    parts.d[k] = 1.0;
  }
  parts.zc = Vec::Zero(dim);
  parts.zw = Vec::Zero(dim);
  for (int k = 0; k < dim; ++k) {
    const double a = uniform(rng, -2.0, 2.0);
    const double b = uniform(rng, -2.0, 2.0);
    if (parts.d[k] < 0) {
      parts.zc[k] = a;
      parts.zw[k] = b;
    }
  }
  return parts;
}

int pick_index(Rng& rng, const Vec& d, double sign) {
  std::vector<int> idx;
  for (int k = 0; k < d.size(); ++k)
    if (d[k] * sign > 0) idx.push_back(k);
  if (idx.empty()) return -1;
  return idx[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(idx.size()) - 1))];
}

}  // namespace

PolyhedralFn random_polyhedral(Rng& rng, int dim) {
  const int count = uniform_int(rng, 2, 6);
  std::vector<AffineFn> pieces;
  for (int i = 0; i < count; ++i)
    pieces.emplace_back(uniform_vec(rng, dim, -5.0, 5.0), uniform(rng, -5.0, 5.0));
  std::vector<Halfspace> domain;
  if (uniform_int(rng, 0, 2) == 0) {
    const int cuts = uniform_int(rng, 1, 2);
    for (int i = 0; i < cuts; ++i) domain.push_back(random_cut(rng, dim));
  }
  return PolyhedralFn(std::move(pieces), std::move(domain));
}

std::pair<PolyhedralFn, PolyhedralFn> ordered_pair(Rng& rng, int dim) {
  PolyhedralFn f = random_polyhedral(rng, dim);
  const AffineFn extra(uniform_vec(rng, dim, -5.0, 5.0), uniform(rng, -5.0, 5.0));
  const std::array<ConvexFn, 2> family{ConvexFn(f), ConvexFn(as_polyhedral(extra))};
  PolyhedralFn g = *sup_family(family).polyhedral();
  if (uniform_int(rng, 0, 3) == 0) {
    auto domain = g.domain();
    domain.push_back(random_cut(rng, dim));
    g = PolyhedralFn(g.pieces(), std::move(domain));
  }
  return {std::move(f), std::move(g)};
}

PreservingOp random_preserving(Rng& rng, int dim) {
  Mat E = well_conditioned(rng, dim);
  Vec c = uniform_vec(rng, dim, -3.0, 3.0);
  Vec w = uniform_vec(rng, dim, -3.0, 3.0);
  const double tau = uniform(rng, 0.5, 3.0);
  const double beta = uniform(rng, -5.0, 5.0);
  return PreservingOp(std::move(E), std::move(c), std::move(w), tau, beta);
}

ReversingOp random_reversing(Rng& rng, int dim) {
  Mat H = well_conditioned(rng, dim);
  Vec v = uniform_vec(rng, dim, -3.0, 3.0);
  Vec y = uniform_vec(rng, dim, -3.0, 3.0);
  const double rho = uniform(rng, -5.0, 5.0);
  const double tau = uniform(rng, 0.5, 3.0);
  return ReversingOp(std::move(H), std::move(v), std::move(y), rho, tau);
}

PreservingOp random_involution(Rng& rng, int dim, int min_plus) {
  return involution_parts(rng, dim, min_plus).build();
}

std::string_view to_string(Perturbation p) noexcept {
  switch (p) {
    case Perturbation::tau: return "tau";
    case Perturbation::beta: return "beta";
    case Perturbation::E: return "E";
    case Perturbation::c: return "c";
    case Perturbation::w: return "w";
  }
  return "?";
}

PreservingOp perturbed_involution(Rng& rng, int dim, Perturbation which, double magnitude) {
  if (!(magnitude > 0.0)) throw InvalidArgument("perturbation magnitude must be > 0");
  const bool needs_plus = which == Perturbation::c || which == Perturbation::w;
  InvolutionParts parts = involution_parts(rng, dim, needs_plus ? 1 : 0);
  switch (which) {
    case Perturbation::tau: return parts.build(1.0 + magnitude);
    case Perturbation::beta: return parts.build(1.0, magnitude);
    case Perturbation::E: {
      const int k = uniform_int(rng, 0, dim - 1);
      // keep c and w in the kernels by dropping their k-th coordinates
      parts.zc[k] = 0.0;
      parts.zw[k] = 0.0;
      parts.d[k] *= 1.0 + magnitude;
      return parts.build();
    }
    case Perturbation::c:
    case Perturbation::w: {
      const int k = pick_index(rng, parts.d, 1.0);
      const PreservingOp base = parts.build();
      // a +1 eigenvector of E (or E^T) is orthogonal to the -1 eigenvectors of
      // the other, so <c,w> and hence the beta condition are unaffected
      Vec dir = which == Perturbation::c ? Vec(parts.P.col(k))
                                         : Vec(parts.P.inverse().transpose().col(k));
      dir *= magnitude / dir.cwiseAbs().maxCoeff();
      if (which == Perturbation::c)
        return PreservingOp(base.E(), base.c() + dir, base.w(), 1.0, base.beta());
      return PreservingOp(base.E(), base.c(), base.w() + dir, 1.0, base.beta());
    }
  }
  throw InvalidArgument("unknown perturbation");
}

// ---------------------------------------------------------------------------
// Checks

namespace {

// Runs `trial` for 0 <= t < trials in parallel and keeps the failures in trial order.
PropertyReport run_trials(std::string property, int trials, std::uint64_t seed,
                          const std::function<std::optional<Failure>(int, Rng&)>& trial) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  std::vector<std::optional<Failure>> results(static_cast<std::size_t>(trials));
  parallel_for(results.size(), [&](std::size_t t) {
    Rng rng(seed + t);
    results[t] = trial(static_cast<int>(t), rng);
    if (results[t]) {
      results[t]->trial = static_cast<int>(t);
      results[t]->seed = seed + t;
    }
  });
  PropertyReport report;
  report.property = std::move(property);
  report.trials = trials;
  report.seed = seed;
  for (auto& r : results)
    if (r) report.failures.push_back(std::move(*r));
  return report;
}

Failure failure_from(const Witness& w, std::uint64_t digest_value, std::string note = {}) {
  Failure f;
  f.digest = digest_value;
  f.x = w.x;
  f.lhs = w.lhs.raw();
  f.rhs = w.rhs.raw();
  f.note = std::move(note);
  return f;
}

std::string dim_suffix(int dim) { return "[n=" + std::to_string(dim) + "]"; }

bool same_structure(const PolyhedralFn& a, const PolyhedralFn& b) {
  if (a.pieces().size() != b.pieces().size() || a.domain().size() != b.domain().size()) return false;
  for (std::size_t i = 0; i < a.pieces().size(); ++i)
    if (a.pieces()[i].slope != b.pieces()[i].slope || a.pieces()[i].offset != b.pieces()[i].offset)
      return false;
  for (std::size_t i = 0; i < a.domain().size(); ++i)
    if (a.domain()[i].normal != b.domain()[i].normal || a.domain()[i].bound != b.domain()[i].bound)
      return false;
  return true;
}

}  // namespace

PropertyReport check_order_preserving(const OpFactory& make_op, int dim, int trials,
                                      std::uint64_t seed, double eps) {
  return run_trials("order_preserving" + dim_suffix(dim), trials, seed,
                    [&](int, Rng& rng) -> std::optional<Failure> {
                      const PreservingOp T = make_op(rng);
                      const auto [f, g] = ordered_pair(rng, dim);
                      const auto r = leq(apply_preserving(T, f), apply_preserving(T, g), {}, eps);
                      if (r.holds) return std::nullopt;
                      return failure_from(*r.witness, digest(g, digest(f, digest(T))));
                    });
}

PropertyReport check_order_preserving(const PreservingOp& T, int trials, std::uint64_t seed,
                                      double eps) {
  return check_order_preserving([&](Rng&) { return T; }, T.dim(), trials, seed, eps);
}

PropertyReport check_order_preserving(const LiftedOp& R, int trials, std::uint64_t seed,
                                      OrderDirection direction) {
  if (direction == OrderDirection::forward) {
    return run_trials("lifted_order_forward", trials, seed,
                      [&](int, Rng& rng) -> std::optional<Failure> {
                        const auto [f, g] = ordered_pair(rng, 1);
                        const auto r = leq(lift(R, f), lift(R, g));
                        if (r.holds) return std::nullopt;
                        return failure_from(*r.witness, digest(g, digest(f)));
                      });
  }
  return run_trials(
      "lifted_order_reverse", trials, seed, [&](int t, Rng& rng) -> std::optional<Failure> {
        auto one = [](double s) { return Vec::Constant(1, s); };
        PolyhedralFn f = random_polyhedral(rng, 1);
        PolyhedralFn g = random_polyhedral(rng, 1);
        if (t % 2 == 0) {
          const double a = uniform(rng, 0.1, 0.9);
          const double b = uniform(rng, 1.0, 3.0);
          f = PolyhedralFn({AffineFn(one(a), 0.0), AffineFn(one(-a), 0.0)});
          g = PolyhedralFn({AffineFn(one(b), 0.0), AffineFn(one(0.0), 0.0)});
        }
        if (!leq(lift(R, f), lift(R, g)).holds) return std::nullopt;
        const auto r = leq(f, g);
        if (r.holds) return std::nullopt;
        return failure_from(*r.witness, digest(g, digest(f)), "R(f)<=R(g) but f<=g fails");
      });
}

PropertyReport check_order_reversing(const ReversingFactory& make_op, int dim, int trials,
                                     std::uint64_t seed, PairKind kind, double tol,
                                     int grid_nodes) {
  // sampled conjugates in n >= 2 need shared axes, so those pairs always go through grids
  if (dim >= 2) kind = PairKind::grid;
  const std::string name = std::string("order_reversing") +
                           (kind == PairKind::grid ? "_grid" : "_polyhedral") + dim_suffix(dim);
  return run_trials(name, trials, seed, [&](int, Rng& rng) -> std::optional<Failure> {
    const ReversingOp S = make_op(rng);
    const auto [f, g] = ordered_pair(rng, dim);
    const std::uint64_t h = digest(g, digest(f, digest(S)));
    if (kind == PairKind::polyhedral) {
      // S f >= S g is checked as S g <= S f
      const auto r = leq(apply_reversing(S, g), apply_reversing(S, f), {}, tol);
      if (r.holds) return std::nullopt;
      return failure_from(*r.witness, h);
    }
    const auto axes = dim == 1 ? std::vector<GridAxis>{GridAxis{-10.0, 10.0, grid_nodes}}
                               : default_sampling_axes(dim);
    const GridFn fg = sample_to_grid(f, axes);
    const GridFn gg = sample_to_grid(g, axes);
    const auto dual = default_dual_axes(fg);
    const auto r = leq(apply_reversing(S, gg, ConjPreference::llt, dual),
                       apply_reversing(S, fg, ConjPreference::llt, dual), {}, tol);
    if (r.holds) return std::nullopt;
    return failure_from(*r.witness, h);
  });
}

PropertyReport check_order_reversing(const ReversingOp& S, int trials, std::uint64_t seed,
                                     PairKind kind, double tol, int grid_nodes) {
  return check_order_reversing([&](Rng&) { return S; }, S.dim(), trials, seed, kind, tol,
                               grid_nodes);
}

PropertyReport check_involution_behavioral(const PreservingOp& T,
                                           const std::vector<ConvexFn>& suite, double tol) {
  PropertyReport report;
  report.property = "involution_behavioral" + dim_suffix(T.dim());
  report.trials = static_cast<int>(suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const ConvexFn& f = suite[i];
    const ConvexFn twice = apply_preserving(T, apply_preserving(T, f));
    const auto eq = approx_equal(twice, f, tol);
    if (!eq.equal) {
      Failure fail = failure_from(*eq.witness, digest(f, digest(T)), "T(T(f)) != f");
      fail.trial = static_cast<int>(i);
      report.failures.push_back(std::move(fail));
    }
  }
  report.metrics.emplace_back("parametric", classify_involution(T).is_involution ? 1.0 : 0.0);
  return report;
}

std::vector<ConvexFn> involution_suite(int dim, std::uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<ConvexFn> suite;
  for (int i = 0; i < count; ++i) suite.emplace_back(random_polyhedral(rng, dim));
  suite.emplace_back(PointIndicatorFn(uniform_vec(rng, dim, -3.0, 3.0), uniform(rng, -2.0, 2.0)));
  return suite;
}

PropertyReport check_fenchel_moreau(int trials, std::uint64_t seed) {
  return run_trials("fenchel_moreau", trials, seed, [&](int, Rng& rng) -> std::optional<Failure> {
    const PolyhedralFn f = random_polyhedral(rng, 1);
    const ConvexFn ff = biconjugate(f);
    const PolyhedralFn canon = canonical_1d(f);
    if (!ff.polyhedral() || !same_structure(*ff.polyhedral(), canon)) {
      Failure fail;
      fail.digest = digest(f);
      fail.x = f.domain_point();
      fail.lhs = eval(ff, f.domain_point()).raw();
      fail.rhs = canon(f.domain_point()).raw();
      fail.note = "f** differs from canonical f";
      return fail;
    }
    const auto xs = SampleSpec{}.points(1);
    const auto sup = biconj_via_minorants(f, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const ExtReal b = eval(ff, xs[i]);
      if (sup[i] != b) return failure_from(Witness{xs[i], sup[i], b}, digest(f), "minorant supremum != f**");
    }
    return std::nullopt;
  });
}

PropertyReport check_sup_preservation(int dim, int trials, std::uint64_t seed) {
  return run_trials("sup_preservation" + dim_suffix(dim), trials, seed,
                    [&](int, Rng& rng) -> std::optional<Failure> {
                      const PreservingOp T = random_preserving(rng, dim);
                      const std::array<ConvexFn, 2> fg{random_polyhedral(rng, dim),
                                                       random_polyhedral(rng, dim)};
                      const ConvexFn lhs = apply_preserving(T, sup_family(fg));
                      const std::array<ConvexFn, 2> tfg{apply_preserving(T, fg[0]),
                                                        apply_preserving(T, fg[1])};
                      const ConvexFn rhs = sup_family(tfg);
                      if (same_structure(*lhs.polyhedral(), *rhs.polyhedral())) return std::nullopt;
                      const auto eq = approx_equal(lhs, rhs, 0.0);
                      const Witness w = eq.witness ? *eq.witness
                                                   : Witness{Point::Zero(dim), eval(lhs, Point::Zero(dim)),
                                                             eval(rhs, Point::Zero(dim))};
                      return failure_from(w, digest(fg[1], digest(fg[0], digest(T))),
                                          "T(sup) != sup(T)");
                    });
}

namespace {

constexpr int kSGrid = 33;

double s_node(int k) { return static_cast<double>(k) / (kSGrid - 1); }

Vec random_in_box(Rng& rng, int dim, double lo, double hi) { return uniform_vec(rng, dim, lo, hi); }

}  // namespace

PropertyReport check_quasiconvex_map(const VecMap& M, const std::optional<VecMap>& inverse, int dim,
                                     const std::vector<Point>& directions, int trials,
                                     std::uint64_t seed, double box_lo, double box_hi) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  PropertyReport report;
  report.property = "quasiconvex_map" + dim_suffix(dim);
  report.trials = trials;
  report.seed = seed;
  std::size_t violations = 0;
  constexpr std::size_t kMaxRecorded = 64;

  auto scan = [&](const VecMap& map, const char* side, const Vec& u1, const Vec& u2, int trial) {
    for (const auto& x : directions) {
      const double a = map(u1).dot(x);
      const double b = map(u2).dot(x);
      const double top = std::max(a, b);
      for (int k = 1; k < kSGrid - 1; ++k) {
        const double s = s_node(k);
        const Vec u = s * u1 + (1.0 - s) * u2;
        const double m = map(u).dot(x);
        if (m > top + 1e-12 * (1.0 + std::abs(top))) {
          ++violations;
          if (report.failures.size() < kMaxRecorded) {
            Failure f;
            f.trial = trial;
            f.seed = trial < 0 ? seed : seed + static_cast<std::uint64_t>(trial);
            f.digest = hash_entries(hash_entries(hash_entries(kFnvBasis, u1), u2), x);
            f.x = u;
            f.lhs = m;
            f.rhs = top;
            f.note = std::string(side) + ",direction=" + format_point(x);
            report.failures.push_back(std::move(f));
          }
          return;
        }
      }
    }
  };
  auto scan_both = [&](const Vec& u1, const Vec& u2, int trial) {
    scan(M, "map", u1, u2, trial);
    if (inverse) scan(*inverse, "inverse", u1, u2, trial);
  };

  // deterministic lattice of pairs first (recorded with trial = -1)
  const int per_axis = dim == 1 ? 17 : (dim == 2 ? 5 : 3);
  const GridAxis ax{box_lo, box_hi, per_axis};
  std::vector<Vec> lattice;
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= static_cast<std::size_t>(per_axis);
  for (std::size_t i = 0; i < total; ++i) {
    Vec u(dim);
    std::size_t rest = i;
    for (int k = dim - 1; k >= 0; --k) {
      u[k] = ax.node(static_cast<int>(rest % static_cast<std::size_t>(per_axis)));
      rest /= static_cast<std::size_t>(per_axis);
    }
    lattice.push_back(std::move(u));
  }
  for (std::size_t i = 0; i < lattice.size(); ++i)
    for (std::size_t j = i + 1; j < lattice.size(); ++j) scan_both(lattice[i], lattice[j], -1);

  for (int t = 0; t < trials; ++t) {
    Rng rng(seed + static_cast<std::uint64_t>(t));
    const Vec u1 = random_in_box(rng, dim, box_lo, box_hi);
    const Vec u2 = random_in_box(rng, dim, box_lo, box_hi);
    scan_both(u1, u2, t);
  }
  report.metrics.emplace_back("violations", static_cast<double>(violations));
  return report;
}

PropertyReport check_segments_to_segments(const VecMap& M, int dim, int trials, std::uint64_t seed,
                                          double box_lo, double box_hi) {
  PropertyReport report = run_trials(
      "segments_to_segments" + dim_suffix(dim), trials, seed,
      [&](int, Rng& rng) -> std::optional<Failure> {
        const Vec u1 = random_in_box(rng, dim, box_lo, box_hi);
        const Vec u2 = random_in_box(rng, dim, box_lo, box_hi);
        const Vec p1 = M(u1);
        const Vec p2 = M(u2);
        const Vec d = p1 - p2;
        const double dd = d.squaredNorm();
        Failure worst;
        worst.lhs = 0.0;
        for (int k = 0; k < kSGrid; ++k) {
          const double s = s_node(k);
          const Vec u = s * u1 + (1.0 - s) * u2;
          const Vec q = M(u);
          const double t = dd > 0.0 ? std::clamp((q - p2).dot(d) / dd, 0.0, 1.0) : 0.0;
          const double dev = (q - (p2 + t * d)).norm();
          if (dev > worst.lhs) {
            worst.x = u;
            worst.lhs = dev;
          }
        }
        worst.digest = hash_entries(hash_entries(kFnvBasis, u1), u2);
        worst.note = "deviation";
        // deviations within tolerance are still returned so the maximum can be
        // reported; they are filtered out below
        return worst;
      });
  double max_dev = 0.0;
  std::vector<Failure> kept;
  for (auto& f : report.failures) {
    max_dev = std::max(max_dev, f.lhs);
    if (f.lhs > 1e-9) {
      f.rhs = 1e-9;
      kept.push_back(std::move(f));
    }
  }
  report.failures = std::move(kept);
  report.metrics.emplace_back("max_deviation", max_dev);
  return report;
}

DualVec radial_flip(const DualVec& u) { return u.norm() < 1.0 ? u : DualVec(-u); }

DualVec cubic_map(const DualVec& u) {
  if (u.size() != 2) throw DimensionMismatch("cubic_map", 2, u.size());
  DualVec out(2);
  out << u[0], u[1] * u[1] * u[1];
  return out;
}

PropertyReport counterexample_flip() {
  auto one = [](double s) { return Vec::Constant(1, s); };
  const PolyhedralFn f1({AffineFn(one(0.5), 0.0), AffineFn(one(-0.5), 0.0)});
  const PolyhedralFn f2({AffineFn(one(1.0), 0.0), AffineFn(one(0.0), 0.0)});
  const LiftedOp R = LiftedOp::flip();
  const PolyhedralFn Rf1 = lift(R, f1);
  const PolyhedralFn Rf2 = lift(R, f2);

  PropertyReport report;
  report.property = "counterexample_flip";
  report.trials = 1;
  auto fail = [&](const char* note, Point x = Point::Zero(1), double lhs = 0.0, double rhs = 0.0) {
    Failure f;
    f.digest = digest(f2, digest(f1));
    f.x = std::move(x);
    f.lhs = lhs;
    f.rhs = rhs;
    f.note = note;
    report.failures.push_back(std::move(f));
  };

  const PolyhedralFn abs_half({AffineFn(one(-0.5), 0.0), AffineFn(one(0.5), 0.0)});
  const PolyhedralFn abs_x({AffineFn(one(-1.0), 0.0), AffineFn(one(1.0), 0.0)});
  if (!same_structure(Rf1, abs_half)) fail("R(f1) != |x|/2");
  if (!same_structure(Rf2, abs_x)) fail("R(f2) != |x|");

  SampleSpec box;
  box.box_lo = -1.0;
  box.box_hi = 1.0;
  const auto up = leq(Rf1, Rf2, box);
  if (!up.holds) fail("R(f1) <= R(f2) fails", up.witness->x, up.witness->lhs.raw(), up.witness->rhs.raw());
  const auto down = leq(f1, f2, box);
  if (down.holds) fail("f1 <= f2 holds");
  else if (!(down.witness->x[0] < 0.0))
    fail("witness not at x < 0", down.witness->x, down.witness->lhs.raw(), down.witness->rhs.raw());

  report.metrics.emplace_back("Rf1<=Rf2", up.holds ? 1.0 : 0.0);
  report.metrics.emplace_back("f1<=f2", down.holds ? 1.0 : 0.0);
  if (down.witness) {
    report.metrics.emplace_back("witness_x", down.witness->x[0]);
    report.metrics.emplace_back("f1(witness)", down.witness->lhs.raw());
    report.metrics.emplace_back("f2(witness)", down.witness->rhs.raw());
    report.metrics.emplace_back("Rf2(witness)", Rf2(down.witness->x).raw());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Suites

PropertyReport check_involution_agreement(int trials, std::uint64_t seed) {
  constexpr std::array<Perturbation, 5> kinds{Perturbation::tau, Perturbation::beta, Perturbation::E,
                                              Perturbation::c, Perturbation::w};
  PropertyReport report = run_trials(
      "involution_agreement", trials, seed, [&](int t, Rng& rng) -> std::optional<Failure> {
        const int dim = 1 + t % 3;
        const bool compliant = t % 2 == 0;
        const Perturbation kind = kinds[static_cast<std::size_t>((t / 2) % 5)];
        const double magnitude = uniform(rng, 1e-3, 1e-1);
        const PreservingOp T = compliant ? random_involution(rng, dim)
                                         : perturbed_involution(rng, dim, kind, magnitude);
        const auto suite = involution_suite(dim, rng());
        const PropertyReport behavioral = check_involution_behavioral(T, suite);
        const bool parametric = classify_involution(T).is_involution;
        const bool behaves = behavioral.failures.empty();
        if (parametric == compliant && behaves == compliant) return std::nullopt;
        Failure f;
        f.digest = digest(T);
        f.x = Point::Zero(dim);
        f.lhs = parametric ? 1.0 : 0.0;
        f.rhs = behaves ? 1.0 : 0.0;
        f.note = compliant ? "compliant operator rejected"
                           : "perturbation of " + std::string(to_string(kind)) + " not detected";
        return f;
      });
  return report;
}

std::vector<PropertyReport> run_suite(std::string_view name, int trials, std::uint64_t seed) {
  std::vector<PropertyReport> out;
  const bool all = name == "all";
  bool known = all;
  if (all || name == "order") {
    known = true;
    for (int dim = 1; dim <= kMaxDim; ++dim)
      out.push_back(check_order_preserving([dim](Rng& rng) { return random_preserving(rng, dim); },
                                           dim, trials, seed));
    out.push_back(check_order_preserving(LiftedOp::flip(), trials, seed, OrderDirection::forward));
    auto reverse = check_order_preserving(LiftedOp::flip(), trials, seed, OrderDirection::reverse);
    reverse.expectation = PropertyReport::Expectation::failures;
    out.push_back(std::move(reverse));
  }
  if (all || name == "reversing") {
    known = true;
    const ReversingFactory random1 = [](Rng& rng) { return random_reversing(rng, 1); };
    out.push_back(check_order_reversing(ReversingOp::conjugation(1), trials, seed));
    out.back().property = "order_reversing_conjugation[n=1]";
    out.push_back(check_order_reversing(random1, 1, trials, seed, PairKind::polyhedral));
    out.push_back(check_order_reversing(random1, 1, trials, seed, PairKind::grid, 1e-6));
  }
  if (all || name == "involution") {
    known = true;
    out.push_back(check_involution_agreement(trials, seed));
  }
  if (all || name == "fenchel-moreau") {
    known = true;
    out.push_back(check_fenchel_moreau(trials, seed));
  }
  if (all || name == "counterexample") {
    known = true;
    out.push_back(counterexample_flip());
  }
  if (!known) throw InvalidArgument("unknown suite '" + std::string(name) + "'");
  return out;
}

}  // namespace conjcalc
