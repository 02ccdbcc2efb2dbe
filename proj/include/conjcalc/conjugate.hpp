#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "conjcalc/convex_fn.hpp"

namespace conjcalc {

enum class ConjMethod { exact_polyhedral, exact_indicator, grid_naive, grid_llt };

std::string_view to_string(ConjMethod m) noexcept;

/// The conjugate as a function of the dual variable, tagged with how it was
/// obtained. Exact methods always yield a polyhedral function.
struct ConjugateResult {
  ConvexFn fn;
  ConjMethod method;
};

/// Which algorithm `conjugate` should use. `automatic` picks the exact path when
/// one exists and the linear-time grid transform otherwise.
enum class ConjPreference { automatic, exact, naive, llt };

// ---------------------------------------------------------------------------
// Raw 1-D discrete Legendre transforms. `x` and `u` ascending; `f` may hold
// +inf (skipped). out[j] = max_i (u[j] x[i] - f[i]), or -inf if no f[i] is
// finite.

void legendre_naive_1d(std::span<const double> x, std::span<const double> f,
                       std::span<const double> u, std::span<double> out);

/// O(N + M): lower convex envelope of the finite samples by a monotone-chain
/// pass, then one merged sweep over the dual nodes.
void legendre_llt_1d(std::span<const double> x, std::span<const double> f,
                     std::span<const double> u, std::span<double> out);

// ---------------------------------------------------------------------------

/// h_{u,alpha}* is alpha's negative at u and +inf elsewhere.
ConjugateResult conj_affine(const AffineFn& h);

/// Exact conjugate of a 1-D polyhedral function, in canonical form.
ConjugateResult conj_polyhedral_1d(const PolyhedralFn& f);

/// Conjugate of the indicator of x~ at `level`: u -> <u, x~> - level.
ConjugateResult conj_indicator(const PointIndicatorFn& f);

/// Direct O(N M) maximization over the nodes (n = 1). Serves as the oracle.
ConjugateResult conj_grid_naive(const GridFn& f, const std::vector<GridAxis>& dual_axes);

/// Same values as conj_grid_naive in O(N + M) (n = 1).
ConjugateResult conj_grid_llt(const GridFn& f, const std::vector<GridAxis>& dual_axes);

/// n in {2, 3}: successive 1-D transforms along each axis, last axis first.
ConjugateResult conj_grid_nd(const GridFn& f, const std::vector<GridAxis>& dual_axes,
                             ConjPreference inner = ConjPreference::llt);

/// Dual axes covering the range of discrete slopes along each axis, widened by
/// about 10% so that the extreme slopes fall exactly on nodes. `nodes` = 0
/// selects 513 for n = 1 and the primal node count for n >= 2.
std::vector<GridAxis> default_dual_axes(const GridFn& f, int nodes = 0);

/// Axes used when a non-grid function has to be sampled: [-10, 10]^n with
/// 1025, 129 or 33 nodes per axis for n = 1, 2, 3.
std::vector<GridAxis> default_sampling_axes(int dim);

GridFn sample_to_grid(const ConvexFn& f, const std::vector<GridAxis>& axes);

/// Dispatching conjugate. Polyhedral inputs with n >= 2 that are not affine are
/// sampled on default_sampling_axes first (a lossy step).
ConjugateResult conjugate(const ConvexFn& f, ConjPreference pref = ConjPreference::automatic,
                          const std::optional<std::vector<GridAxis>>& dual_axes = std::nullopt);

/// f** with matching representations: exact for polyhedral 1-D, affine and
/// point-indicator inputs; grids come back on their own axes.
ConvexFn biconjugate(const ConvexFn& f);

/// sup over tight minorants h_{u,-f*(u)}, u over the conjugate's vertices, of
/// <a,u> - f*(u). 1-D polyhedral only; equals eval(biconjugate(f), a) exactly.
ExtReal biconj_via_minorants(const PolyhedralFn& f, const Point& a);
/// Same at many points, sharing one exact conjugate.
std::vector<ExtReal> biconj_via_minorants(const PolyhedralFn& f, std::span<const Point> points);

/// f*(u) at a single dual point. Exact for polyhedral (any n <= 3) and
/// point-indicator inputs, a node maximum for grids.
ExtReal conjugate_value(const ConvexFn& f, const DualVec& u);

/// Canonical form of a 1-D polyhedral function: active pieces sorted by slope,
/// domain as at most two unit-normal halfspaces.
PolyhedralFn canonical_1d(const PolyhedralFn& f);

}  // namespace conjcalc
