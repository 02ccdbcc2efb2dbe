#pragma once

#include <optional>
#include <vector>

#include "conjcalc/ext_real.hpp"
#include "conjcalc/linalg.hpp"

// Fourier-Motzkin elimination for the handful of variables (n + 1 <= 4) that
// appear in properness checks and exact tight minorants.
namespace conjcalc::lp {

/// a . z <= b
struct Constraint {
  Vec a;
  double b = 0.0;
};

/// Some point of {z : a_i . z <= b_i}, or nullopt when the system is empty.
/// An empty constraint list is feasible (the origin is returned).
std::optional<Vec> feasible_point(const std::vector<Constraint>& constraints, int dim);

/// sup { obj . z : a_i . z <= b_i }. nullopt when infeasible, +inf when unbounded.
std::optional<ExtReal> maximize(const Vec& obj, const std::vector<Constraint>& constraints,
                                int dim);

}  // namespace conjcalc::lp
