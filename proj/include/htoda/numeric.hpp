#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>

namespace htoda::num {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Fn = std::function<double(double)>;

/// Central-difference step: max(1e-5, 1e-5 * |x|).
double fd_step(double x);

/// Central differences of a callable. h <= 0 selects fd_step(x).
double central_d1(const Fn& f, double x, double h = 0.0);
double central_d2(const Fn& f, double x, double h = 0.0);
double central_d3(const Fn& f, double x, double h = 0.0);

/// Adaptive Simpson integral of f over [a, b] to absolute tolerance tol
/// (with a relative roundoff floor).  Throws QuadratureError when the
/// recursion depth limit is hit before the tolerance is met.
double adaptive_simpson(const Fn& f, double a, double b, double tol);

/// Solve f(x) = target for a strictly increasing f on the open interval
/// (lo, hi).  A bracket is grown geometrically from `seed`; inside the
/// bracket Newton steps (using df when callable) are safeguarded by
/// bisection.  Convergence requires both a step below xtol and a value
/// residual below ~1e-15 * max(1, |target|).
///
/// Throws DomainError when the target lies outside the image of f over
/// (lo, hi), ConvergenceError when max_iter is exhausted.
double solve_increasing(const Fn& f, const Fn& df, double target, double seed,
                        double lo = -kInf, double hi = kInf,
                        double xtol = 1e-12, int max_iter = 200);

/// First/second time derivative of uniformly sampled columns (rows are
/// samples).  Interior points use central stencils; endpoints use
/// one-sided second-order stencils.  Throws GridError when too short
/// (3 rows for d1, 4 rows for d2).
Eigen::MatrixXd grid_d1(const Eigen::MatrixXd& f, double dt);
Eigen::MatrixXd grid_d2(const Eigen::MatrixXd& f, double dt);

/// First derivative for series that are themselves the output of a
/// differentiation pass.  The end rows of such input carry a one-sided
/// truncation constant that differs from the interior one, so a second
/// pass that reads them drops to first order there.  This variant never
/// reads rows 0 and n-1; the end derivatives are extrapolated from the
/// three nearest interior rows and stay second order uniformly.
/// Requires at least 4 rows.
Eigen::MatrixXd grid_d1_inner(const Eigen::MatrixXd& f, double dt);

/// Cumulative trapezoid integral starting at 0 for the first sample.
Eigen::VectorXd cumtrapz(const Eigen::VectorXd& f, double dt);

}  // namespace htoda::num
