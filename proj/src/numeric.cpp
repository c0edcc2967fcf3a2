#include "htoda/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "htoda/errors.hpp"

namespace htoda::num {

double fd_step(double x) { return std::max(1e-5, 1e-5 * std::abs(x)); }

double central_d1(const Fn& f, double x, double h) {
    if (h <= 0) h = fd_step(x);
    return (f(x + h) - f(x - h)) / (2 * h);
}

double central_d2(const Fn& f, double x, double h) {
    if (h <= 0) h = fd_step(x);
    return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
}

double central_d3(const Fn& f, double x, double h) {
    if (h <= 0) h = fd_step(x);
    return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h * h * h);
}

namespace {

struct SimpsonState {
    const Fn& f;
    int depth_limit;
};

double simpson_rec(const SimpsonState& s, double a, double fa, double m, double fm,
                   double b, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = s.f(lm);
    const double frm = s.f(rm);
    const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    const double delta = left + right - whole;
    // Roundoff floor: once the interval estimate is accurate to a few ulps
    // further splitting cannot help.
    const double floor_tol = 16.0 * std::numeric_limits<double>::epsilon() *
                             (std::abs(left) + std::abs(right));
    if (std::abs(delta) <= std::max(15.0 * tol, floor_tol))
        return left + right + delta / 15.0;
    if (depth >= s.depth_limit)
        throw QuadratureError("adaptive Simpson: depth limit reached before tolerance");
    return simpson_rec(s, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1) +
           simpson_rec(s, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double adaptive_simpson(const Fn& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    if (!(tol > 0)) throw ParameterError("adaptive Simpson: tolerance must be positive");
    if (!std::isfinite(a) || !std::isfinite(b))
        throw ParameterError("adaptive Simpson: endpoints must be finite");
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
        throw QuadratureError("adaptive Simpson: non-finite integrand value");
    const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    SimpsonState s{f, 60};
    return simpson_rec(s, a, fa, m, fm, b, fb, whole, tol, 0);
}

namespace {

double clamp_seed(double seed, double lo, double hi) {
    double a = std::isinf(lo) ? -kInf : lo;
    double b = std::isinf(hi) ? kInf : hi;
    if (seed > a && seed < b) return seed;
    if (std::isinf(a) && std::isinf(b)) return 0.0;
    if (std::isinf(a)) return b - std::max(1.0, std::abs(b) * 0.5);
    if (std::isinf(b)) return a + std::max(1.0, std::abs(a) * 0.5);
    return 0.5 * (a + b);
}

[[noreturn]] void throw_outside_image(double target) {
    std::ostringstream os;
    os << "target " << target << " lies outside the image of the function over its domain";
    throw DomainError(os.str());
}

}  // namespace

double solve_increasing(const Fn& f, const Fn& df, double target, double seed,
                        double lo, double hi, double xtol, int max_iter) {
    // Margin keeps every probe strictly inside the open interval.
    const double edge = 2e-10;
    double x = clamp_seed(seed, lo + (std::isinf(lo) ? 0 : edge),
                          hi - (std::isinf(hi) ? 0 : edge));
    double fx = f(x) - target;
    const double ftol = 1e-15 * std::max(1.0, std::abs(target));
    if (std::isnan(fx)) throw ConvergenceError("root finder: non-finite value at seed");
    if (std::abs(fx) <= ftol) return x;

    // Grow the bracket [a, b] with f(a) <= target <= f(b).
    double a, b, fa, fb;
    if (fx < 0) {
        a = x;
        fa = fx;
        b = x;
        double step = std::max(1.0, std::abs(x) * 0.5);
        for (int i = 0;; ++i) {
            if (i >= 200) throw_outside_image(target);
            if (std::isinf(hi)) {
                b = b + step;
                step *= 2;
            } else {
                if (hi - b <= 1e-9) throw_outside_image(target);
                b = b + 0.5 * (hi - b);
            }
            fb = f(b) - target;
            if (std::isnan(fb)) throw ConvergenceError("root finder: non-finite value during bracketing");
            if (fb >= 0) break;
            a = b;
            fa = fb;
        }
    } else {
        b = x;
        fb = fx;
        a = x;
        double step = std::max(1.0, std::abs(x) * 0.5);
        for (int i = 0;; ++i) {
            if (i >= 200) throw_outside_image(target);
            if (std::isinf(lo)) {
                a = a - step;
                step *= 2;
            } else {
                if (a - lo <= 1e-9) throw_outside_image(target);
                a = a - 0.5 * (a - lo);
            }
            fa = f(a) - target;
            if (std::isnan(fa)) throw ConvergenceError("root finder: non-finite value during bracketing");
            if (fa <= 0) break;
            b = a;
            fb = fa;
        }
    }
    if (std::abs(fa) <= ftol) return a;
    if (std::abs(fb) <= ftol) return b;

    // Newton safeguarded by bisection inside [a, b].
    x = 0.5 * (a + b);
    for (int it = 0; it < max_iter; ++it) {
        fx = f(x) - target;
        if (std::isnan(fx)) throw ConvergenceError("root finder: non-finite value");
        if (std::abs(fx) <= ftol) return x;
        if (fx < 0)
            a = x;
        else
            b = x;
        double xn = kInf;
        if (df) {
            const double d = df(x);
            if (std::isfinite(d) && d > 0) xn = x - fx / d;
        }
        if (!(xn > a && xn < b)) xn = 0.5 * (a + b);
        const double dx = std::abs(xn - x);
        x = xn;
        if (dx <= xtol && std::abs(f(x) - target) <= ftol) return x;
        if (b - a <= xtol * 0.25) {
            // The bracket has collapsed; accept the midpoint if the value
            // residual is as good as representable there.
            const double fm = f(x) - target;
            if (std::abs(fm) <= 1e4 * ftol) return x;
        }
    }
    throw ConvergenceError("root finder: no convergence within iteration budget");
}

Eigen::MatrixXd grid_d1(const Eigen::MatrixXd& f, double dt) {
    const Eigen::Index n = f.rows();
    if (n < 3) throw GridError("grid_d1: at least 3 samples required");
    if (!(dt > 0)) throw ParameterError("grid_d1: dt must be positive");
    Eigen::MatrixXd d(n, f.cols());
    d.row(0) = (-3.0 * f.row(0) + 4.0 * f.row(1) - f.row(2)) / (2 * dt);
    for (Eigen::Index k = 1; k + 1 < n; ++k) d.row(k) = (f.row(k + 1) - f.row(k - 1)) / (2 * dt);
    d.row(n - 1) = (3.0 * f.row(n - 1) - 4.0 * f.row(n - 2) + f.row(n - 3)) / (2 * dt);
    return d;
}

Eigen::MatrixXd grid_d1_inner(const Eigen::MatrixXd& f, double dt) {
    const Eigen::Index n = f.rows();
    if (n < 4) throw GridError("grid_d1_inner: at least 4 samples required");
    if (!(dt > 0)) throw ParameterError("grid_d1_inner: dt must be positive");
    Eigen::MatrixXd d(n, f.cols());
    d.row(0) = (-5.0 * f.row(1) + 8.0 * f.row(2) - 3.0 * f.row(3)) / (2 * dt);
    d.row(1) = (-3.0 * f.row(1) + 4.0 * f.row(2) - f.row(3)) / (2 * dt);
    for (Eigen::Index k = 2; k + 2 < n; ++k)
        d.row(k) = (f.row(k + 1) - f.row(k - 1)) / (2 * dt);
    d.row(n - 2) = (3.0 * f.row(n - 2) - 4.0 * f.row(n - 3) + f.row(n - 4)) / (2 * dt);
    d.row(n - 1) = (5.0 * f.row(n - 2) - 8.0 * f.row(n - 3) + 3.0 * f.row(n - 4)) / (2 * dt);
    return d;
}

Eigen::MatrixXd grid_d2(const Eigen::MatrixXd& f, double dt) {
    const Eigen::Index n = f.rows();
    if (n < 4) throw GridError("grid_d2: at least 4 samples required");
    if (!(dt > 0)) throw ParameterError("grid_d2: dt must be positive");
    const double dt2 = dt * dt;
    Eigen::MatrixXd d(n, f.cols());
    d.row(0) = (2.0 * f.row(0) - 5.0 * f.row(1) + 4.0 * f.row(2) - f.row(3)) / dt2;
    for (Eigen::Index k = 1; k + 1 < n; ++k)
        d.row(k) = (f.row(k + 1) - 2.0 * f.row(k) + f.row(k - 1)) / dt2;
    d.row(n - 1) =
        (2.0 * f.row(n - 1) - 5.0 * f.row(n - 2) + 4.0 * f.row(n - 3) - f.row(n - 4)) / dt2;
    return d;
}

Eigen::VectorXd cumtrapz(const Eigen::VectorXd& f, double dt) {
    Eigen::VectorXd out(f.size());
    if (f.size() == 0) return out;
    out[0] = 0.0;
    for (Eigen::Index k = 1; k < f.size(); ++k)
        out[k] = out[k - 1] + 0.5 * dt * (f[k - 1] + f[k]);
    return out;
}

}  // namespace htoda::num
