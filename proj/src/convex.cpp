#include "htoda/convex.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "htoda/errors.hpp"

namespace htoda::convex {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

bool Domain::contains(double x) const {
    if (!(x - lo > kEdgeMargin)) return false;
    if (!(hi - x > kEdgeMargin)) return false;
    for (double p : punctures)
        if (std::abs(x - p) <= kEdgeMargin) return false;
    return true;
}

void Domain::require(double x, const std::string& label) const {
    if (contains(x)) return;
    std::ostringstream os;
    os << label << ": argument " << fmt(x) << " is outside the open domain (" << fmt(lo) << ", "
       << fmt(hi) << ")";
    for (double p : punctures)
        if (std::abs(x - p) <= kEdgeMargin) os << " or too close to the excluded point " << fmt(p);
    throw DomainError(os.str());
}

ConvexScalarFunction::ConvexScalarFunction(Domain domain, Fn eval, Fn d1, Fn d2, Fn d3,
                                           std::string label)
    : domain_(std::move(domain)),
      eval_(std::move(eval)),
      d1_(std::move(d1)),
      d2_(std::move(d2)),
      d3_(std::move(d3)),
      label_(std::move(label)) {}

double ConvexScalarFunction::eval(double x) const {
    domain_.require(x, label_);
    return eval_(x);
}

double ConvexScalarFunction::d1(double x) const {
    domain_.require(x, label_);
    return d1_(x);
}

double ConvexScalarFunction::d2(double x) const {
    domain_.require(x, label_);
    return d2_(x);
}

double ConvexScalarFunction::d3(double x) const {
    domain_.require(x, label_);
    return d3_(x);
}

ConjugatePair make_toda_potential(double A, double B) {
    if (!(A > 0) || !(B > 0)) throw ParameterError("toda potential: A and B must be positive");
    Domain primal_dom{-num::kInf, num::kInf, {}};
    ConvexScalarFunction primal(
        primal_dom, [A, B](double q) { return (A / B) * std::exp(-B * q) + A * q; },
        [A, B](double q) { return A - A * std::exp(-B * q); },
        [A, B](double q) { return A * B * std::exp(-B * q); },
        [A, B](double q) { return -A * B * B * std::exp(-B * q); }, "toda");
    Domain dual_dom{-num::kInf, A, {}};
    ConvexScalarFunction dual(
        dual_dom,
        [A, B](double y) { return (A - y) / B * (std::log1p(-y / A) - 1.0); },
        [A, B](double y) { return -std::log1p(-y / A) / B; },
        [A, B](double y) { return 1.0 / (B * (A - y)); },
        [A, B](double y) { return 1.0 / (B * (A - y) * (A - y)); }, "toda*");
    return ConjugatePair{std::move(primal), std::move(dual), ConjugationMode::analytic};
}

namespace {

double abs_pow(double x, double e) { return std::pow(std::abs(x), e); }

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

ConvexScalarFunction power_side(double s, const char* label) {
    Domain dom{-num::kInf, num::kInf, {}};
    if (s != 2.0) dom.punctures.push_back(0.0);
    return ConvexScalarFunction(
        dom, [s](double x) { return abs_pow(x, s) / s; },
        [s](double x) { return sign(x) * abs_pow(x, s - 1); },
        [s](double x) { return (s - 1) * abs_pow(x, s - 2); },
        [s](double x) { return sign(x) * (s - 1) * (s - 2) * abs_pow(x, s - 3); }, label);
}

}  // namespace

ConjugatePair make_power_potential(double beta) {
    const double s = 2 * beta;
    if (!(s > 1)) throw ParameterError("power potential: 2*beta must exceed 1");
    const double sd = s / (s - 1);  // conjugate exponent
    return ConjugatePair{power_side(s, "power"), power_side(sd, "power*"),
                         ConjugationMode::analytic};
}

ConjugatePair make_quadratic_potential(double curvature) {
    if (!(curvature > 0)) throw ParameterError("quadratic potential: curvature must be positive");
    const double c = curvature;
    Domain dom{-num::kInf, num::kInf, {}};
    ConvexScalarFunction primal(
        dom, [c](double q) { return 0.5 * c * q * q; }, [c](double q) { return c * q; },
        [c](double) { return c; }, [](double) { return 0.0; }, "quadratic");
    ConvexScalarFunction dual(
        dom, [c](double y) { return 0.5 * y * y / c; }, [c](double y) { return y / c; },
        [c](double) { return 1.0 / c; }, [](double) { return 0.0; }, "quadratic*");
    return ConjugatePair{std::move(primal), std::move(dual), ConjugationMode::analytic};
}

namespace {

/// Cumulative integral from 1 over a log-spaced grid on (0, inf); local
/// queries only re-integrate the final partial segment.
class SegmentedIntegral {
public:
    SegmentedIntegral(Fn integrand, double tol) : f_(std::move(integrand)) {
        const int per_decade = 10;
        const int lo_exp = -12, hi_exp = 12;
        const int npts = per_decade * (hi_exp - lo_exp) + 1;
        grid_.resize(npts);
        for (int i = 0; i < npts; ++i)
            grid_[static_cast<size_t>(i)] =
                std::pow(10.0, lo_exp + static_cast<double>(i) / per_decade);
        const size_t i1 = static_cast<size_t>(per_decade * (0 - lo_exp));
        grid_[i1] = 1.0;
        seg_tol_ = tol / (npts + 4);
        cum_.assign(grid_.size(), 0.0);
        for (size_t i = i1 + 1; i < grid_.size(); ++i)
            cum_[i] = cum_[i - 1] + num::adaptive_simpson(f_, grid_[i - 1], grid_[i], seg_tol_);
        for (size_t i = i1; i-- > 0;)
            cum_[i] = cum_[i + 1] - num::adaptive_simpson(f_, grid_[i], grid_[i + 1], seg_tol_);
    }

    double value(double x) const {
        if (x < grid_.front())
            return cum_.front() - num::adaptive_simpson(f_, x, grid_.front(), seg_tol_);
        if (x >= grid_.back())
            return cum_.back() + num::adaptive_simpson(f_, grid_.back(), x, seg_tol_);
        const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
        const size_t i = static_cast<size_t>(it - grid_.begin()) - 1;
        return cum_[i] + num::adaptive_simpson(f_, grid_[i], x, seg_tol_);
    }

    /// Open interval known to contain the solution of value(z) = y,
    /// widened by one grid cell; {0, inf} ends when y leaves the table.
    std::pair<double, double> inverse_bracket(double y) const {
        const auto it = std::lower_bound(cum_.begin(), cum_.end(), y);
        if (it == cum_.begin()) return {0.0, grid_.front()};
        if (it == cum_.end()) return {grid_.back(), num::kInf};
        const size_t i = static_cast<size_t>(it - cum_.begin());
        const size_t lo_i = (i >= 2) ? i - 2 : 0;
        const size_t hi_i = std::min(i + 1, grid_.size() - 1);
        return {grid_[lo_i], grid_[hi_i]};
    }

private:
    Fn f_;
    double seg_tol_ = 0.0;
    std::vector<double> grid_;
    std::vector<double> cum_;
};

struct DeformedCore {
    Fn gen;
    SegmentedIntegral log_table;     // integral of 1/gen from 1
    SegmentedIntegral moment_table;  // integral of z/gen(z) from 1

    DeformedCore(Fn g, double tol)
        : gen(std::move(g)),
          log_table([this](double z) { return 1.0 / gen(z); }, tol),
          moment_table([this](double z) { return z / gen(z); }, tol) {}

    double log_value(double z) const { return log_table.value(z); }

    double exp_value(double q) const {
        auto [zlo, zhi] = log_table.inverse_bracket(q);
        double seed;
        if (zlo == 0.0)
            seed = 0.5 * zhi;
        else if (std::isinf(zhi))
            seed = 2.0 * zlo;
        else
            seed = std::sqrt(zlo * zhi);
        return num::solve_increasing([this](double z) { return log_value(z); },
                                     [this](double z) { return 1.0 / gen(z); }, q, seed, zlo, zhi);
    }

    double gen_prime(double z) const {
        const double h = std::min(num::fd_step(z), 0.5 * z);
        return (gen(z + h) - gen(z - h)) / (2 * h);
    }
};

}  // namespace

ConjugatePair make_deformed_potential(Fn gen, double quadrature_tol) {
    if (!gen) throw ParameterError("deformed potential: generator is empty");
    if (!(quadrature_tol > 0))
        throw ParameterError("deformed potential: quadrature tolerance must be positive");
    // Positivity and strict growth checked on a log-spaced sample grid.
    {
        double prev = -num::kInf;
        for (int i = -24; i <= 24; ++i) {
            const double z = std::pow(10.0, 0.25 * i);
            const double v = gen(z);
            if (!std::isfinite(v) || !(v > 0))
                throw MonotonicityError("deformed potential: generator must be positive at " +
                                        fmt(z));
            if (!(v > prev))
                throw MonotonicityError(
                    "deformed potential: generator must be strictly increasing near " + fmt(z));
            prev = v;
        }
    }
    auto core = std::make_shared<const DeformedCore>(std::move(gen), quadrature_tol);

    // Working bounds for the primal domain: image of the generalized
    // logarithm probed at moderate arguments.
    const double q_lo = core->log_value(1e-9);
    const double q_hi = core->log_value(1e9);

    Domain primal_dom{q_lo, q_hi, {}};
    ConvexScalarFunction primal(
        primal_dom, [core](double q) { return core->moment_table.value(core->exp_value(q)); },
        [core](double q) { return core->exp_value(q); },
        [core](double q) { return core->gen(core->exp_value(q)); },
        [core](double q) {
            const double z = core->exp_value(q);
            return core->gen_prime(z) * core->gen(z);
        },
        "deformed");

    Domain dual_dom{0.0, num::kInf, {}};
    ConvexScalarFunction dual(
        dual_dom,
        [core](double y) { return y * core->log_value(y) - core->moment_table.value(y); },
        [core](double y) { return core->log_value(y); },
        [core](double y) { return 1.0 / core->gen(y); },
        [core](double y) {
            const double g = core->gen(y);
            return -core->gen_prime(y) / (g * g);
        },
        "deformed*");
    return ConjugatePair{std::move(primal), std::move(dual), ConjugationMode::numeric};
}

namespace {

// Probe d1 just inside a primal endpoint; +-inf values are legitimate
// (they mean the image is unbounded on that side), NaN is walked inward.
double probe_d1(const Fn& d1, double x, double inward) {
    double v = d1(x);
    for (int i = 0; i < 64 && std::isnan(v); ++i) {
        x = 0.5 * (x + inward);
        v = d1(x);
    }
    return v;
}

}  // namespace

ConvexScalarFunction conjugate_numeric(const ConvexScalarFunction& f, double seed) {
    const Domain fd = f.domain();
    const double xlo =
        std::isinf(fd.lo) ? -1e16 : fd.lo + 1e-9 * std::max(1.0, std::abs(fd.lo));
    const double xhi = std::isinf(fd.hi) ? 1e16 : fd.hi - 1e-9 * std::max(1.0, std::abs(fd.hi));

    Domain dual_dom;
    dual_dom.lo = probe_d1(f.raw_d1(), xlo, xhi);
    dual_dom.hi = probe_d1(f.raw_d1(), xhi, xlo);
    for (double p : fd.punctures) {
        const double y = f.raw_d1()(p);
        if (std::isfinite(y)) dual_dom.punctures.push_back(y);
    }

    // Keep the root finder strictly inside the primal domain.
    const double lo_eff = std::isinf(fd.lo) ? -num::kInf : fd.lo + 2 * Domain::kEdgeMargin;
    const double hi_eff = std::isinf(fd.hi) ? num::kInf : fd.hi - 2 * Domain::kEdgeMargin;
    const Fn fe = f.raw_eval();
    const Fn f1 = f.raw_d1();
    const Fn f2 = f.raw_d2();
    const Fn f3 = f.raw_d3();
    auto invert = [f1, f2, lo_eff, hi_eff, seed](double y) {
        return num::solve_increasing(f1, f2, y, seed, lo_eff, hi_eff);
    };

    return ConvexScalarFunction(
        dual_dom,
        [invert, fe](double y) {
            const double x = invert(y);
            return x * y - fe(x);
        },
        [invert](double y) { return invert(y); },
        [invert, f2](double y) { return 1.0 / f2(invert(y)); },
        [invert, f2, f3](double y) {
            const double x = invert(y);
            const double h = f2(x);
            return -f3(x) / (h * h * h);
        },
        f.label() + "*num");
}

ConjugatePair conjugate_pair_numeric(const ConvexScalarFunction& f, double seed) {
    return ConjugatePair{f, conjugate_numeric(f, seed), ConjugationMode::numeric};
}

double dual_coordinate(const ConvexScalarFunction& f, double x) { return f.d1(x); }

double bregman_divergence(const ConjugatePair& pair, double x, double x_prime) {
    const double yp = pair.primal.d1(x_prime);
    return pair.primal.eval(x) + pair.dual.eval(yp) - x * yp;
}

SeparableConvexFunction::SeparableConvexFunction(std::vector<ConvexScalarFunction> parts,
                                                 Eigen::VectorXd linear_offset)
    : parts_(std::move(parts)), offset_(std::move(linear_offset)) {
    if (parts_.empty()) throw ParameterError("separable function: at least one part required");
    if (offset_.size() != 0 && offset_.size() != static_cast<Eigen::Index>(parts_.size()))
        throw ParameterError("separable function: linear offset dimension mismatch");
}

namespace {

void check_dim(Eigen::Index got, Eigen::Index want, const char* what) {
    if (got != want) {
        std::ostringstream os;
        os << what << ": argument has dimension " << got << ", expected " << want;
        throw ParameterError(os.str());
    }
}

}  // namespace

double SeparableConvexFunction::value(const Eigen::VectorXd& x) const {
    check_dim(x.size(), dim(), "separable value");
    double s = 0.0;
    for (int a = 0; a < dim(); ++a) s += parts_[static_cast<size_t>(a)].eval(x[a]);
    if (offset_.size()) s += offset_.dot(x);
    return s;
}

Eigen::VectorXd SeparableConvexFunction::gradient(const Eigen::VectorXd& x) const {
    check_dim(x.size(), dim(), "separable gradient");
    Eigen::VectorXd g(dim());
    for (int a = 0; a < dim(); ++a) g[a] = parts_[static_cast<size_t>(a)].d1(x[a]);
    if (offset_.size()) g += offset_;
    return g;
}

Eigen::VectorXd SeparableConvexFunction::hessian_diag(const Eigen::VectorXd& x) const {
    check_dim(x.size(), dim(), "separable hessian");
    Eigen::VectorXd h(dim());
    for (int a = 0; a < dim(); ++a) h[a] = parts_[static_cast<size_t>(a)].d2(x[a]);
    return h;
}

Eigen::VectorXd SeparableConvexFunction::third_diag(const Eigen::VectorXd& x) const {
    check_dim(x.size(), dim(), "separable third derivative");
    Eigen::VectorXd t(dim());
    for (int a = 0; a < dim(); ++a) t[a] = parts_[static_cast<size_t>(a)].d3(x[a]);
    return t;
}

bool SeparableConvexFunction::in_domain(const Eigen::VectorXd& x) const {
    if (x.size() != dim()) return false;
    for (int a = 0; a < dim(); ++a)
        if (!parts_[static_cast<size_t>(a)].domain().contains(x[a])) return false;
    return true;
}

void SeparableConvexFunction::require_in_domain(const Eigen::VectorXd& x,
                                                const std::string& label) const {
    check_dim(x.size(), dim(), "separable domain check");
    for (int a = 0; a < dim(); ++a) {
        std::ostringstream os;
        os << label << "[" << a << "]";
        parts_[static_cast<size_t>(a)].domain().require(x[a], os.str());
    }
}

QuadraticForm::QuadraticForm(Eigen::MatrixXd M, Eigen::VectorXd c, double k0)
    : M_(std::move(M)), c_(std::move(c)), k0_(k0) {
    if (M_.rows() != M_.cols()) throw ParameterError("quadratic form: matrix must be square");
    if (M_.rows() == 0) throw ParameterError("quadratic form: dimension must be positive");
    if (c_.size() == 0) c_ = Eigen::VectorXd::Zero(M_.rows());
    if (c_.size() != M_.rows())
        throw ParameterError("quadratic form: linear term dimension mismatch");
    const double scale = std::max(1.0, M_.cwiseAbs().maxCoeff());
    if ((M_ - M_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ParameterError("quadratic form: matrix must be symmetric");
}

double QuadraticForm::value(const Eigen::VectorXd& x) const {
    check_dim(x.size(), dim(), "quadratic value");
    return 0.5 * x.dot(M_ * x) + c_.dot(x) + k0_;
}

Eigen::VectorXd QuadraticForm::gradient(const Eigen::VectorXd& x) const {
    check_dim(x.size(), dim(), "quadratic gradient");
    return M_ * x + c_;
}

Eigen::VectorXd QuadraticForm::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

bool QuadraticForm::is_positive_definite(double threshold) const {
    return eigenvalues()(0) > threshold;
}

void QuadraticForm::require_positive_definite(double threshold) const {
    const double min_eig = eigenvalues()(0);
    if (min_eig > threshold) return;
    std::ostringstream os;
    os << "quadratic form is not positive definite (offending eigenvalue ";
    if (std::abs(min_eig) <= threshold)
        os << "0";
    else
        os << fmt(min_eig);
    os << ", threshold " << fmt(threshold) << ")";
    throw ConvexityError(os.str());
}

QuadraticForm QuadraticForm::conjugate() const {
    require_positive_definite();
    const Eigen::MatrixXd inv =
        M_.llt().solve(Eigen::MatrixXd::Identity(M_.rows(), M_.cols()));
    const Eigen::MatrixXd sym = 0.5 * (inv + inv.transpose());
    const Eigen::VectorXd lin = -sym * c_;
    const double k = 0.5 * c_.dot(sym * c_) - k0_;
    return QuadraticForm(sym, lin, k);
}

}  // namespace htoda::convex
