#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "htoda/numeric.hpp"

namespace htoda::convex {

using num::Fn;
using num::kInf;

/// Open interval with optional excluded interior points.  Evaluation
/// within kEdgeMargin of an endpoint or an excluded point is rejected.
struct Domain {
    static constexpr double kEdgeMargin = 1e-10;

    double lo = -kInf;
    double hi = kInf;
    std::vector<double> punctures;

    bool contains(double x) const;
    /// Throws DomainError naming `label` when x is not strictly inside.
    void require(double x, const std::string& label) const;
};

/// Immutable scalar function with first three derivatives on an open
/// domain.  The stored closures are raw; the accessors check the domain.
class ConvexScalarFunction {
public:
    ConvexScalarFunction() = default;
    ConvexScalarFunction(Domain domain, Fn eval, Fn d1, Fn d2, Fn d3, std::string label);

    double eval(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    double d3(double x) const;

    const Domain& domain() const { return domain_; }
    const std::string& label() const { return label_; }

    // Unchecked access, for callers that manage domains themselves.
    const Fn& raw_eval() const { return eval_; }
    const Fn& raw_d1() const { return d1_; }
    const Fn& raw_d2() const { return d2_; }
    const Fn& raw_d3() const { return d3_; }

private:
    Domain domain_{};
    Fn eval_, d1_, d2_, d3_;
    std::string label_;
};

enum class ConjugationMode { analytic, numeric };

/// A strictly convex function together with its convex conjugate.
struct ConjugatePair {
    ConvexScalarFunction primal;
    ConvexScalarFunction dual;
    ConjugationMode mode = ConjugationMode::analytic;

    /// The same pair viewed from the dual side.
    ConjugatePair flipped() const { return ConjugatePair{dual, primal, mode}; }
};

/// phi(q) = (A/B) e^{-Bq} + A q with conjugate on (-inf, A).
ConjugatePair make_toda_potential(double A, double B);

/// phi(q) = |q|^{2 beta} / (2 beta), conjugate exponent 2 beta* =
/// 2 beta / (2 beta - 1).  Requires 2 beta > 1; the origin is excluded
/// from both domains unless beta == 1.
ConjugatePair make_power_potential(double beta);

/// phi(q) = c q^2 / 2 with conjugate y^2 / (2c).
ConjugatePair make_quadratic_potential(double curvature = 1.0);

/// Potential generated by a positive increasing function `gen` on
/// (0, inf): the dual is the antiderivative of its generalized logarithm
/// and the primal is recovered by inversion.  All values are defined by
/// adaptive quadrature at `quadrature_tol`.
ConjugatePair make_deformed_potential(Fn gen, double quadrature_tol = 1e-10);

/// Convex conjugate of f computed by inverting f.d1 with a safeguarded
/// Newton iteration seeded at `seed`.
ConvexScalarFunction conjugate_numeric(const ConvexScalarFunction& f, double seed = 0.0);

/// {f, conjugate_numeric(f)} packaged as a pair.
ConjugatePair conjugate_pair_numeric(const ConvexScalarFunction& f, double seed = 0.0);

/// Dual coordinate of x under f, i.e. f.d1(x) (domain checked).
double dual_coordinate(const ConvexScalarFunction& f, double x);

/// Bregman divergence of the pair: f(x) + f*(f'(x')) - x f'(x').
double bregman_divergence(const ConjugatePair& pair, double x, double x_prime);

/// Sum of independent scalar convex functions plus an optional linear
/// term: F(x) = sum_a part_a(x_a) + offset . x.
class SeparableConvexFunction {
public:
    SeparableConvexFunction() = default;
    explicit SeparableConvexFunction(std::vector<ConvexScalarFunction> parts,
                                     Eigen::VectorXd linear_offset = Eigen::VectorXd());

    int dim() const { return static_cast<int>(parts_.size()); }
    const ConvexScalarFunction& part(int a) const { return parts_.at(static_cast<size_t>(a)); }
    const Eigen::VectorXd& linear_offset() const { return offset_; }

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    Eigen::VectorXd hessian_diag(const Eigen::VectorXd& x) const;
    Eigen::VectorXd third_diag(const Eigen::VectorXd& x) const;

    bool in_domain(const Eigen::VectorXd& x) const;
    void require_in_domain(const Eigen::VectorXd& x, const std::string& label) const;

private:
    std::vector<ConvexScalarFunction> parts_;
    Eigen::VectorXd offset_;  // zero-length means absent
};

/// Quadratic energy x . M x / 2 + c . x + k0 with symmetric M.
class QuadraticForm {
public:
    QuadraticForm() = default;
    explicit QuadraticForm(Eigen::MatrixXd M, Eigen::VectorXd c = Eigen::VectorXd(),
                           double k0 = 0.0);

    int dim() const { return static_cast<int>(M_.rows()); }
    const Eigen::MatrixXd& matrix() const { return M_; }
    const Eigen::VectorXd& linear() const { return c_; }
    double constant() const { return k0_; }

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

    /// Eigenvalues in ascending order.
    Eigen::VectorXd eigenvalues() const;
    bool is_positive_definite(double threshold = 1e-10) const;
    /// Throws ConvexityError naming the offending eigenvalue.
    void require_positive_definite(double threshold = 1e-10) const;

    /// Conjugate (y - c) . M^{-1} (y - c) / 2 - k0; requires M positive
    /// definite.
    QuadraticForm conjugate() const;

private:
    Eigen::MatrixXd M_;
    Eigen::VectorXd c_;
    double k0_ = 0.0;
};

}  // namespace htoda::convex
