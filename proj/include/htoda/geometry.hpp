#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "htoda/convex.hpp"

namespace htoda::geometry {

using convex::ConjugatePair;
using convex::QuadraticForm;
using convex::SeparableConvexFunction;

/// Dense rank-3 array of fixed dimension n (row-major in (a, b, c)).
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int n) : n_(n), v_(static_cast<size_t>(n) * n * n, 0.0) {}

    int dim() const { return n_; }
    double& operator()(int a, int b, int c) { return v_[index(a, b, c)]; }
    double operator()(int a, int b, int c) const { return v_[index(a, b, c)]; }
    const std::vector<double>& flat() const { return v_; }
    std::vector<double>& flat() { return v_; }

    double max_abs() const;

private:
    size_t index(int a, int b, int c) const {
        return (static_cast<size_t>(a) * n_ + b) * n_ + c;
    }
    int n_ = 0;
    std::vector<double> v_;
};

enum class CoordinateTag { primal, dual };
enum class EnergyTag { kinetic, potential };

struct MetricComponents {
    Eigen::MatrixXd g;
    CoordinateTag coordinate_tag;
    EnergyTag energy_tag;
};

struct CubicComponents {
    Tensor3 c;
    CoordinateTag coordinate_tag;
    EnergyTag energy_tag;
};

struct ConnectionCoefficients {
    double alpha = 0.0;
    Tensor3 gamma;
    CoordinateTag coordinate_tag;
};

/// Hessian metric of a separable energy at x (diagonal).  Rejected with
/// ConvexityError when any diagonal entry is not strictly positive.
MetricComponents metric_at(const SeparableConvexFunction& f, const Eigen::VectorXd& x,
                           CoordinateTag coord, EnergyTag energy);

/// Hessian metric of a quadratic energy (constant in x).
MetricComponents metric_at(const QuadraticForm& f, const Eigen::VectorXd& x, CoordinateTag coord,
                           EnergyTag energy);

/// Third-derivative (cubic) components; diagonal for separable energies,
/// identically zero for quadratic ones.
CubicComponents cubic_at(const SeparableConvexFunction& f, const Eigen::VectorXd& x,
                         CoordinateTag coord, EnergyTag energy);
CubicComponents cubic_at(const QuadraticForm& f, const Eigen::VectorXd& x, CoordinateTag coord,
                         EnergyTag energy);

/// Connection coefficients (1 - alpha)/2 * C in the affine coordinates of
/// the cubic components.
ConnectionCoefficients alpha_connection(const CubicComponents& cubic, double alpha);

/// Max-abs residual of Gamma(alpha) + Gamma(-alpha) - dH at x, where dH
/// is the coordinate derivative of the metric by central differences.
double connection_duality_residual(const SeparableConvexFunction& f, const Eigen::VectorXd& x,
                                   CoordinateTag coord, EnergyTag energy, double alpha);

/// |f''(x) g''(f'(x)) - 1| for a conjugate pair at a primal point.
double basis_pairing_check(const ConjugatePair& pair, double x);

/// Everything the geometry inspection command emits at one point.
struct GeometryReport {
    Eigen::VectorXd point;
    CoordinateTag coordinate_tag;
    Eigen::MatrixXd metric;
    Eigen::MatrixXd inverse_metric;
    Tensor3 cubic;
    std::map<double, Tensor3> connections;  // keyed by alpha
    std::optional<Eigen::VectorXd> eigenvalues;
};

GeometryReport geometry_report(const SeparableConvexFunction& f, const Eigen::VectorXd& x,
                               CoordinateTag coord, EnergyTag energy,
                               const std::vector<double>& alphas);
GeometryReport geometry_report(const QuadraticForm& f, const Eigen::VectorXd& x,
                               CoordinateTag coord, EnergyTag energy,
                               const std::vector<double>& alphas);

}  // namespace htoda::geometry
