#include "htoda/geometry.hpp"

#include <cmath>
#include <sstream>

#include "htoda/errors.hpp"
#include "htoda/numeric.hpp"

namespace htoda::geometry {

double Tensor3::max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
}

MetricComponents metric_at(const SeparableConvexFunction& f, const Eigen::VectorXd& x,
                           CoordinateTag coord, EnergyTag energy) {
    const Eigen::VectorXd h = f.hessian_diag(x);
    for (Eigen::Index a = 0; a < h.size(); ++a) {
        if (!(h[a] > 1e-10)) {
            std::ostringstream os;
            os << "metric is not positive definite at component " << a
               << " (offending eigenvalue " << (std::abs(h[a]) <= 1e-10 ? 0.0 : h[a]) << ")";
            throw ConvexityError(os.str());
        }
    }
    MetricComponents m{Eigen::MatrixXd(h.asDiagonal()), coord, energy};
    return m;
}

MetricComponents metric_at(const QuadraticForm& f, const Eigen::VectorXd& x, CoordinateTag coord,
                           EnergyTag energy) {
    (void)x;
    f.require_positive_definite();
    return MetricComponents{f.matrix(), coord, energy};
}

CubicComponents cubic_at(const SeparableConvexFunction& f, const Eigen::VectorXd& x,
                         CoordinateTag coord, EnergyTag energy) {
    const Eigen::VectorXd t = f.third_diag(x);
    Tensor3 c(static_cast<int>(t.size()));
    for (int a = 0; a < t.size(); ++a) c(a, a, a) = t[a];
    return CubicComponents{std::move(c), coord, energy};
}

CubicComponents cubic_at(const QuadraticForm& f, const Eigen::VectorXd& x, CoordinateTag coord,
                         EnergyTag energy) {
    (void)x;
    return CubicComponents{Tensor3(f.dim()), coord, energy};
}

ConnectionCoefficients alpha_connection(const CubicComponents& cubic, double alpha) {
    ConnectionCoefficients out{alpha, cubic.c, cubic.coordinate_tag};
    const double factor = (1.0 - alpha) / 2.0;
    for (double& v : out.gamma.flat()) v *= factor;
    return out;
}

double connection_duality_residual(const SeparableConvexFunction& f, const Eigen::VectorXd& x,
                                   CoordinateTag coord, EnergyTag energy, double alpha) {
    const int n = f.dim();
    const CubicComponents cubic = cubic_at(f, x, coord, energy);
    const ConnectionCoefficients plus = alpha_connection(cubic, alpha);
    const ConnectionCoefficients minus = alpha_connection(cubic, -alpha);
    double resid = 0.0;
    Eigen::VectorXd xp = x, xm = x;
    for (int a = 0; a < n; ++a) {
        const double h = num::fd_step(x[a]);
        xp[a] = x[a] + h;
        xm[a] = x[a] - h;
        const Eigen::MatrixXd dg =
            (metric_at(f, xp, coord, energy).g - metric_at(f, xm, coord, energy).g) / (2 * h);
        xp[a] = x[a];
        xm[a] = x[a];
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                resid = std::max(resid,
                                 std::abs(plus.gamma(a, b, c) + minus.gamma(a, b, c) - dg(b, c)));
    }
    return resid;
}

double basis_pairing_check(const ConjugatePair& pair, double x) {
    const double y = pair.primal.d1(x);
    return std::abs(pair.primal.d2(x) * pair.dual.d2(y) - 1.0);
}

namespace {

template <typename F>
GeometryReport build_report(const F& f, const Eigen::VectorXd& x, CoordinateTag coord,
                            EnergyTag energy, const std::vector<double>& alphas) {
    GeometryReport r;
    r.point = x;
    r.coordinate_tag = coord;
    r.metric = metric_at(f, x, coord, energy).g;
    r.inverse_metric = r.metric.inverse();
    const CubicComponents cubic = cubic_at(f, x, coord, energy);
    r.cubic = cubic.c;
    for (double a : alphas) r.connections[a] = alpha_connection(cubic, a).gamma;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.metric, Eigen::EigenvaluesOnly);
    r.eigenvalues = es.eigenvalues();
    return r;
}

}  // namespace

GeometryReport geometry_report(const SeparableConvexFunction& f, const Eigen::VectorXd& x,
                               CoordinateTag coord, EnergyTag energy,
                               const std::vector<double>& alphas) {
    return build_report(f, x, coord, energy, alphas);
}

GeometryReport geometry_report(const QuadraticForm& f, const Eigen::VectorXd& x,
                               CoordinateTag coord, EnergyTag energy,
                               const std::vector<double>& alphas) {
    return build_report(f, x, coord, energy, alphas);
}

}  // namespace htoda::geometry
