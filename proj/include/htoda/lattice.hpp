#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "htoda/convex.hpp"
#include "htoda/dynamics.hpp"

namespace htoda::lattice {

using convex::ConjugatePair;
using convex::QuadraticForm;
using dynamics::SeparableHamiltonian;
using dynamics::Trajectory;
using dynamics::VerificationReport;

enum class Boundary { fixed, periodic };

std::string boundary_name(Boundary b);
Boundary boundary_from_name(const std::string& name);  // ConfigError if unknown

/// On-site potential selection for a lattice.
struct PotentialSpec {
    enum class Kind { toda, power, deformed, quadratic };
    Kind kind = Kind::toda;
    double A = 1.0;          // toda
    double B = 1.0;          // toda
    double beta = 1.0;       // power
    double curvature = 1.0;  // quadratic
    std::string gen_name;    // deformed: "zeta" | "zeta^2" | "sqrt"
    double gen_power = 0.0;  // deformed alternative: generator z^s, s > 0
    double quadrature_tol = 1e-10;
};

/// Build the scalar conjugate pair selected by the spec.
ConjugatePair build_potential(const PotentialSpec& spec);

struct LatticeSpec {
    int N = 0;
    double m = 1.0;
    Boundary boundary = Boundary::fixed;
    PotentialSpec potential;
    ConjugatePair phi;
};

LatticeSpec make_lattice_spec(int N, double m, Boundary boundary, PotentialSpec potential);

/// Kinetic curvature matrix of the nearest-neighbour momentum coupling
/// sum_bonds (p_next - p_site)^2 / (2m).  Fixed ends clamp p_0 = p_{N+1}
/// = 0; periodic closes the ring.
struct ChainHessian {
    int N = 0;
    double m = 1.0;
    Boundary boundary = Boundary::fixed;
    Eigen::MatrixXd matrix;
    Eigen::VectorXd eigenvalues;  // ascending
    bool positive_definite = false;
};

ChainHessian chain_hessian(int N, double m, Boundary boundary);

/// K from the chain Hessian, U = sum of on-site potentials.  Throws
/// ConvexityError when the chain matrix is only semidefinite (periodic).
SeparableHamiltonian build_lattice_hamiltonian(const LatticeSpec& spec);

/// Transformed rate chi(p-dot) = -m * phi*'(-p-dot).
double chi(const LatticeSpec& spec, double p_dot);

/// d/dt chi(p-dot_a) vs the neighbour stencil p_{a+1} + p_{a-1} - 2 p_a
/// (fixed ends).  Residual series is per site.
VerificationReport verify_dual_lattice(const Trajectory& traj, const LatticeSpec& spec,
                                       std::optional<double> tolerance_override = {});

/// Per-site constancy of ln(1 + p-dot_a) - ln(tau_{a+1} tau_{a-1} /
/// tau_a^2) with ln tau_a the cumulative trapezoid integral of p_a and
/// tau_0 = tau_{N+1} = 1.  Requires the unit-parameter exponential
/// on-site potential with unit mass; HypothesisError otherwise.
VerificationReport tau_diagnostic(const Trajectory& traj, const LatticeSpec& spec,
                                  std::optional<double> tolerance_override = {});

}  // namespace htoda::lattice
