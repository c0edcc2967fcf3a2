#include "htoda/circuit.hpp"

#include <cmath>
#include <sstream>

#include "htoda/errors.hpp"
#include "htoda/numeric.hpp"

namespace htoda::circuit {

using convex::ConvexScalarFunction;
using convex::Domain;
using dynamics::Energy;
using dynamics::TheoremId;

namespace {

ConjugatePair inductor_pair(double L) {
    // Co-energy L I^2 / 2 in the current; energy Phi^2 / (2L) in the flux.
    Domain dom{-num::kInf, num::kInf, {}};
    ConvexScalarFunction co(
        dom, [L](double i) { return 0.5 * L * i * i; }, [L](double i) { return L * i; },
        [L](double) { return L; }, [](double) { return 0.0; }, "EL*");
    ConvexScalarFunction en(
        dom, [L](double f) { return 0.5 * f * f / L; }, [L](double f) { return f / L; },
        [L](double) { return 1.0 / L; }, [](double) { return 0.0; }, "EL");
    return ConjugatePair{std::move(co), std::move(en), convex::ConjugationMode::analytic};
}

}  // namespace

CircuitSpec make_log_capacitor_circuit(double L, double Q0, double V0) {
    if (!(L > 0)) throw ParameterError("log capacitor circuit: L must be positive");
    if (!(Q0 > 0) || !(V0 > 0))
        throw ParameterError("log capacitor circuit: Q0 and V0 must be positive");
    CircuitSpec spec;
    spec.kind = "log";
    spec.L = L;
    spec.Q0 = Q0;
    spec.V0 = V0;
    spec.C0 = Q0 / V0;
    spec.el_quadratic = true;
    spec.EL_star = inductor_pair(L);

    // Co-energy Q0 V0 [(1 + V/V0) ln(1 + V/V0) - V/V0] on V > -V0;
    // energy V0 (Q0 e^{Q/Q0} - Q - Q0) on all Q.
    Domain vdom{-V0, num::kInf, {}};
    ConvexScalarFunction co(
        vdom,
        [Q0, V0](double v) {
            const double u = v / V0;
            return Q0 * V0 * ((1.0 + u) * std::log1p(u) - u);
        },
        [Q0, V0](double v) { return Q0 * std::log1p(v / V0); },
        [Q0, V0](double v) { return Q0 / (v + V0); },
        [Q0, V0](double v) { return -Q0 / ((v + V0) * (v + V0)); }, "EC*");
    Domain qdom{-num::kInf, num::kInf, {}};
    ConvexScalarFunction en(
        qdom,
        [Q0, V0](double q) { return V0 * (Q0 * std::exp(q / Q0) - q - Q0); },
        [Q0, V0](double q) { return V0 * std::expm1(q / Q0); },
        [Q0, V0](double q) { return (V0 / Q0) * std::exp(q / Q0); },
        [Q0, V0](double q) { return (V0 / (Q0 * Q0)) * std::exp(q / Q0); }, "EC");
    spec.EC_star =
        ConjugatePair{std::move(co), std::move(en), convex::ConjugationMode::analytic};
    return spec;
}

CircuitSpec make_linear_circuit(double L, double C0) {
    if (!(L > 0)) throw ParameterError("linear circuit: L must be positive");
    if (!(C0 > 0)) throw ParameterError("linear circuit: C0 must be positive");
    CircuitSpec spec;
    spec.kind = "linear";
    spec.L = L;
    spec.C0 = C0;
    spec.el_quadratic = true;
    spec.EL_star = inductor_pair(L);

    Domain dom{-num::kInf, num::kInf, {}};
    ConvexScalarFunction co(
        dom, [C0](double v) { return 0.5 * C0 * v * v; }, [C0](double v) { return C0 * v; },
        [C0](double) { return C0; }, [](double) { return 0.0; }, "EC*");
    ConvexScalarFunction en(
        dom, [C0](double q) { return 0.5 * q * q / C0; }, [C0](double q) { return q / C0; },
        [C0](double) { return 1.0 / C0; }, [](double) { return 0.0; }, "EC");
    spec.EC_star =
        ConjugatePair{std::move(co), std::move(en), convex::ConjugationMode::analytic};
    return spec;
}

SeparableHamiltonian circuit_hamiltonian(const CircuitSpec& spec) {
    // (q, p) = (Q, Phi): the potential side stores energy in the charge,
    // the kinetic side in the flux.
    Energy K = Energy::separable({spec.EL_star.flipped()});
    Energy U = Energy::separable({spec.EC_star.flipped()});
    return dynamics::make_hamiltonian(std::move(K), std::move(U));
}

Trajectory simulate_lc(const CircuitSpec& spec, double Q_init, double Phi_init, double dt,
                       long steps) {
    const SeparableHamiltonian h = circuit_hamiltonian(spec);
    Eigen::VectorXd q0(1), p0(1);
    q0 << Q_init;
    p0 << Phi_init;
    return dynamics::integrate(h, q0, p0, dt, steps);
}

double voltage_of_charge(const CircuitSpec& spec, double Q) { return spec.EC_star.dual.d1(Q); }

double current_of_flux(const CircuitSpec& spec, double Phi) { return spec.EL_star.dual.d1(Phi); }

VerificationReport verify_lc_thm_3_1(const Trajectory& traj, const CircuitSpec& spec,
                                     std::optional<double> tolerance_override) {
    if (!spec.el_quadratic)
        throw HypothesisError("verify_lc_thm_3_1: inductor energy must be quadratic in the flux");
    if (traj.dim() != 1) throw ParameterError("verify_lc_thm_3_1: one-dimensional loop expected");
    if (traj.samples() < 4) throw GridError("verify_lc_thm_3_1: at least 4 samples required");

    const Eigen::MatrixXd phidot = num::grid_d1(traj.p, traj.dt);
    Eigen::MatrixXd g(traj.samples(), 1);
    for (Eigen::Index k = 0; k < g.rows(); ++k)
        g(k, 0) = spec.EC_star.primal.d1(-phidot(k, 0));  // charge at V = -Phi-dot
    // Chained differentiation: keep the second pass off the end rows.
    const Eigen::MatrixXd dg = num::grid_d1_inner(g, traj.dt);

    const double hL = spec.EL_star.dual.d2(0.0);  // 1/L, constant
    const double fitted = dg(0, 0) - hL * traj.p(0, 0);
    Eigen::MatrixXd resid(traj.samples(), 1);
    for (Eigen::Index k = 0; k < resid.rows(); ++k)
        resid(k, 0) = dg(k, 0) - hL * traj.p(k, 0) - fitted;
    const double scale = dg.cwiseAbs().maxCoeff();
    const double tol =
        tolerance_override.value_or(dynamics::residual_tolerance(traj.dt, scale));

    VerificationReport r;
    r.theorem_id = TheoremId::lc_3_1;
    r.residual_series = resid;
    r.max_residual = resid.cwiseAbs().maxCoeff();
    r.mean_residual = resid.cwiseAbs().mean();
    r.tolerance = tol;
    r.passed = r.max_residual <= tol;
    std::ostringstream os;
    os << "d/dt[E_C*'(-Phi-dot)] vs Phi/L + Const, Const fitted at t0 = " << fitted;
    r.notes = os.str();
    return r;
}

VerificationReport verify_lc_thm_3_2(const Trajectory& traj, const CircuitSpec& spec,
                                     std::optional<double> tolerance_override) {
    if (traj.dim() != 1) throw ParameterError("verify_lc_thm_3_2: one-dimensional loop expected");
    if (traj.samples() < 4) throw GridError("verify_lc_thm_3_2: at least 4 samples required");

    Eigen::MatrixXd v(traj.samples(), 1);
    for (Eigen::Index k = 0; k < v.rows(); ++k) v(k, 0) = voltage_of_charge(spec, traj.q(k, 0));
    const Eigen::MatrixXd v1 = num::grid_d1(v, traj.dt);
    const Eigen::MatrixXd v2 = num::grid_d2(v, traj.dt);

    Eigen::MatrixXd resid(traj.samples(), 1);
    double scale = 0.0;
    for (Eigen::Index k = 0; k < resid.rows(); ++k) {
        const double vk = v(k, 0);
        const double cdual = spec.EC_star.primal.d3(vk);   // check of the dual cubic
        const double hdual = spec.EC_star.primal.d2(vk);   // dual capacitor metric
        const double hL = spec.EL_star.dual.d2(traj.p(k, 0));
        const double lhs = cdual * v1(k, 0) * v1(k, 0) + hdual * v2(k, 0);
        scale = std::max(scale, std::abs(lhs));
        resid(k, 0) = lhs + hL * vk;
    }
    const double tol =
        tolerance_override.value_or(dynamics::residual_tolerance(traj.dt, scale));

    VerificationReport r;
    r.theorem_id = TheoremId::lc_3_2;
    r.residual_series = resid;
    r.max_residual = resid.cwiseAbs().maxCoeff();
    r.mean_residual = resid.cwiseAbs().mean();
    r.tolerance = tol;
    r.passed = r.max_residual <= tol;
    r.notes = "C*(V) Vdot^2 + h*_C(V) Vddot vs -V/L";
    return r;
}

}  // namespace htoda::circuit
