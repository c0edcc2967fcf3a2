#pragma once

#include <optional>
#include <string>

#include "htoda/convex.hpp"
#include "htoda/dynamics.hpp"

namespace htoda::circuit {

using convex::ConjugatePair;
using dynamics::SeparableHamiltonian;
using dynamics::Trajectory;
using dynamics::VerificationReport;

/// Series LC loop described by co-energy pairs: EL_star.primal is the
/// inductor co-energy in the current I (dual: energy in the flux Phi),
/// EC_star.primal is the capacitor co-energy in the voltage V (dual:
/// energy in the charge Q).
struct CircuitSpec {
    std::string kind;  // "log" | "linear"
    ConjugatePair EL_star;
    ConjugatePair EC_star;
    bool el_quadratic = false;
    double L = 0.0;
    double Q0 = 0.0;  // log capacitor scale charge
    double V0 = 0.0;  // log capacitor scale voltage
    double C0 = 0.0;  // linear capacitance (log: small-signal Q0/V0)
};

/// Linear inductor L with the saturating charge law Q = Q0 ln(1 + V/V0)
/// on V > -V0.
CircuitSpec make_log_capacitor_circuit(double L, double Q0, double V0);

/// Linear inductor L with linear capacitor C0.
CircuitSpec make_linear_circuit(double L, double C0);

/// H(Q, Phi) = E_C(Q) + E_L(Phi) in the (q, p) = (Q, Phi) chart.
SeparableHamiltonian circuit_hamiltonian(const CircuitSpec& spec);

/// Integrate the loop from (Q, Phi) initial data.
Trajectory simulate_lc(const CircuitSpec& spec, double Q_init, double Phi_init, double dt,
                       long steps);

/// Constitutive observables along a trajectory.
double voltage_of_charge(const CircuitSpec& spec, double Q);
double current_of_flux(const CircuitSpec& spec, double Phi);

/// d/dt [E*_C'(V)|_{V = -Phi-dot}] vs (d^2 E_L/dPhi^2) Phi + Const, with
/// Const fitted at the first sample.  Requires a quadratic inductor.
VerificationReport verify_lc_thm_3_1(const Trajectory& traj, const CircuitSpec& spec,
                                     std::optional<double> tolerance_override = {});

/// Second-order voltage form: C*(V) Vdot^2 + h*_C(V) Vddot vs -h_L V.
VerificationReport verify_lc_thm_3_2(const Trajectory& traj, const CircuitSpec& spec,
                                     std::optional<double> tolerance_override = {});

}  // namespace htoda::circuit
