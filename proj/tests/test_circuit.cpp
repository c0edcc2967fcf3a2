#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "htoda/circuit.hpp"
#include "htoda/dynamics.hpp"
#include "htoda/errors.hpp"

using namespace htoda;
using namespace htoda::circuit;
using dynamics::TheoremId;
using dynamics::Trajectory;

namespace {

// Mean spacing of upward zero crossings of q, by linear interpolation.
double measured_period(const Trajectory& traj) {
    std::vector<double> times;
    for (long k = 0; k + 1 < traj.samples(); ++k) {
        const double a = traj.q(k, 0);
        const double b = traj.q(k + 1, 0);
        if (a < 0.0 && b >= 0.0) times.push_back(traj.time_at(k) + traj.dt * (-a) / (b - a));
    }
    REQUIRE(times.size() >= 2);
    return (times.back() - times.front()) / static_cast<double>(times.size() - 1);
}

}  // namespace

TEST_CASE("log capacitor: constitutive closed forms") {
    const auto spec = make_log_capacitor_circuit(0.5, 2.0, 4.0);
    CHECK(spec.kind == "log");
    CHECK(spec.C0 == 0.5);

    // Charge law Q = Q0 ln(1 + V/V0) and its first two derivatives.
    CHECK(std::abs(spec.EC_star.primal.d1(4.0) - 2.0 * std::log(2.0)) < 1e-15);
    CHECK(spec.EC_star.primal.d2(0.0) == 0.5);  // small-signal capacitance
    CHECK(spec.EC_star.primal.d3(0.0) == -0.125);
    CHECK(std::abs(spec.EC_star.primal.d2(4.0) - 0.25) < 1e-15);

    // Energy side V0 (Q0 e^{Q/Q0} - Q - Q0) and the inverse voltage law.
    CHECK(spec.EC_star.dual.eval(0.0) == 0.0);
    CHECK(spec.EC_star.dual.d1(0.0) == 0.0);
    CHECK(std::abs(voltage_of_charge(spec, 2.0 * std::log(2.0)) - 4.0) < 1e-14);
    CHECK(std::abs(voltage_of_charge(spec, 0.7) - 4.0 * std::expm1(0.35)) < 1e-14);

    // Conjugacy: equality case of the co-energy/energy split.
    const double V = 4.0;
    const double Q = spec.EC_star.primal.d1(V);
    CHECK(std::abs(spec.EC_star.primal.eval(V) + spec.EC_star.dual.eval(Q) - Q * V) < 1e-13);
    CHECK(std::abs(spec.EC_star.primal.d1(spec.EC_star.dual.d1(Q)) - Q) < 1e-14);

    // The voltage domain has a floor at -V0.
    CHECK_THROWS_AS(spec.EC_star.primal.eval(-4.0), DomainError);
    CHECK_THROWS_AS(spec.EC_star.primal.eval(-5.0), DomainError);
    CHECK(spec.EC_star.primal.domain().contains(-3.99));

    // Inductor: current/flux duality.
    CHECK(std::abs(current_of_flux(spec, 1.0) - 2.0) < 1e-15);
    CHECK(spec.EL_star.primal.eval(2.0) == 1.0);

    CHECK_THROWS_AS(make_log_capacitor_circuit(0.0, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(make_log_capacitor_circuit(1.0, -1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(make_log_capacitor_circuit(1.0, 1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(make_linear_circuit(1.0, 0.0), ParameterError);
}

TEST_CASE("linear loop: energy conservation and the closed-form period") {
    const auto spec = make_linear_circuit(0.25, 1.0);
    const auto h = circuit_hamiltonian(spec);
    const auto traj = simulate_lc(spec, 1.0, 0.0, 1e-4, 80000);
    CHECK(traj.samples() == 80001);

    const double e0 = h.value(traj.q.row(0).transpose(), traj.p.row(0).transpose());
    CHECK(std::abs(e0 - 0.5) < 1e-15);
    double drift = 0.0;
    for (long k = 0; k <= 80000; k += 40)
        drift = std::max(drift, std::abs(h.value(traj.q.row(k).transpose(),
                                                 traj.p.row(k).transpose()) -
                                         e0));
    CHECK(drift < 1e-8);

    const double pi = std::acos(-1.0);
    const double T = 2.0 * pi * std::sqrt(spec.L * spec.C0);  // pi here
    CHECK(std::abs(measured_period(traj) - T) < 1e-4 * T);
}

TEST_CASE("log loop: small oscillations recover the linear period within 1%") {
    const auto spec = make_log_capacitor_circuit(2.0, 3.0, 1.5);
    const double pi = std::acos(-1.0);
    const double T0 = 2.0 * pi * std::sqrt(spec.L * spec.Q0 / spec.V0);  // 4 pi
    const double dt = T0 / 20000.0;
    const auto traj = simulate_lc(spec, 0.01 * spec.Q0, 0.0, dt, 45000);
    CHECK(std::abs(measured_period(traj) - T0) < 0.01 * T0);
}

TEST_CASE("loop verifications hold and shrink at second order") {
    const auto spec = make_log_capacitor_circuit(1.0, 1.0, 1.0);
    const auto traj = simulate_lc(spec, 0.5, 0.0, 1e-3, 5000);

    const auto r1 = verify_lc_thm_3_1(traj, spec);
    CHECK(r1.theorem_id == TheoremId::lc_3_1);
    CHECK(r1.passed);
    CHECK(r1.notes.find("Const fitted") != std::string::npos);

    const auto r2 = verify_lc_thm_3_2(traj, spec);
    CHECK(r2.theorem_id == TheoremId::lc_3_2);
    CHECK(r2.passed);

    auto max_res = [&](double dt, long steps) {
        const auto t = simulate_lc(spec, 0.5, 0.0, dt, steps);
        return std::pair{verify_lc_thm_3_1(t, spec).max_residual,
                         verify_lc_thm_3_2(t, spec).max_residual};
    };
    const auto [a1, a2] = max_res(2e-3, 2500);
    const auto [b1, b2] = max_res(1e-3, 5000);
    CHECK(a1 / b1 > 3.5);
    CHECK(a1 / b1 < 4.5);
    CHECK(a2 / b2 > 3.5);
    CHECK(a2 / b2 < 4.5);

    // The linear loop satisfies both checks as well.
    const auto lin = make_linear_circuit(0.5, 2.0);
    const auto lt = simulate_lc(lin, 1.0, 0.2, 1e-3, 5000);
    CHECK(verify_lc_thm_3_1(lt, lin).passed);
    CHECK(verify_lc_thm_3_2(lt, lin).passed);

    // A non-quadratic inductor violates the first check's hypothesis.
    CircuitSpec forged = spec;
    forged.el_quadratic = false;
    CHECK_THROWS_AS(verify_lc_thm_3_1(traj, forged), HypothesisError);
    CHECK(verify_lc_thm_3_2(traj, forged).passed);  // no such hypothesis here
}
