#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "htoda/dynamics.hpp"
#include "htoda/errors.hpp"
#include "htoda/lattice.hpp"

using namespace htoda;
using namespace htoda::lattice;
using dynamics::TheoremId;
using dynamics::Trajectory;

namespace {

PotentialSpec toda_spec(double A = 1.0, double B = 1.0) {
    PotentialSpec s;
    s.kind = PotentialSpec::Kind::toda;
    s.A = A;
    s.B = B;
    return s;
}

PotentialSpec power_spec(double beta) {
    PotentialSpec s;
    s.kind = PotentialSpec::Kind::power;
    s.beta = beta;
    return s;
}

PotentialSpec deformed_spec(const std::string& gen_name) {
    PotentialSpec s;
    s.kind = PotentialSpec::Kind::deformed;
    s.gen_name = gen_name;
    return s;
}

}  // namespace

TEST_CASE("chain hessian: matrices and frozen spectra") {
    const auto c2 = chain_hessian(2, 1.0, Boundary::fixed);
    Eigen::MatrixXd want(2, 2);
    want << 2.0, -1.0, -1.0, 2.0;
    CHECK((c2.matrix - want).cwiseAbs().maxCoeff() == 0.0);
    CHECK(c2.positive_definite);

    // N = 3 fixed ends: eigenvalues (2 - sqrt 2, 2, 2 + sqrt 2) / m.
    const auto c3 = chain_hessian(3, 1.0, Boundary::fixed);
    CHECK(std::abs(c3.eigenvalues[0] - 0.58578643762690497) < 1e-12);
    CHECK(std::abs(c3.eigenvalues[1] - 2.0) < 1e-12);
    CHECK(std::abs(c3.eigenvalues[2] - 3.4142135623730951) < 1e-12);
    const auto c3m = chain_hessian(3, 2.0, Boundary::fixed);
    CHECK(std::abs(c3m.eigenvalues[2] - 3.4142135623730951 / 2.0) < 1e-12);

    // General fixed-end spectrum 2(1 - cos(k pi / (N + 1))) / m.
    const auto c5 = chain_hessian(5, 1.0, Boundary::fixed);
    const double pi = std::acos(-1.0);
    for (int k = 1; k <= 5; ++k)
        CHECK(std::abs(c5.eigenvalues[k - 1] - 2.0 * (1.0 - std::cos(k * pi / 6.0))) < 1e-12);

    // Periodic rings are only semidefinite: the uniform shift costs nothing.
    const auto p3 = chain_hessian(3, 1.0, Boundary::periodic);
    CHECK(std::abs(p3.eigenvalues[0]) < 1e-12);
    CHECK(std::abs(p3.eigenvalues[1] - 3.0) < 1e-12);
    CHECK(std::abs(p3.eigenvalues[2] - 3.0) < 1e-12);
    CHECK(!p3.positive_definite);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    CHECK((p3.matrix * ones).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(chain_hessian(1, 1.0, Boundary::fixed), ParameterError);
    CHECK_THROWS_AS(chain_hessian(3, 0.0, Boundary::fixed), ParameterError);
}

TEST_CASE("kinetic energy of the chain matches the bond sum") {
    const auto c = chain_hessian(2, 1.0, Boundary::fixed);
    convex::QuadraticForm K(c.matrix);
    Eigen::VectorXd p(2);
    p << 1.0, 2.0;
    // Bonds (0 - p1)^2/2 + (p2 - p1)^2/2 + (0 - p2)^2/2.
    CHECK(std::abs(K.value(p) - 3.0) < 1e-15);
}

TEST_CASE("potential builder dispatches on the requested kind") {
    const auto t = build_potential(toda_spec(2.0, 0.5));
    CHECK(t.primal.eval(0.0) == 4.0);
    const auto pw = build_potential(power_spec(1.5));
    CHECK(pw.primal.d1(2.0) == 4.0);
    PotentialSpec q;
    q.kind = PotentialSpec::Kind::quadratic;
    q.curvature = 2.0;
    CHECK(build_potential(q).primal.eval(3.0) == 9.0);
    const auto dz = build_potential(deformed_spec("zeta^2"));
    CHECK(std::abs(dz.dual.d1(2.0) - 0.5) < 1e-10);
    PotentialSpec gp;
    gp.kind = PotentialSpec::Kind::deformed;
    gp.gen_power = 1.0;
    CHECK(std::abs(build_potential(gp).dual.d1(2.0) - std::log(2.0)) < 1e-10);

    CHECK_THROWS_AS(build_potential(deformed_spec("cube")), ConfigError);
    PotentialSpec none;
    none.kind = PotentialSpec::Kind::deformed;
    CHECK_THROWS_AS(build_potential(none), ConfigError);

    CHECK_THROWS_AS(make_lattice_spec(1, 1.0, Boundary::fixed, toda_spec()), ParameterError);
    CHECK_THROWS_AS(make_lattice_spec(3, -1.0, Boundary::fixed, toda_spec()), ParameterError);
    CHECK(boundary_from_name("fixed") == Boundary::fixed);
    CHECK(boundary_from_name("periodic") == Boundary::periodic);
    CHECK(boundary_name(Boundary::periodic) == "periodic");
    CHECK_THROWS_AS(boundary_from_name("open"), ConfigError);
}

TEST_CASE("periodic rings are rejected when building the hamiltonian") {
    const auto spec = make_lattice_spec(3, 1.0, Boundary::periodic, toda_spec());
    try {
        build_lattice_hamiltonian(spec);
        CHECK(false);
    } catch (const ConvexityError& e) {
        CHECK(std::string(e.what()).find("offending eigenvalue 0") != std::string::npos);
    }
}

TEST_CASE("transformed rate: closed forms per potential family") {
    const auto t1 = make_lattice_spec(2, 1.0, Boundary::fixed, toda_spec());
    CHECK(chi(t1, 0.0) == 0.0);
    CHECK(std::abs(chi(t1, std::exp(1.0) - 1.0) - 1.0) < 1e-15);
    // General parameters: (m / B) ln(1 + p-dot / A).
    const auto t2 = make_lattice_spec(2, 3.0, Boundary::fixed, toda_spec(2.0, 0.5));
    CHECK(std::abs(chi(t2, 1.0) - 6.0 * std::log1p(0.5)) < 1e-14);

    const auto pw = make_lattice_spec(2, 2.0, Boundary::fixed, power_spec(1.5));
    CHECK(std::abs(chi(pw, 4.0) - 4.0) < 1e-14);
    const auto p1 = make_lattice_spec(2, 1.0, Boundary::fixed, power_spec(1.0));
    CHECK(chi(p1, 0.5) == 0.5);

    const auto dz = make_lattice_spec(2, 1.0, Boundary::fixed, deformed_spec("zeta"));
    CHECK(std::abs(chi(dz, -std::exp(1.0)) - (-1.0)) < 1e-10);
    // The transformed rate inherits the conjugate's domain.
    CHECK_THROWS_AS(chi(dz, 0.5), DomainError);
    CHECK_THROWS_AS(chi(t1, -1.5), DomainError);
}

TEST_CASE("dual lattice equation on an exponential chain") {
    const auto spec = make_lattice_spec(3, 1.0, Boundary::fixed, toda_spec());
    const auto h = build_lattice_hamiltonian(spec);
    Eigen::VectorXd q0(3), p0(3);
    q0 << 0.4, -0.2, 0.1;
    p0 << 0.0, 0.3, -0.1;
    const auto traj = dynamics::integrate(h, q0, p0, 1e-3, 3000);
    const auto r = verify_dual_lattice(traj, spec);
    CHECK(r.theorem_id == TheoremId::toda_dual);
    CHECK(r.passed);
    CHECK(r.residual_series.cols() == 3);

    // For unit mass this residual is the exact mirror image of the
    // first-order force-law check, sample by sample.
    const auto r21 = dynamics::verify_thm_2_1(traj, h, h.K.quadratic_form());
    CHECK(r.max_residual == r21.max_residual);

    // Mass scales the two residuals apart but both keep passing.
    const auto spec2 = make_lattice_spec(3, 2.0, Boundary::fixed, toda_spec());
    const auto h2 = build_lattice_hamiltonian(spec2);
    const auto traj2 = dynamics::integrate(h2, q0, p0, 1e-3, 3000);
    CHECK(verify_dual_lattice(traj2, spec2).passed);

    const auto per = make_lattice_spec(3, 1.0, Boundary::periodic, toda_spec());
    CHECK_THROWS_AS(verify_dual_lattice(traj, per), HypothesisError);
}

TEST_CASE("dual lattice equation for power and deformed on-site laws") {
    {
        // The cubic on-site law has degenerate curvature at the origin,
        // where the conjugate gradient loses its Lipschitz bound and the
        // chained differentiation amplifies grid error without limit.
        // This window keeps every site away from that point (min |q| is
        // about 0.43 over the run).
        const auto spec = make_lattice_spec(2, 1.0, Boundary::fixed, power_spec(1.5));
        const auto h = build_lattice_hamiltonian(spec);
        Eigen::VectorXd q0(2), p0(2);
        q0 << 0.9, 0.6;
        p0 << 0.1, -0.1;
        const auto traj = dynamics::integrate(h, q0, p0, 1e-3, 900);
        CHECK(verify_dual_lattice(traj, spec).passed);
    }
    {
        const auto spec = make_lattice_spec(2, 1.0, Boundary::fixed, deformed_spec("zeta"));
        const auto h = build_lattice_hamiltonian(spec);
        Eigen::VectorXd q0(2), p0(2);
        q0 << 0.3, -0.4;
        p0 << 0.1, 0.0;
        const auto traj = dynamics::integrate(h, q0, p0, 1e-3, 1500);
        CHECK(verify_dual_lattice(traj, spec).passed);

        // Orientation anchor: with this generator the transformed rate of
        // the exact force equals -m q.
        for (double q : {-1.0, 0.0, 0.8}) {
            const double pdot = -spec.phi.primal.d1(q);
            CHECK(std::abs(chi(spec, pdot) - (-q)) < 1e-9);
        }
    }
}

TEST_CASE("tau diagnostic: equilibrium, generic motion, hypothesis guards") {
    const auto spec = make_lattice_spec(3, 1.0, Boundary::fixed, toda_spec());
    const auto h = build_lattice_hamiltonian(spec);

    // Exact equilibrium: everything stays identically zero.
    const auto eq = dynamics::integrate(h, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3),
                                        1e-2, 100);
    CHECK(eq.q.cwiseAbs().maxCoeff() == 0.0);
    const auto req = tau_diagnostic(eq, spec);
    CHECK(req.passed);

    Eigen::VectorXd q0(3), p0(3);
    q0 << 0.4, -0.2, 0.1;
    p0 << 0.0, 0.3, -0.1;
    const auto traj = dynamics::integrate(h, q0, p0, 1e-3, 3000);
    const auto r = tau_diagnostic(traj, spec);
    CHECK(r.theorem_id == TheoremId::tau);
    CHECK(r.passed);
    CHECK(r.notes.find("per-site") != std::string::npos);

    // Scaled parameters fall outside the diagnostic's hypotheses.
    CHECK_THROWS_AS(tau_diagnostic(traj, make_lattice_spec(3, 1.0, Boundary::fixed,
                                                           toda_spec(2.0, 1.0))),
                    HypothesisError);
    CHECK_THROWS_AS(tau_diagnostic(traj, make_lattice_spec(3, 2.0, Boundary::fixed, toda_spec())),
                    HypothesisError);
    CHECK_THROWS_AS(tau_diagnostic(traj, make_lattice_spec(3, 1.0, Boundary::fixed,
                                                           power_spec(1.5))),
                    HypothesisError);

    // A forged trajectory whose momentum falls faster than the force law
    // allows is caught by the logarithm's domain.
    Trajectory forged;
    forged.t0 = 0.0;
    forged.dt = 0.1;
    forged.steps = 10;
    forged.q = Eigen::MatrixXd::Zero(11, 3);
    forged.p.resize(11, 3);
    for (int k = 0; k <= 10; ++k)
        for (int a = 0; a < 3; ++a) forged.p(k, a) = -2.0 * 0.1 * k;
    try {
        tau_diagnostic(forged, spec);
        CHECK(false);
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("non-positive at sample") != std::string::npos);
    }
}
