#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "htoda/circuit.hpp"
#include "htoda/dynamics.hpp"
#include "htoda/lattice.hpp"

namespace htoda::scenario {

using dynamics::TheoremId;

/// Parsed simulation/verification request.  Structural problems raise
/// ConfigError; physical problems (bad convexity, bad domains) surface
/// later when the system is built or run.
struct Scenario {
    enum class Kind { hamiltonian, lattice, circuit };

    Kind kind = Kind::hamiltonian;
    nlohmann::json raw;
    Eigen::VectorXd q0, p0;
    double t0 = 0.0;
    double dt = 0.0;
    long steps = 0;
    std::vector<TheoremId> verifications;
    std::map<TheoremId, double> tolerance_overrides;
    std::optional<Eigen::MatrixXd> hK_override;
    std::string trajectory_out;  // optional defaults from the file
    std::string report_out;
};

std::string kind_name(Scenario::Kind k);

Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario_file(const std::string& path);

/// The realized system: always a Hamiltonian, plus the kind-specific
/// structure needed by the lattice / circuit verifications.
struct BuiltSystem {
    Scenario::Kind kind = Scenario::Kind::hamiltonian;
    dynamics::SeparableHamiltonian h;
    std::optional<lattice::LatticeSpec> lattice_spec;
    std::optional<circuit::CircuitSpec> circuit_spec;
};

BuiltSystem build_system(const Scenario& s);

dynamics::Trajectory simulate(const Scenario& s, const BuiltSystem& sys);

/// Run the requested verifications against a trajectory (either fresh
/// from simulate or reloaded from its CSV form).
std::vector<dynamics::VerificationReport> run_verifications(const Scenario& s,
                                                            const BuiltSystem& sys,
                                                            const dynamics::Trajectory& traj);

}  // namespace htoda::scenario
