#pragma once

#include <string>

#include <json.hpp>

#include "htoda/circuit.hpp"
#include "htoda/convex.hpp"
#include "htoda/dynamics.hpp"
#include "htoda/geometry.hpp"

namespace htoda::io {

/// Shortest text form that reparses to the same double (17 significant
/// digits).
std::string format_double(double v);

/// Write via a temporary in the same directory plus rename.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);  // ConfigError if unreadable

/// Trajectory table: t,q_1..q_n,p_1..p_n,qstar_1..qstar_n,pstar_1..pstar_n.
std::string trajectory_csv(const dynamics::Trajectory& traj,
                           const dynamics::SeparableHamiltonian& h);

/// Parse a trajectory table; dual columns are ignored (recomputed on
/// demand).  Throws ConfigError on malformed content.
dynamics::Trajectory trajectory_from_csv(const std::string& content);

/// Circuit table: t,Q,Phi,V,I,energy.
std::string circuit_csv(const dynamics::Trajectory& traj, const circuit::CircuitSpec& spec);

/// Residual table: t,r_1..r_k (rows must match the trajectory samples).
std::string residual_csv(const dynamics::Trajectory& traj, const Eigen::MatrixXd& series);

nlohmann::json report_to_json(const dynamics::VerificationReport& r);
nlohmann::json geometry_report_to_json(const geometry::GeometryReport& r);
nlohmann::json trajectory_to_json(const dynamics::Trajectory& traj,
                                  const dynamics::SeparableHamiltonian& h);

}  // namespace htoda::io
