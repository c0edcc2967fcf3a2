#include "htoda/scenario.hpp"

#include <algorithm>
#include <sstream>

#include "htoda/errors.hpp"
#include "htoda/io.hpp"
#include "htoda/log.hpp"

namespace htoda::scenario {

using dynamics::Energy;
using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError("scenario: " + msg); }

const json& require_field(const json& j, const char* name) {
    const auto it = j.find(name);
    if (it == j.end()) config_fail(std::string("missing field '") + name + "'");
    return *it;
}

double as_number(const json& j, const char* name) {
    if (!j.is_number()) config_fail(std::string("field '") + name + "' must be a number");
    return j.get<double>();
}

std::string as_string(const json& j, const char* name) {
    if (!j.is_string()) config_fail(std::string("field '") + name + "' must be a string");
    return j.get<std::string>();
}

Eigen::VectorXd as_vector(const json& j, const char* name) {
    if (!j.is_array()) config_fail(std::string("field '") + name + "' must be an array");
    Eigen::VectorXd v(j.size());
    Eigen::Index i = 0;
    for (const auto& x : j) {
        if (!x.is_number()) config_fail(std::string("field '") + name + "' must hold numbers");
        v[i++] = x.get<double>();
    }
    return v;
}

Eigen::MatrixXd as_matrix(const json& j, const char* name) {
    if (!j.is_array() || j.empty())
        config_fail(std::string("field '") + name + "' must be a non-empty array of rows");
    const size_t cols = j.front().is_array() ? j.front().size() : 0;
    if (cols == 0) config_fail(std::string("field '") + name + "' must hold non-empty rows");
    Eigen::MatrixXd m(j.size(), cols);
    Eigen::Index r = 0;
    for (const auto& row : j) {
        if (!row.is_array() || row.size() != cols)
            config_fail(std::string("field '") + name + "' has ragged rows");
        Eigen::Index c = 0;
        for (const auto& x : row) {
            if (!x.is_number())
                config_fail(std::string("field '") + name + "' must hold numbers");
            m(r, c++) = x.get<double>();
        }
        ++r;
    }
    return m;
}

lattice::PotentialSpec parse_potential_spec(const json& j) {
    if (!j.is_object()) config_fail("potential must be an object");
    lattice::PotentialSpec spec;
    const std::string kind = as_string(require_field(j, "kind"), "potential.kind");
    if (kind == "toda") {
        spec.kind = lattice::PotentialSpec::Kind::toda;
        if (j.contains("A")) spec.A = as_number(j.at("A"), "potential.A");
        if (j.contains("B")) spec.B = as_number(j.at("B"), "potential.B");
    } else if (kind == "power") {
        spec.kind = lattice::PotentialSpec::Kind::power;
        spec.beta = as_number(require_field(j, "beta"), "potential.beta");
    } else if (kind == "quadratic") {
        spec.kind = lattice::PotentialSpec::Kind::quadratic;
        if (j.contains("curvature"))
            spec.curvature = as_number(j.at("curvature"), "potential.curvature");
    } else if (kind == "deformed") {
        spec.kind = lattice::PotentialSpec::Kind::deformed;
        if (j.contains("gen")) spec.gen_name = as_string(j.at("gen"), "potential.gen");
        if (j.contains("gen_power"))
            spec.gen_power = as_number(j.at("gen_power"), "potential.gen_power");
        if (spec.gen_name.empty() && !(spec.gen_power > 0))
            config_fail("deformed potential needs 'gen' or a positive 'gen_power'");
        if (j.contains("quadrature_tol"))
            spec.quadrature_tol = as_number(j.at("quadrature_tol"), "potential.quadrature_tol");
    } else {
        config_fail("unknown potential kind '" + kind + "'");
    }
    return spec;
}

bool id_valid_for_kind(TheoremId id, Scenario::Kind kind) {
    switch (kind) {
        case Scenario::Kind::circuit:
            return id == TheoremId::lc_3_1 || id == TheoremId::lc_3_2;
        case Scenario::Kind::lattice:
            if (id == TheoremId::toda_dual || id == TheoremId::tau) return true;
            [[fallthrough]];
        case Scenario::Kind::hamiltonian:
            switch (id) {
                case TheoremId::thm_2_1:
                case TheoremId::thm_2_2:
                case TheoremId::prop_2_3:
                case TheoremId::prop_2_4:
                case TheoremId::prop_2_5:
                case TheoremId::j_function:
                case TheoremId::dual_first_order: return true;
                default: return false;
            }
    }
    return false;
}

}  // namespace

std::string kind_name(Scenario::Kind k) {
    switch (k) {
        case Scenario::Kind::hamiltonian: return "hamiltonian";
        case Scenario::Kind::lattice: return "lattice";
        case Scenario::Kind::circuit: return "circuit";
    }
    return "?";
}

Scenario parse_scenario(const json& j) {
    if (!j.is_object()) config_fail("top level must be an object");
    Scenario s;
    s.raw = j;
    const std::string kind = as_string(require_field(j, "kind"), "kind");
    if (kind == "hamiltonian")
        s.kind = Scenario::Kind::hamiltonian;
    else if (kind == "lattice")
        s.kind = Scenario::Kind::lattice;
    else if (kind == "circuit")
        s.kind = Scenario::Kind::circuit;
    else
        config_fail("unknown kind '" + kind + "'");

    s.dt = as_number(require_field(j, "dt"), "dt");
    if (!(s.dt > 0)) config_fail("dt must be positive");
    const json& steps_j = require_field(j, "steps");
    if (!steps_j.is_number_integer()) config_fail("steps must be an integer");
    s.steps = steps_j.get<long>();
    if (s.steps < 2) config_fail("steps must be at least 2");
    if (j.contains("t0")) s.t0 = as_number(j.at("t0"), "t0");

    const json& init = require_field(j, "initial");
    if (s.kind == Scenario::Kind::circuit) {
        s.q0.resize(1);
        s.p0.resize(1);
        s.q0[0] = as_number(require_field(init, "Q"), "initial.Q");
        s.p0[0] = as_number(require_field(init, "Phi"), "initial.Phi");
    } else {
        s.q0 = as_vector(require_field(init, "q"), "initial.q");
        s.p0 = as_vector(require_field(init, "p"), "initial.p");
        if (s.q0.size() != s.p0.size()) config_fail("initial.q and initial.p sizes differ");
        if (s.q0.size() == 0) config_fail("initial state must be non-empty");
    }

    if (j.contains("verifications")) {
        const json& v = j.at("verifications");
        if (!v.is_array()) config_fail("verifications must be an array of ids");
        for (const auto& e : v) {
            const TheoremId id = dynamics::theorem_id_from_name(
                as_string(e, "verifications[]"));
            if (!id_valid_for_kind(id, s.kind))
                config_fail("verification '" + dynamics::theorem_id_name(id) +
                            "' is not valid for kind '" + kind + "'");
            s.verifications.push_back(id);
        }
    }
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        if (!t.is_object()) config_fail("tolerances must be an object keyed by id");
        for (const auto& [key, val] : t.items()) {
            const TheoremId id = dynamics::theorem_id_from_name(key);
            s.tolerance_overrides[id] = as_number(val, "tolerances value");
        }
    }
    if (j.contains("hK_override")) s.hK_override = as_matrix(j.at("hK_override"), "hK_override");
    if (j.contains("output")) {
        const json& o = j.at("output");
        if (!o.is_object()) config_fail("output must be an object");
        if (o.contains("trajectory"))
            s.trajectory_out = as_string(o.at("trajectory"), "output.trajectory");
        if (o.contains("report")) s.report_out = as_string(o.at("report"), "output.report");
    }
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    const std::string text = io::read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        config_fail(std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return parse_scenario(j);
}

namespace {

Energy parse_energy(const json& j, const char* label, Eigen::Index dim) {
    if (!j.is_object()) config_fail(std::string(label) + " must be an object");
    const std::string type = as_string(require_field(j, "type"), "energy type");
    if (type == "zero") return Energy::zero(static_cast<int>(dim));
    if (type == "quadratic") {
        const Eigen::MatrixXd M = as_matrix(require_field(j, "M"), "M");
        Eigen::VectorXd c;
        if (j.contains("c")) c = as_vector(j.at("c"), "c");
        double k0 = 0.0;
        if (j.contains("k0")) k0 = as_number(j.at("k0"), "k0");
        return Energy::quadratic(convex::QuadraticForm(M, c, k0));
    }
    if (type == "separable") {
        const json& pots = require_field(j, "potentials");
        if (!pots.is_array() || pots.empty())
            config_fail("separable energy needs a non-empty 'potentials' array");
        std::vector<convex::ConjugatePair> pairs;
        for (const auto& p : pots) pairs.push_back(lattice::build_potential(parse_potential_spec(p)));
        Eigen::VectorXd offset;
        if (j.contains("linear_offset")) offset = as_vector(j.at("linear_offset"), "linear_offset");
        return Energy::separable(std::move(pairs), std::move(offset));
    }
    config_fail("unknown energy type '" + type + "'");
}

}  // namespace

BuiltSystem build_system(const Scenario& s) {
    BuiltSystem sys;
    sys.kind = s.kind;
    const json& j = s.raw;
    switch (s.kind) {
        case Scenario::Kind::hamiltonian: {
            Energy K = parse_energy(require_field(j, "K"), "K", s.q0.size());
            Energy U = parse_energy(require_field(j, "U"), "U", s.q0.size());
            sys.h = dynamics::make_hamiltonian(std::move(K), std::move(U));
            break;
        }
        case Scenario::Kind::lattice: {
            const json& nj = require_field(j, "N");
            if (!nj.is_number_integer()) config_fail("N must be an integer");
            const int N = nj.get<int>();
            const double m = j.contains("m") ? as_number(j.at("m"), "m") : 1.0;
            const lattice::Boundary b =
                j.contains("boundary")
                    ? lattice::boundary_from_name(as_string(j.at("boundary"), "boundary"))
                    : lattice::Boundary::fixed;
            const lattice::PotentialSpec pot = parse_potential_spec(require_field(j, "potential"));
            if (s.q0.size() != N) config_fail("initial state size does not match N");
            lattice::LatticeSpec spec = lattice::make_lattice_spec(N, m, b, pot);
            sys.h = lattice::build_lattice_hamiltonian(spec);
            sys.lattice_spec = std::move(spec);
            break;
        }
        case Scenario::Kind::circuit: {
            circuit::CircuitSpec spec;
            if (j.contains("quadratic")) {
                const json& q = j.at("quadratic");
                spec = circuit::make_linear_circuit(as_number(require_field(q, "L"), "L"),
                                                    as_number(require_field(q, "C0"), "C0"));
            } else {
                spec = circuit::make_log_capacitor_circuit(
                    as_number(require_field(j, "L"), "L"),
                    as_number(require_field(j, "Q0"), "Q0"),
                    as_number(require_field(j, "V0"), "V0"));
            }
            sys.h = circuit::circuit_hamiltonian(spec);
            sys.circuit_spec = std::move(spec);
            break;
        }
    }
    return sys;
}

dynamics::Trajectory simulate(const Scenario& s, const BuiltSystem& sys) {
    log::info("simulating " + kind_name(s.kind) + " scenario: dt = " +
              io::format_double(s.dt) + ", steps = " + std::to_string(s.steps));
    return dynamics::integrate(sys.h, s.q0, s.p0, s.dt, s.steps, s.t0);
}

std::vector<dynamics::VerificationReport> run_verifications(const Scenario& s,
                                                            const BuiltSystem& sys,
                                                            const dynamics::Trajectory& traj) {
    std::vector<dynamics::VerificationReport> reports;
    std::optional<convex::QuadraticForm> hK_override;
    if (s.hK_override) hK_override = convex::QuadraticForm(*s.hK_override);

    for (const TheoremId id : s.verifications) {
        std::optional<double> tol;
        if (const auto it = s.tolerance_overrides.find(id); it != s.tolerance_overrides.end())
            tol = it->second;
        dynamics::VerificationReport r;
        switch (id) {
            case TheoremId::thm_2_1: {
                const convex::QuadraticForm& hK =
                    hK_override ? *hK_override : sys.h.K.quadratic_form();
                r = dynamics::verify_thm_2_1(traj, sys.h, hK, tol);
                break;
            }
            case TheoremId::thm_2_2:
                r = dynamics::verify_thm_2_2(traj, sys.h, hK_override, tol);
                break;
            case TheoremId::prop_2_3:
            case TheoremId::prop_2_4:
                r = dynamics::verify_alpha_forms(traj, sys.h, hK_override, tol);
                break;
            case TheoremId::prop_2_5:
                r = dynamics::verify_vanishing_potential(traj, sys.h, tol);
                break;
            case TheoremId::j_function:
                r = dynamics::verify_j_function(traj, sys.h, tol);
                break;
            case TheoremId::dual_first_order:
                r = dynamics::verify_dual_first_order(traj, sys.h, tol);
                break;
            case TheoremId::toda_dual:
                r = lattice::verify_dual_lattice(traj, *sys.lattice_spec, tol);
                break;
            case TheoremId::tau:
                r = lattice::tau_diagnostic(traj, *sys.lattice_spec, tol);
                break;
            case TheoremId::lc_3_1:
                r = circuit::verify_lc_thm_3_1(traj, *sys.circuit_spec, tol);
                break;
            case TheoremId::lc_3_2:
                r = circuit::verify_lc_thm_3_2(traj, *sys.circuit_spec, tol);
                break;
        }
        log::info("verification " + dynamics::theorem_id_name(r.theorem_id) +
                  (r.passed ? ": pass" : ": FAIL") +
                  " (max residual " + io::format_double(r.max_residual) + ", tolerance " +
                  io::format_double(r.tolerance) + ")");
        reports.push_back(std::move(r));
    }
    return reports;
}

}  // namespace htoda::scenario
