#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "htoda/errors.hpp"
#include "htoda/io.hpp"
#include "htoda/lattice.hpp"
#include "htoda/log.hpp"
#include "htoda/scenario.hpp"

namespace {

using htoda::ConfigError;
using nlohmann::json;
namespace dyn = htoda::dynamics;
namespace geo = htoda::geometry;
namespace io = htoda::io;
namespace lat = htoda::lattice;
namespace scn = htoda::scenario;

std::vector<double> parse_number_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(std::string(what) + ": bad number '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
    return out;
}

json parse_inline_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        if (!content.empty() && content.back() != '\n') std::cout << "\n";
    } else {
        io::write_file_atomic(out_path, content);
        std::cout << "wrote " << out_path << "\n";
    }
}

struct CommonOpts {
    std::string scenario_path;
    std::string out_path;
    std::string format;
    double dt_override = 0.0;
    bool has_dt_override = false;
    double tolerance_override = 0.0;
    bool has_tolerance_override = false;
    std::string trajectory_path;
};

scn::Scenario load_with_overrides(const CommonOpts& opts) {
    scn::Scenario s = scn::load_scenario_file(opts.scenario_path);
    if (opts.has_dt_override) {
        if (!(opts.dt_override > 0)) throw ConfigError("--dt-override must be positive");
        s.dt = opts.dt_override;
    }
    if (opts.has_tolerance_override) {
        if (!(opts.tolerance_override > 0))
            throw ConfigError("--tolerance-override must be positive");
        for (const dyn::TheoremId id : s.verifications)
            s.tolerance_overrides[id] = opts.tolerance_override;
    }
    return s;
}

int cmd_simulate(const CommonOpts& opts) {
    const scn::Scenario s = load_with_overrides(opts);
    const scn::BuiltSystem sys = scn::build_system(s);
    const dyn::Trajectory traj = scn::simulate(s, sys);

    std::string out = opts.out_path;
    if (out.empty()) out = s.trajectory_out;
    if (out.empty()) out = opts.format == "json" ? "trajectory.json" : "trajectory.csv";

    std::string content;
    if (opts.format == "json") {
        content = io::trajectory_to_json(traj, sys.h).dump(2) + "\n";
    } else if (sys.kind == scn::Scenario::Kind::circuit) {
        content = io::circuit_csv(traj, *sys.circuit_spec);
    } else {
        content = io::trajectory_csv(traj, sys.h);
    }
    io::write_file_atomic(out, content);
    std::cout << "wrote " << out << " (" << traj.samples() << " samples)\n";
    return 0;
}

int cmd_verify(const CommonOpts& opts) {
    const scn::Scenario s = load_with_overrides(opts);
    const scn::BuiltSystem sys = scn::build_system(s);
    if (s.verifications.empty()) throw ConfigError("scenario requests no verifications");

    dyn::Trajectory traj;
    if (!opts.trajectory_path.empty()) {
        traj = io::trajectory_from_csv(io::read_file(opts.trajectory_path));
        if (traj.dim() != s.q0.size())
            throw ConfigError("trajectory file dimension does not match the scenario");
        // The scenario remains the authority on the grid so that reloaded
        // trajectories reproduce in-process residuals bit for bit.
        traj.t0 = s.t0;
        traj.dt = s.dt;
    } else {
        traj = scn::simulate(s, sys);
    }

    const std::vector<dyn::VerificationReport> reports = scn::run_verifications(s, sys, traj);

    std::string out = opts.out_path;
    if (out.empty()) out = s.report_out;
    if (out.empty()) out = opts.format == "csv" ? "report.csv" : "report.json";

    std::string content;
    if (opts.format == "csv") {
        std::ostringstream os;
        os << "theorem_id,max_residual,mean_residual,tolerance,passed\n";
        for (const auto& r : reports)
            os << dyn::theorem_id_name(r.theorem_id) << ',' << io::format_double(r.max_residual)
               << ',' << io::format_double(r.mean_residual) << ','
               << io::format_double(r.tolerance) << ',' << (r.passed ? "true" : "false") << "\n";
        content = os.str();
    } else {
        json arr = json::array();
        for (const auto& r : reports) arr.push_back(io::report_to_json(r));
        content = arr.dump(2) + "\n";
    }
    io::write_file_atomic(out, content);

    // Per-sample residual series (one file per verification).
    const std::string stem =
        out.size() > 5 && out.rfind(".json") == out.size() - 5 ? out.substr(0, out.size() - 5)
        : out.size() > 4 && out.rfind(".csv") == out.size() - 4 ? out.substr(0, out.size() - 4)
                                                                : out;
    for (const auto& r : reports)
        if (r.residual_series.rows() == traj.samples())
            io::write_file_atomic(stem + "_" + dyn::theorem_id_name(r.theorem_id) +
                                      "_residuals.csv",
                                  io::residual_csv(traj, r.residual_series));

    bool all_passed = true;
    for (const auto& r : reports) {
        std::cout << dyn::theorem_id_name(r.theorem_id) << ": " << (r.passed ? "PASS" : "FAIL")
                  << " max_residual=" << io::format_double(r.max_residual)
                  << " tolerance=" << io::format_double(r.tolerance) << "\n";
        all_passed = all_passed && r.passed;
    }
    std::cout << "report written to " << out << "\n";
    return all_passed ? 0 : 1;
}

htoda::convex::ConjugatePair potential_from_option(const std::string& text) {
    const json j = parse_inline_json(text, "--potential");
    // Reuse the scenario-level potential schema.
    json wrapper{{"kind", "lattice"},
                 {"N", 2},
                 {"dt", 1.0},
                 {"steps", 2},
                 {"initial", {{"q", {0.0, 0.0}}, {"p", {0.0, 0.0}}}},
                 {"potential", j}};
    const scn::Scenario s = scn::parse_scenario(wrapper);
    const scn::BuiltSystem sys = scn::build_system(s);
    return sys.h.U.pair(0);
}

int cmd_conjugate(const std::string& potential_text, const std::string& points_text,
                  const std::string& range_text, const std::string& side,
                  const std::string& out_path, const std::string& format) {
    htoda::convex::ConjugatePair pair = potential_from_option(potential_text);
    if (side == "dual") pair = pair.flipped();

    std::vector<double> xs;
    if (!points_text.empty()) {
        xs = parse_number_list(points_text, "--points");
    } else if (!range_text.empty()) {
        const std::vector<double> spec = [&] {
            std::vector<double> v;
            std::stringstream ss(range_text);
            std::string item;
            while (std::getline(ss, item, ':')) v.push_back(std::stod(item));
            return v;
        }();
        if (spec.size() != 3 || spec[2] < 2)
            throw ConfigError("--range must be lo:hi:count with count >= 2");
        const long count = static_cast<long>(spec[2]);
        for (long i = 0; i < count; ++i)
            xs.push_back(spec[0] + (spec[1] - spec[0]) * static_cast<double>(i) /
                                       static_cast<double>(count - 1));
    } else {
        throw ConfigError("conjugate needs --points or --range");
    }

    json rows = json::array();
    std::ostringstream os;
    os << "x,f,f_prime,y,fstar,fstar_prime,fenchel_gap\n";
    for (const double x : xs) {
        const double f = pair.primal.eval(x);
        const double fp = pair.primal.d1(x);
        const double fs = pair.dual.eval(fp);
        const double fsp = pair.dual.d1(fp);
        const double gap = f + fs - x * fp;
        os << io::format_double(x) << ',' << io::format_double(f) << ',' << io::format_double(fp)
           << ',' << io::format_double(fp) << ',' << io::format_double(fs) << ','
           << io::format_double(fsp) << ',' << io::format_double(gap) << "\n";
        rows.push_back(json{{"x", x},
                            {"f", f},
                            {"f_prime", fp},
                            {"y", fp},
                            {"fstar", fs},
                            {"fstar_prime", fsp},
                            {"fenchel_gap", gap}});
    }
    emit(out_path, format == "json" ? rows.dump(2) + "\n" : os.str());
    return 0;
}

int cmd_geometry(const std::string& potential_text, const std::string& point_text,
                 const std::string& side, const std::string& alphas_text,
                 const std::string& out_path) {
    const htoda::convex::ConjugatePair pair = potential_from_option(potential_text);
    const std::vector<double> pt = parse_number_list(point_text, "--point");
    const std::vector<double> alphas = parse_number_list(alphas_text, "--alphas");

    const htoda::convex::ConvexScalarFunction& side_fn =
        side == "primal" ? pair.primal : pair.dual;
    std::vector<htoda::convex::ConvexScalarFunction> parts(pt.size(), side_fn);
    const htoda::convex::SeparableConvexFunction f(std::move(parts));
    Eigen::VectorXd x(static_cast<Eigen::Index>(pt.size()));
    for (size_t i = 0; i < pt.size(); ++i) x[static_cast<Eigen::Index>(i)] = pt[i];

    const geo::GeometryReport report = geo::geometry_report(
        f, x, side == "primal" ? geo::CoordinateTag::primal : geo::CoordinateTag::dual,
        geo::EnergyTag::potential, alphas);
    emit(out_path, io::geometry_report_to_json(report).dump(2) + "\n");
    return 0;
}

int cmd_spectrum(int N, double mass, const std::string& boundary, const std::string& out_path) {
    const lat::ChainHessian chain =
        lat::chain_hessian(N, mass, lat::boundary_from_name(boundary));
    json j;
    j["N"] = chain.N;
    j["m"] = chain.m;
    j["boundary"] = lat::boundary_name(chain.boundary);
    json rows = json::array();
    for (int i = 0; i < chain.N; ++i) {
        json row = json::array();
        for (int k = 0; k < chain.N; ++k) row.push_back(chain.matrix(i, k));
        rows.push_back(std::move(row));
    }
    j["matrix"] = rows;
    json eig = json::array();
    for (int i = 0; i < chain.N; ++i) eig.push_back(chain.eigenvalues[i]);
    j["eigenvalues"] = eig;
    j["positive_definite"] = chain.positive_definite;
    emit(out_path, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Legendre-dual Hamiltonian lattice toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* sim = app.add_subcommand("simulate", "integrate a scenario and write the trajectory");
    sim->add_option("--scenario", opts.scenario_path, "scenario JSON file")->required();
    sim->add_option("--out", opts.out_path, "output file (default from the scenario)");
    sim->add_option("--dt-override", opts.dt_override, "replace the scenario time step")
        ->each([&](const std::string&) { opts.has_dt_override = true; });
    std::string sim_format = "csv";
    sim->add_option("--format", sim_format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* ver = app.add_subcommand("verify", "run the scenario's verifications");
    ver->add_option("--scenario", opts.scenario_path, "scenario JSON file")->required();
    ver->add_option("--trajectory", opts.trajectory_path,
                    "verify a previously written trajectory CSV instead of re-integrating");
    ver->add_option("--out", opts.out_path, "report file (default from the scenario)");
    ver->add_option("--dt-override", opts.dt_override, "replace the scenario time step")
        ->each([&](const std::string&) { opts.has_dt_override = true; });
    ver->add_option("--tolerance-override", opts.tolerance_override,
                    "absolute tolerance applied to every requested verification")
        ->each([&](const std::string&) { opts.has_tolerance_override = true; });
    std::string ver_format = "json";
    ver->add_option("--format", ver_format, "json | csv")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* con = app.add_subcommand("conjugate", "tabulate a potential and its conjugate");
    std::string potential_text, points_text, range_text, side = "primal", con_format = "csv";
    con->add_option("--potential", potential_text, "potential JSON, e.g. {\"kind\":\"toda\"}")
        ->required();
    con->add_option("--points", points_text, "comma-separated evaluation points");
    con->add_option("--range", range_text, "lo:hi:count evaluation grid");
    con->add_option("--side", side, "primal | dual")->check(CLI::IsMember({"primal", "dual"}));
    con->add_option("--out", opts.out_path, "output file (default stdout)");
    con->add_option("--format", con_format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* geo_cmd = app.add_subcommand("geometry", "metric, cubic and connections at a point");
    std::string point_text, geo_side = "dual", alphas_text = "-1,0,0.5,1";
    geo_cmd->add_option("--potential", potential_text, "potential JSON")->required();
    geo_cmd->add_option("--point", point_text, "comma-separated coordinates")->required();
    geo_cmd->add_option("--side", geo_side, "primal | dual")
        ->check(CLI::IsMember({"primal", "dual"}));
    geo_cmd->add_option("--alphas", alphas_text, "comma-separated connection parameters");
    geo_cmd->add_option("--out", opts.out_path, "output file (default stdout)");

    auto* spec_cmd = app.add_subcommand("spectrum", "chain curvature matrix and its spectrum");
    int N = 0;
    double mass = 1.0;
    std::string boundary = "fixed";
    spec_cmd->add_option("--N", N, "number of sites")->required();
    spec_cmd->add_option("--mass", mass, "site mass");
    spec_cmd->add_option("--boundary", boundary, "fixed | periodic")
        ->check(CLI::IsMember({"fixed", "periodic"}));
    spec_cmd->add_option("--out", opts.out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) {
            opts.format = sim_format;
            return cmd_simulate(opts);
        }
        if (ver->parsed()) {
            opts.format = ver_format;
            return cmd_verify(opts);
        }
        if (con->parsed())
            return cmd_conjugate(potential_text, points_text, range_text, side, opts.out_path,
                                 con_format);
        if (geo_cmd->parsed())
            return cmd_geometry(potential_text, point_text, geo_side, alphas_text, opts.out_path);
        if (spec_cmd->parsed()) return cmd_spectrum(N, mass, boundary, opts.out_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const htoda::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 70;
    }
    return 0;
}
