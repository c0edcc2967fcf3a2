#include "htoda/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "htoda/errors.hpp"

namespace htoda::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out.flush()) throw ConfigError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw ConfigError("rename failed for " + target.string() + ": " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string trajectory_csv(const dynamics::Trajectory& traj,
                           const dynamics::SeparableHamiltonian& h) {
    const int n = traj.dim();
    std::ostringstream os;
    os << "t";
    for (int a = 1; a <= n; ++a) os << ",q_" << a;
    for (int a = 1; a <= n; ++a) os << ",p_" << a;
    for (int a = 1; a <= n; ++a) os << ",qstar_" << a;
    for (int a = 1; a <= n; ++a) os << ",pstar_" << a;
    os << "\n";
    const Eigen::MatrixXd qs = traj.dual_q(h);
    const Eigen::MatrixXd ps = traj.dual_p(h);
    for (long k = 0; k < traj.samples(); ++k) {
        os << format_double(traj.time_at(k));
        for (int a = 0; a < n; ++a) os << ',' << format_double(traj.q(k, a));
        for (int a = 0; a < n; ++a) os << ',' << format_double(traj.p(k, a));
        for (int a = 0; a < n; ++a) os << ',' << format_double(qs(k, a));
        for (int a = 0; a < n; ++a) os << ',' << format_double(ps(k, a));
        os << "\n";
    }
    return os.str();
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, long row, size_t col) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        std::ostringstream os;
        os << "trajectory csv: bad number '" << s << "' at row " << row << ", column " << col;
        throw ConfigError(os.str());
    }
}

}  // namespace

dynamics::Trajectory trajectory_from_csv(const std::string& content) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("trajectory csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split(line, ',');
    if (header.empty() || header[0] != "t")
        throw ConfigError("trajectory csv: first column must be t");
    int n = 0;
    if (header.size() >= 3 && header[1] == "Q" && header[2] == "Phi") {
        // Circuit table: (Q, Phi) plays the role of (q_1, p_1); derived
        // columns after Phi are ignored.
        n = 1;
    } else {
        while (1 + n < static_cast<int>(header.size()) &&
               header[static_cast<size_t>(1 + n)] == "q_" + std::to_string(n + 1))
            ++n;
        if (n == 0) throw ConfigError("trajectory csv: no q_ columns found");
        if (static_cast<int>(header.size()) < 1 + 2 * n)
            throw ConfigError("trajectory csv: missing p_ columns");
        for (int a = 0; a < n; ++a)
            if (header[static_cast<size_t>(1 + n + a)] != "p_" + std::to_string(a + 1))
                throw ConfigError("trajectory csv: malformed p_ columns");
    }

    std::vector<std::vector<double>> rows;
    long row_idx = 0;
    while (std::getline(in, line)) {
        ++row_idx;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != header.size()) {
            std::ostringstream os;
            os << "trajectory csv: row " << row_idx << " has " << cells.size()
               << " cells, expected " << header.size();
            throw ConfigError(os.str());
        }
        std::vector<double> vals(1 + 2 * static_cast<size_t>(n));
        for (size_t c = 0; c < vals.size(); ++c) vals[c] = parse_double(cells[c], row_idx, c);
        rows.push_back(std::move(vals));
    }
    if (rows.size() < 2) throw ConfigError("trajectory csv: at least 2 samples required");

    dynamics::Trajectory traj;
    traj.t0 = rows[0][0];
    traj.dt = rows[1][0] - rows[0][0];
    traj.steps = static_cast<long>(rows.size()) - 1;
    traj.q.resize(static_cast<Eigen::Index>(rows.size()), n);
    traj.p.resize(static_cast<Eigen::Index>(rows.size()), n);
    for (size_t k = 0; k < rows.size(); ++k)
        for (int a = 0; a < n; ++a) {
            traj.q(static_cast<Eigen::Index>(k), a) = rows[k][static_cast<size_t>(1 + a)];
            traj.p(static_cast<Eigen::Index>(k), a) = rows[k][static_cast<size_t>(1 + n + a)];
        }
    return traj;
}

std::string circuit_csv(const dynamics::Trajectory& traj, const circuit::CircuitSpec& spec) {
    std::ostringstream os;
    os << "t,Q,Phi,V,I,energy\n";
    for (long k = 0; k < traj.samples(); ++k) {
        const double Q = traj.q(k, 0);
        const double Phi = traj.p(k, 0);
        const double V = circuit::voltage_of_charge(spec, Q);
        const double I = circuit::current_of_flux(spec, Phi);
        const double E = spec.EC_star.dual.eval(Q) + spec.EL_star.dual.eval(Phi);
        os << format_double(traj.time_at(k)) << ',' << format_double(Q) << ','
           << format_double(Phi) << ',' << format_double(V) << ',' << format_double(I) << ','
           << format_double(E) << "\n";
    }
    return os.str();
}

std::string residual_csv(const dynamics::Trajectory& traj, const Eigen::MatrixXd& series) {
    if (series.rows() != traj.samples())
        throw ParameterError("residual csv: series rows must match trajectory samples");
    std::ostringstream os;
    os << "t";
    for (Eigen::Index c = 1; c <= series.cols(); ++c) os << ",r_" << c;
    os << "\n";
    for (long k = 0; k < traj.samples(); ++k) {
        os << format_double(traj.time_at(k));
        for (Eigen::Index c = 0; c < series.cols(); ++c)
            os << ',' << format_double(series(k, c));
        os << "\n";
    }
    return os.str();
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json tensor_to_json(const geometry::Tensor3& t) {
    nlohmann::json out = nlohmann::json::array();
    for (int a = 0; a < t.dim(); ++a) {
        nlohmann::json plane = nlohmann::json::array();
        for (int b = 0; b < t.dim(); ++b) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < t.dim(); ++c) row.push_back(t(a, b, c));
            plane.push_back(std::move(row));
        }
        out.push_back(std::move(plane));
    }
    return out;
}

std::string alpha_key(double alpha) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", alpha);
    return buf;
}

}  // namespace

nlohmann::json report_to_json(const dynamics::VerificationReport& r) {
    return nlohmann::json{{"theorem_id", dynamics::theorem_id_name(r.theorem_id)},
                          {"max_residual", r.max_residual},
                          {"mean_residual", r.mean_residual},
                          {"tolerance", r.tolerance},
                          {"passed", r.passed},
                          {"notes", r.notes}};
}

nlohmann::json geometry_report_to_json(const geometry::GeometryReport& r) {
    nlohmann::json j;
    j["point"] = vector_to_json(r.point);
    j["coordinates"] = r.coordinate_tag == geometry::CoordinateTag::dual ? "dual" : "primal";
    j["metric"] = matrix_to_json(r.metric);
    j["inverse_metric"] = matrix_to_json(r.inverse_metric);
    j["cubic"] = tensor_to_json(r.cubic);
    nlohmann::json conns = nlohmann::json::object();
    for (const auto& [alpha, gamma] : r.connections) conns[alpha_key(alpha)] = tensor_to_json(gamma);
    j["connections"] = conns;
    if (r.eigenvalues) j["eigenvalues"] = vector_to_json(*r.eigenvalues);
    return j;
}

nlohmann::json trajectory_to_json(const dynamics::Trajectory& traj,
                                  const dynamics::SeparableHamiltonian& h) {
    nlohmann::json j;
    j["t0"] = traj.t0;
    j["dt"] = traj.dt;
    j["steps"] = traj.steps;
    nlohmann::json t = nlohmann::json::array();
    for (long k = 0; k < traj.samples(); ++k) t.push_back(traj.time_at(k));
    j["t"] = t;
    j["q"] = matrix_to_json(traj.q);
    j["p"] = matrix_to_json(traj.p);
    j["qstar"] = matrix_to_json(traj.dual_q(h));
    j["pstar"] = matrix_to_json(traj.dual_p(h));
    return j;
}

}  // namespace htoda::io
