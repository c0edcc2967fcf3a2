#include "htoda/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "htoda/errors.hpp"
#include "htoda/geometry.hpp"
#include "htoda/numeric.hpp"

namespace htoda::dynamics {

namespace {

using convex::ConvexScalarFunction;
using convex::Domain;
using num::Fn;

void check_dim(Eigen::Index got, Eigen::Index want, const char* what) {
    if (got != want) {
        std::ostringstream os;
        os << what << ": dimension " << got << " does not match " << want;
        throw ParameterError(os.str());
    }
}

/// f composed with y -> y - c (domain translated accordingly).
ConvexScalarFunction shift_arg(const ConvexScalarFunction& f, double c) {
    if (c == 0.0) return f;
    Domain d = f.domain();
    d.lo += c;
    d.hi += c;
    for (double& p : d.punctures) p += c;
    const Fn e = f.raw_eval(), g1 = f.raw_d1(), g2 = f.raw_d2(), g3 = f.raw_d3();
    return ConvexScalarFunction(
        d, [e, c](double y) { return e(y - c); }, [g1, c](double y) { return g1(y - c); },
        [g2, c](double y) { return g2(y - c); }, [g3, c](double y) { return g3(y - c); },
        f.label() + "(shifted)");
}

}  // namespace

Energy Energy::quadratic(QuadraticForm form) {
    form.require_positive_definite();
    Energy e;
    e.kind_ = Kind::quadratic;
    e.n_ = form.dim();
    e.dual_form_ = form.conjugate();
    e.form_ = std::move(form);
    e.offset_ = Eigen::VectorXd::Zero(e.n_);
    return e;
}

Energy Energy::separable(std::vector<ConjugatePair> pairs, Eigen::VectorXd linear_offset) {
    if (pairs.empty()) throw ParameterError("separable energy: at least one component required");
    Energy e;
    e.kind_ = Kind::separable;
    e.n_ = static_cast<int>(pairs.size());
    if (linear_offset.size() != 0 && linear_offset.size() != e.n_)
        throw ParameterError("separable energy: linear offset dimension mismatch");
    e.offset_ = linear_offset.size() ? std::move(linear_offset) : Eigen::VectorXd::Zero(e.n_);
    std::vector<ConvexScalarFunction> prim, du;
    prim.reserve(pairs.size());
    du.reserve(pairs.size());
    for (int a = 0; a < e.n_; ++a) {
        prim.push_back(pairs[static_cast<size_t>(a)].primal);
        du.push_back(shift_arg(pairs[static_cast<size_t>(a)].dual, e.offset_[a]));
    }
    e.primal_fn_ = SeparableConvexFunction(std::move(prim), e.offset_);
    e.dual_fn_ = SeparableConvexFunction(std::move(du));
    e.pairs_ = std::move(pairs);
    return e;
}

Energy Energy::zero(int n) {
    if (n < 1) throw ParameterError("zero energy: dimension must be positive");
    Energy e;
    e.kind_ = Kind::zero;
    e.n_ = n;
    e.offset_ = Eigen::VectorXd::Zero(n);
    return e;
}

void Energy::require_dual_available(const char* op) const {
    if (kind_ == Kind::zero)
        throw HypothesisError(std::string(op) +
                              ": the zero energy has no conjugate side (its gradient image is a point)");
}

double Energy::value(const Eigen::VectorXd& x) const {
    check_dim(x.size(), n_, "energy value");
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::quadratic: return form_.value(x);
        case Kind::separable: return primal_fn_.value(x);
    }
    return 0.0;
}

Eigen::VectorXd Energy::gradient(const Eigen::VectorXd& x) const {
    check_dim(x.size(), n_, "energy gradient");
    switch (kind_) {
        case Kind::zero: return Eigen::VectorXd::Zero(n_);
        case Kind::quadratic: return form_.gradient(x);
        case Kind::separable: return primal_fn_.gradient(x);
    }
    return Eigen::VectorXd::Zero(n_);
}

Eigen::MatrixXd Energy::hessian(const Eigen::VectorXd& x) const {
    check_dim(x.size(), n_, "energy hessian");
    switch (kind_) {
        case Kind::zero: return Eigen::MatrixXd::Zero(n_, n_);
        case Kind::quadratic: return form_.matrix();
        case Kind::separable: return Eigen::MatrixXd(primal_fn_.hessian_diag(x).asDiagonal());
    }
    return Eigen::MatrixXd::Zero(n_, n_);
}

double Energy::dual_value(const Eigen::VectorXd& y) const {
    check_dim(y.size(), n_, "energy dual value");
    require_dual_available("dual value");
    return kind_ == Kind::quadratic ? dual_form_.value(y) : dual_fn_.value(y);
}

Eigen::VectorXd Energy::dual_gradient(const Eigen::VectorXd& y) const {
    check_dim(y.size(), n_, "energy dual gradient");
    require_dual_available("dual gradient");
    return kind_ == Kind::quadratic ? dual_form_.gradient(y) : dual_fn_.gradient(y);
}

Eigen::MatrixXd Energy::dual_hessian(const Eigen::VectorXd& y) const {
    check_dim(y.size(), n_, "energy dual hessian");
    require_dual_available("dual hessian");
    return kind_ == Kind::quadratic
               ? dual_form_.matrix()
               : Eigen::MatrixXd(dual_fn_.hessian_diag(y).asDiagonal());
}

bool Energy::in_domain(const Eigen::VectorXd& x) const {
    if (x.size() != n_) return false;
    return kind_ == Kind::separable ? primal_fn_.in_domain(x) : true;
}

void Energy::require_in_domain(const Eigen::VectorXd& x, const std::string& label) const {
    check_dim(x.size(), n_, "energy domain check");
    if (kind_ == Kind::separable) primal_fn_.require_in_domain(x, label);
}

void Energy::require_dual_in_domain(const Eigen::VectorXd& y, const std::string& label) const {
    check_dim(y.size(), n_, "energy dual domain check");
    require_dual_available("dual domain check");
    if (kind_ == Kind::separable) dual_fn_.require_in_domain(y, label);
}

const QuadraticForm& Energy::quadratic_form() const {
    if (kind_ != Kind::quadratic) throw ParameterError("energy is not quadratic");
    return form_;
}

const QuadraticForm& Energy::dual_quadratic_form() const {
    if (kind_ != Kind::quadratic) throw ParameterError("energy is not quadratic");
    return dual_form_;
}

const SeparableConvexFunction& Energy::separable_primal() const {
    if (kind_ != Kind::separable) throw ParameterError("energy is not separable");
    return primal_fn_;
}

const SeparableConvexFunction& Energy::separable_dual() const {
    if (kind_ != Kind::separable) throw ParameterError("energy is not separable");
    return dual_fn_;
}

const ConjugatePair& Energy::pair(int a) const {
    if (kind_ != Kind::separable) throw ParameterError("energy is not separable");
    return pairs_.at(static_cast<size_t>(a));
}

SeparableHamiltonian make_hamiltonian(Energy K, Energy U) {
    if (K.dim() != U.dim())
        throw ParameterError("hamiltonian: kinetic and potential dimensions differ");
    return SeparableHamiltonian{std::move(K), std::move(U)};
}

Eigen::MatrixXd Trajectory::dual_q(const SeparableHamiltonian& h) const {
    Eigen::MatrixXd out(q.rows(), q.cols());
    for (Eigen::Index k = 0; k < q.rows(); ++k)
        out.row(k) = h.U.gradient(q.row(k).transpose()).transpose();
    return out;
}

Eigen::MatrixXd Trajectory::dual_p(const SeparableHamiltonian& h) const {
    Eigen::MatrixXd out(p.rows(), p.cols());
    for (Eigen::Index k = 0; k < p.rows(); ++k)
        out.row(k) = h.K.gradient(p.row(k).transpose()).transpose();
    return out;
}

Trajectory integrate(const SeparableHamiltonian& h, const Eigen::VectorXd& q0,
                     const Eigen::VectorXd& p0, double dt, long steps, double t0) {
    const int n = h.dim();
    check_dim(q0.size(), n, "integrate q0");
    check_dim(p0.size(), n, "integrate p0");
    if (!(dt > 0)) throw ParameterError("integrate: dt must be positive");
    if (steps < 1) throw ParameterError("integrate: steps must be at least 1");
    h.U.require_in_domain(q0, "initial q");
    h.K.require_in_domain(p0, "initial p");

    Trajectory traj;
    traj.t0 = t0;
    traj.dt = dt;
    traj.steps = steps;
    traj.q.resize(steps + 1, n);
    traj.p.resize(steps + 1, n);
    Eigen::VectorXd q = q0, p = p0;
    traj.q.row(0) = q.transpose();
    traj.p.row(0) = p.transpose();
    for (long k = 1; k <= steps; ++k) {
        try {
            p -= 0.5 * dt * h.U.gradient(q);
            q += dt * h.K.gradient(p);
            p -= 0.5 * dt * h.U.gradient(q);
        } catch (const DomainError& e) {
            throw DomainError("integration step " + std::to_string(k) + ": " + e.what());
        }
        traj.q.row(k) = q.transpose();
        traj.p.row(k) = p.transpose();
    }
    return traj;
}

std::string theorem_id_name(TheoremId id) {
    switch (id) {
        case TheoremId::thm_2_1: return "thm_2_1";
        case TheoremId::thm_2_2: return "thm_2_2";
        case TheoremId::prop_2_3: return "prop_2_3";
        case TheoremId::prop_2_4: return "prop_2_4";
        case TheoremId::prop_2_5: return "prop_2_5";
        case TheoremId::j_function: return "j_function";
        case TheoremId::dual_first_order: return "dual_first_order";
        case TheoremId::toda_dual: return "toda_dual";
        case TheoremId::tau: return "tau";
        case TheoremId::lc_3_1: return "lc_3_1";
        case TheoremId::lc_3_2: return "lc_3_2";
    }
    return "?";
}

TheoremId theorem_id_from_name(const std::string& name) {
    static const std::pair<const char*, TheoremId> table[] = {
        {"thm_2_1", TheoremId::thm_2_1},
        {"thm_2_2", TheoremId::thm_2_2},
        {"prop_2_3", TheoremId::prop_2_3},
        {"prop_2_4", TheoremId::prop_2_4},
        {"prop_2_5", TheoremId::prop_2_5},
        {"j_function", TheoremId::j_function},
        {"dual_first_order", TheoremId::dual_first_order},
        {"toda_dual", TheoremId::toda_dual},
        {"tau", TheoremId::tau},
        {"lc_3_1", TheoremId::lc_3_1},
        {"lc_3_2", TheoremId::lc_3_2},
    };
    for (const auto& [n, id] : table)
        if (name == n) return id;
    throw ConfigError("unknown verification id: " + name);
}

double residual_tolerance(double dt, double scale) { return 50.0 * dt * dt * scale; }

namespace {

VerificationReport finish_report(TheoremId id, Eigen::MatrixXd resid, double tol,
                                 std::string notes) {
    VerificationReport r;
    r.theorem_id = id;
    r.residual_series = std::move(resid);
    if (r.residual_series.size()) {
        r.max_residual = r.residual_series.cwiseAbs().maxCoeff();
        r.mean_residual = r.residual_series.cwiseAbs().mean();
    }
    r.tolerance = tol;
    r.passed = r.max_residual <= tol;
    r.notes = std::move(notes);
    return r;
}

double series_scale(const Eigen::MatrixXd& m) {
    return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

void require_quadratic_K(const SeparableHamiltonian& h, const char* op) {
    if (h.K.kind() != Energy::Kind::quadratic)
        throw HypothesisError(std::string(op) + ": kinetic energy must be quadratic");
}

void require_convex_U(const SeparableHamiltonian& h, const char* op) {
    if (h.U.kind() == Energy::Kind::zero)
        throw HypothesisError(std::string(op) + ": potential must be strictly convex, not zero");
}

}  // namespace

VerificationReport verify_dual_first_order(const Trajectory& traj, const SeparableHamiltonian& h,
                                           std::optional<double> tolerance_override) {
    const long m = traj.samples();
    const int n = traj.dim();
    check_dim(n, h.dim(), "verify_dual_first_order");
    if (m < 3) throw GridError("verify_dual_first_order: at least 3 samples required");

    const bool have_u = h.U.kind() != Energy::Kind::zero;
    const bool have_k = h.K.kind() != Energy::Kind::zero;
    Eigen::MatrixXd resid(m, (have_u ? n : 0) + (have_k ? n : 0));
    double scale = 0.0;
    std::string notes;
    int col = 0;
    if (have_u) {
        const Eigen::MatrixXd qs = traj.dual_q(h);
        const Eigen::MatrixXd ps = traj.dual_p(h);
        Eigen::MatrixXd g(m, n);
        for (long k = 0; k < m; ++k)
            g.row(k) = h.U.dual_gradient(qs.row(k).transpose()).transpose();
        const Eigen::MatrixXd dg = num::grid_d1(g, traj.dt);
        resid.middleCols(col, n) = dg - ps;
        scale = std::max(scale, series_scale(dg));
        notes += "d/dt[grad U*(q*)] vs p*";
        col += n;
    }
    if (have_k) {
        const Eigen::MatrixXd ps = traj.dual_p(h);
        const Eigen::MatrixXd qs = traj.dual_q(h);
        Eigen::MatrixXd g(m, n);
        for (long k = 0; k < m; ++k)
            g.row(k) = h.K.dual_gradient(ps.row(k).transpose()).transpose();
        const Eigen::MatrixXd dg = num::grid_d1(g, traj.dt);
        resid.middleCols(col, n) = dg + qs;
        scale = std::max(scale, series_scale(dg));
        if (!notes.empty()) notes += "; ";
        notes += "d/dt[grad K*(p*)] vs -q*";
    }
    const double tol = tolerance_override.value_or(residual_tolerance(traj.dt, scale));
    return finish_report(TheoremId::dual_first_order, std::move(resid), tol, std::move(notes));
}

VerificationReport verify_thm_2_1(const Trajectory& traj, const SeparableHamiltonian& h,
                                  const QuadraticForm& hK,
                                  std::optional<double> tolerance_override) {
    require_quadratic_K(h, "verify_thm_2_1");
    require_convex_U(h, "verify_thm_2_1");
    const long m = traj.samples();
    const int n = traj.dim();
    check_dim(hK.dim(), n, "verify_thm_2_1 hK");
    if (m < 4) throw GridError("verify_thm_2_1: at least 4 samples required");

    const Eigen::MatrixXd pdot = num::grid_d1(traj.p, traj.dt);
    Eigen::MatrixXd g(m, n);
    for (long k = 0; k < m; ++k)
        g.row(k) = h.U.dual_gradient(-pdot.row(k).transpose()).transpose();
    // The second pass must not read the end rows of g: their one-sided
    // p-dot error divided by dt again would cost an order.
    const Eigen::MatrixXd dg = num::grid_d1_inner(g, traj.dt);
    Eigen::MatrixXd resid(m, n);
    for (long k = 0; k < m; ++k)
        resid.row(k) = dg.row(k) - hK.gradient(traj.p.row(k).transpose()).transpose();
    const double scale = series_scale(dg);
    const double tol = tolerance_override.value_or(residual_tolerance(traj.dt, scale));
    return finish_report(TheoremId::thm_2_1, std::move(resid), tol,
                         "d/dt[grad U*(-p-dot)] vs hK p + c");
}

namespace {

// Metric / cubic of the conjugate potential in dual coordinates,
// dispatched on the potential's kind.
Eigen::MatrixXd dual_metric_of(const Energy& u, const Eigen::VectorXd& y) {
    using geometry::CoordinateTag;
    using geometry::EnergyTag;
    if (u.kind() == Energy::Kind::separable)
        return geometry::metric_at(u.separable_dual(), y, CoordinateTag::dual,
                                   EnergyTag::potential)
            .g;
    return geometry::metric_at(u.dual_quadratic_form(), y, CoordinateTag::dual,
                               EnergyTag::potential)
        .g;
}

geometry::Tensor3 dual_cubic_of(const Energy& u, const Eigen::VectorXd& y) {
    using geometry::CoordinateTag;
    using geometry::EnergyTag;
    if (u.kind() == Energy::Kind::separable)
        return geometry::cubic_at(u.separable_dual(), y, CoordinateTag::dual,
                                  EnergyTag::potential)
            .c;
    return geometry::cubic_at(u.dual_quadratic_form(), y, CoordinateTag::dual,
                              EnergyTag::potential)
        .c;
}

Eigen::VectorXd contract_cubic(const geometry::Tensor3& c, const Eigen::VectorXd& v) {
    const int n = c.dim();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < n; ++a) {
        double s = 0.0;
        for (int b = 0; b < n; ++b)
            for (int d = 0; d < n; ++d) s += c(a, b, d) * v[b] * v[d];
        out[a] = s;
    }
    return out;
}

}  // namespace

VerificationReport verify_thm_2_2(const Trajectory& traj, const SeparableHamiltonian& h,
                                  std::optional<QuadraticForm> hK_override,
                                  std::optional<double> tolerance_override) {
    require_quadratic_K(h, "verify_thm_2_2");
    require_convex_U(h, "verify_thm_2_2");
    const long m = traj.samples();
    const int n = traj.dim();
    if (m < 4) throw GridError("verify_thm_2_2: at least 4 samples required");
    const QuadraticForm& hK = hK_override ? *hK_override : h.K.quadratic_form();
    check_dim(hK.dim(), n, "verify_thm_2_2 hK");

    const Eigen::MatrixXd qs = traj.dual_q(h);
    const Eigen::MatrixXd qs1 = num::grid_d1(qs, traj.dt);
    const Eigen::MatrixXd qs2 = num::grid_d2(qs, traj.dt);
    Eigen::MatrixXd resid(m, n);
    double scale = 0.0;
    for (long k = 0; k < m; ++k) {
        const Eigen::VectorXd y = qs.row(k).transpose();
        const Eigen::VectorXd v = qs1.row(k).transpose();
        const Eigen::VectorXd w = qs2.row(k).transpose();
        const Eigen::MatrixXd hU = dual_metric_of(h.U, y);
        const geometry::Tensor3 cub = dual_cubic_of(h.U, y);
        const Eigen::VectorXd lhs = contract_cubic(cub, v) + hU * w;
        scale = std::max(scale, lhs.cwiseAbs().maxCoeff());
        resid.row(k) = (lhs + hK.matrix() * y).transpose();
    }
    const double tol = tolerance_override.value_or(residual_tolerance(traj.dt, scale));
    return finish_report(TheoremId::thm_2_2, std::move(resid), tol,
                         "C[q*](qdot*, qdot*) + hU[q*] qddot* vs -hK q*");
}

VerificationReport verify_alpha_forms(const Trajectory& traj, const SeparableHamiltonian& h,
                                      std::optional<QuadraticForm> hK_override,
                                      std::optional<double> tolerance_override) {
    require_quadratic_K(h, "verify_alpha_forms");
    require_convex_U(h, "verify_alpha_forms");
    const long m = traj.samples();
    const int n = traj.dim();
    if (m < 4) throw GridError("verify_alpha_forms: at least 4 samples required");
    const QuadraticForm& hK = hK_override ? *hK_override : h.K.quadratic_form();
    check_dim(hK.dim(), n, "verify_alpha_forms hK");

    const bool u_quadratic = h.U.kind() == Energy::Kind::quadratic;
    const Eigen::MatrixXd qs = traj.dual_q(h);
    const Eigen::MatrixXd qs1 = num::grid_d1(qs, traj.dt);
    const Eigen::MatrixXd qs2 = num::grid_d2(qs, traj.dt);
    Eigen::MatrixXd resid(m, u_quadratic ? 2 * n : n);
    double scale = 0.0;
    for (long k = 0; k < m; ++k) {
        const Eigen::VectorXd y = qs.row(k).transpose();
        const Eigen::VectorXd v = qs1.row(k).transpose();
        const Eigen::VectorXd w = qs2.row(k).transpose();
        const Eigen::MatrixXd hU_lower = h.U.hessian(traj.q.row(k).transpose());
        const geometry::CubicComponents cub{dual_cubic_of(h.U, y), geometry::CoordinateTag::dual,
                                            geometry::EnergyTag::potential};
        const Eigen::VectorXd force = hK.matrix() * y;
        {
            const geometry::Tensor3 g = geometry::alpha_connection(cub, -1.0).gamma;
            const Eigen::VectorXd lhs = w + hU_lower * contract_cubic(g, v);
            scale = std::max(scale, lhs.cwiseAbs().maxCoeff());
            resid.block(k, 0, 1, n) = (lhs + hU_lower * force).transpose();
        }
        if (u_quadratic) {
            const geometry::Tensor3 g = geometry::alpha_connection(cub, 1.0).gamma;
            const Eigen::VectorXd lhs = w + hU_lower * contract_cubic(g, v);
            scale = std::max(scale, lhs.cwiseAbs().maxCoeff());
            resid.block(k, n, 1, n) = (lhs + hU_lower * force).transpose();
        }
    }
    const double tol = tolerance_override.value_or(residual_tolerance(traj.dt, scale));
    return finish_report(u_quadratic ? TheoremId::prop_2_4 : TheoremId::prop_2_3,
                         std::move(resid), tol,
                         u_quadratic ? "alpha = -1 and alpha = +1 forms (quadratic potential)"
                                     : "alpha = -1 form");
}

VerificationReport verify_vanishing_potential(const Trajectory& traj,
                                              const SeparableHamiltonian& h,
                                              std::optional<double> tolerance_override) {
    if (h.U.kind() != Energy::Kind::zero)
        throw HypothesisError("verify_vanishing_potential: potential must be identically zero");
    const long m = traj.samples();
    if (m < 2) throw GridError("verify_vanishing_potential: at least 2 samples required");

    const Eigen::MatrixXd ps = traj.dual_p(h);
    double dev_p = 0.0, dev_ps = 0.0, dev_aff = 0.0;
    for (long k = 0; k < m; ++k) {
        dev_p = std::max(dev_p, (traj.p.row(k) - traj.p.row(0)).cwiseAbs().maxCoeff());
        dev_ps = std::max(dev_ps, (ps.row(k) - ps.row(0)).cwiseAbs().maxCoeff());
        const Eigen::RowVectorXd affine =
            traj.q.row(0) + static_cast<double>(k) * traj.dt * ps.row(0);
        dev_aff = std::max(dev_aff, (traj.q.row(k) - affine).cwiseAbs().maxCoeff());
    }
    // Normalized: p and p* at 1e-13 absolute, the affine fit at 1e-10.
    const double norm = std::max({dev_p / 1e-13, dev_ps / 1e-13, dev_aff / 1e-10});
    VerificationReport r;
    r.theorem_id = TheoremId::prop_2_5;
    r.max_residual = norm;
    r.mean_residual = norm;
    r.tolerance = tolerance_override.value_or(1.0);
    r.passed = r.max_residual <= r.tolerance;
    std::ostringstream os;
    os << "normalized; raw: |p - p(0)| <= " << dev_p << ", |p* - p*(0)| <= " << dev_ps
       << ", affine deviation <= " << dev_aff;
    r.notes = os.str();
    return r;
}

double j_function(const SeparableHamiltonian& h, const Eigen::VectorXd& p_star,
                  const Eigen::VectorXd& q_star) {
    return -(h.K.dual_value(p_star) + h.U.dual_value(q_star));
}

VerificationReport verify_j_function(const Trajectory& traj, const SeparableHamiltonian& h,
                                     std::optional<double> tolerance_override) {
    require_convex_U(h, "verify_j_function");
    if (h.K.kind() == Energy::Kind::zero)
        throw HypothesisError("verify_j_function: kinetic energy must be strictly convex");
    const long m = traj.samples();
    const int n = traj.dim();
    const long count = std::min<long>(50, m);
    const Eigen::MatrixXd qs = traj.dual_q(h);
    const Eigen::MatrixXd ps = traj.dual_p(h);

    Eigen::MatrixXd resid(count, 2 * n);
    for (long i = 0; i < count; ++i) {
        const long k = (count == 1) ? 0 : i * (m - 1) / (count - 1);
        Eigen::VectorXd pv = ps.row(k).transpose();
        Eigen::VectorXd qv = qs.row(k).transpose();
        for (int a = 0; a < n; ++a) {
            const double hp = num::fd_step(pv[a]);
            const double save_p = pv[a];
            pv[a] = save_p + hp;
            const double jp = j_function(h, pv, qv);
            pv[a] = save_p - hp;
            const double jm = j_function(h, pv, qv);
            pv[a] = save_p;
            resid(i, a) = (jp - jm) / (2 * hp) + traj.p(k, a);

            const double hq = num::fd_step(qv[a]);
            const double save_q = qv[a];
            qv[a] = save_q + hq;
            const double jqp = j_function(h, pv, qv);
            qv[a] = save_q - hq;
            const double jqm = j_function(h, pv, qv);
            qv[a] = save_q;
            resid(i, n + a) = (jqp - jqm) / (2 * hq) + traj.q(k, a);
        }
    }
    const double tol = tolerance_override.value_or(1e-6);
    return finish_report(TheoremId::j_function, std::move(resid), tol,
                         "dJ/dp* vs -p and dJ/dq* vs -q by central differences");
}

}  // namespace htoda::dynamics
