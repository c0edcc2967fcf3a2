#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "htoda/convex.hpp"

namespace htoda::dynamics {

using convex::ConjugatePair;
using convex::QuadraticForm;
using convex::SeparableConvexFunction;

/// Strictly convex energy carried together with its convex conjugate.
/// Three kinds: a quadratic form, a separable sum of conjugate pairs, or
/// the identically-zero potential (whose conjugate is not a function).
class Energy {
public:
    enum class Kind { quadratic, separable, zero };

    Energy() = default;  // zero-dimensional placeholder
    static Energy quadratic(QuadraticForm form);
    static Energy separable(std::vector<ConjugatePair> pairs,
                            Eigen::VectorXd linear_offset = Eigen::VectorXd());
    static Energy zero(int n);

    Kind kind() const { return kind_; }
    int dim() const { return n_; }

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

    double dual_value(const Eigen::VectorXd& y) const;
    Eigen::VectorXd dual_gradient(const Eigen::VectorXd& y) const;
    Eigen::MatrixXd dual_hessian(const Eigen::VectorXd& y) const;

    bool in_domain(const Eigen::VectorXd& x) const;
    void require_in_domain(const Eigen::VectorXd& x, const std::string& label) const;
    void require_dual_in_domain(const Eigen::VectorXd& y, const std::string& label) const;

    /// Views used by the geometry layer; only valid for the matching kind.
    const QuadraticForm& quadratic_form() const;
    const QuadraticForm& dual_quadratic_form() const;
    const SeparableConvexFunction& separable_primal() const;
    const SeparableConvexFunction& separable_dual() const;
    const ConjugatePair& pair(int a) const;
    const Eigen::VectorXd& linear_offset() const { return offset_; }

private:
    void require_dual_available(const char* op) const;

    Kind kind_ = Kind::zero;
    int n_ = 0;
    QuadraticForm form_, dual_form_;
    std::vector<ConjugatePair> pairs_;
    SeparableConvexFunction primal_fn_, dual_fn_;
    Eigen::VectorXd offset_;
};

/// H(q, p) = K(p) + U(q) with K, U of equal dimension.
struct SeparableHamiltonian {
    Energy K;
    Energy U;

    int dim() const { return K.dim(); }
    double value(const Eigen::VectorXd& q, const Eigen::VectorXd& p) const {
        return K.value(p) + U.value(q);
    }
};

SeparableHamiltonian make_hamiltonian(Energy K, Energy U);

/// Uniformly sampled solution: rows are samples (steps + 1 of them).
/// Dual coordinates are recomputed from (q, p) on demand so that a
/// trajectory reloaded from its 17-digit text form reproduces them
/// bit for bit.
struct Trajectory {
    double t0 = 0.0;
    double dt = 0.0;
    long steps = 0;
    Eigen::MatrixXd q;  // (steps + 1) x n
    Eigen::MatrixXd p;

    long samples() const { return static_cast<long>(q.rows()); }
    int dim() const { return static_cast<int>(q.cols()); }
    double time_at(long k) const { return t0 + static_cast<double>(k) * dt; }

    /// q*_k = grad U(q_k) rowwise.
    Eigen::MatrixXd dual_q(const SeparableHamiltonian& h) const;
    /// p*_k = grad K(p_k) rowwise.
    Eigen::MatrixXd dual_p(const SeparableHamiltonian& h) const;
};

/// Stoermer-Verlet (kick-drift-kick) integration from (q0, p0).
/// Throws DomainError (annotated with the step index) if the state
/// leaves the convexity domain.
Trajectory integrate(const SeparableHamiltonian& h, const Eigen::VectorXd& q0,
                     const Eigen::VectorXd& p0, double dt, long steps, double t0 = 0.0);

enum class TheoremId {
    thm_2_1,
    thm_2_2,
    prop_2_3,
    prop_2_4,
    prop_2_5,
    j_function,
    dual_first_order,
    toda_dual,
    tau,
    lc_3_1,
    lc_3_2,
};

std::string theorem_id_name(TheoremId id);
TheoremId theorem_id_from_name(const std::string& name);  // ConfigError if unknown

struct VerificationReport {
    TheoremId theorem_id = TheoremId::thm_2_1;
    double max_residual = 0.0;
    double mean_residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string notes;
    /// Per-sample, per-component residuals (empty when not meaningful).
    Eigen::MatrixXd residual_series;
};

/// Discretization-scaled acceptance threshold: 50 * dt^2 * scale.
double residual_tolerance(double dt, double scale);

/// d/dt of U*'(q*) vs p* and of K*'(p*) vs -q* along the samples.
VerificationReport verify_dual_first_order(const Trajectory& traj, const SeparableHamiltonian& h,
                                           std::optional<double> tolerance_override = {});

/// d/dt [grad U*(-p-dot)] vs hK p + c for quadratic K.  hK is passed
/// explicitly so a deliberately wrong matrix can be injected.
VerificationReport verify_thm_2_1(const Trajectory& traj, const SeparableHamiltonian& h,
                                  const QuadraticForm& hK,
                                  std::optional<double> tolerance_override = {});

/// Second-order dual-coordinate equation: C qdot* qdot* + hU qddot* =
/// -hK q*, with metric and cubic from the geometry layer per sample.
VerificationReport verify_thm_2_2(const Trajectory& traj, const SeparableHamiltonian& h,
                                  std::optional<QuadraticForm> hK_override = {},
                                  std::optional<double> tolerance_override = {});

/// Geodesic-like alpha = -1 form (and the alpha = +1 form when U is
/// quadratic, in which case both coincide with the linear equation).
VerificationReport verify_alpha_forms(const Trajectory& traj, const SeparableHamiltonian& h,
                                      std::optional<QuadraticForm> hK_override = {},
                                      std::optional<double> tolerance_override = {});

/// With U identically zero: p and p* constant to near machine precision,
/// q affine in t.  The report residual is normalized (tolerance 1).
VerificationReport verify_vanishing_potential(const Trajectory& traj,
                                              const SeparableHamiltonian& h,
                                              std::optional<double> tolerance_override = {});

/// Generating-function value J(p*, -q*) = -(K*(p*) + U*(q*)).
double j_function(const SeparableHamiltonian& h, const Eigen::VectorXd& p_star,
                  const Eigen::VectorXd& q_star);

/// Finite-difference check of dJ/dp* = -p and dJ/dq* = -q at up to 50
/// states sampled along the trajectory.
VerificationReport verify_j_function(const Trajectory& traj, const SeparableHamiltonian& h,
                                     std::optional<double> tolerance_override = {});

}  // namespace htoda::dynamics
