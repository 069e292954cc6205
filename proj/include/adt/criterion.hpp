#ifndef ADT_CRITERION_HPP
#define ADT_CRITERION_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "adt/failure.hpp"
#include "adt/model.hpp"

namespace adt {

// ----------------------------------------------------------------------------
// Design criterion
//
// An approximate design puts weights w_i on stress settings x_i.  Estimating
// the failure-time quantile t_alpha with maximum-likelihood coefficient
// estimates gives an asymptotic variance whose coefficient-dependent part is
//   Phi(design) = sum_l  c_l f_l(x_u,t_alpha)'  M_l(design)^{-1}  c_l f_l(x_u,t_alpha)
// with per-component information blocks
//   M_l(design) = sum_i w_i F_l(x_i)' V_l^{-1} F_l(x_i)
// and gradient constants c_l obtained from the implicit function theorem.
// The common positive factor (dF_T/dt)^{-2} is omitted from the criterion
// since it does not affect the minimizer; scaled_avar() reports the absolute
// variance for users who want it.
// ----------------------------------------------------------------------------

// Finite support with nonnegative weights summing to one.
struct ApproximateDesign {
    std::vector<Eigen::VectorXd> points;
    Eigen::VectorXd weights;

    int size() const { return static_cast<int>(points.size()); }
};

// Throws ValidationError unless weights are nonnegative and sum to 1 (1e-12),
// points all have the given dimension and are pairwise distinct.
void validate_design(const ApproximateDesign& design, int stress_dim);

// Everything the criterion needs that does not depend on the design: the
// quantile, the gradient vectors, and the per-component V^{-1}.
struct CriterionContext {
    ModelSpec spec;
    double quantile_time = 0.0;     // t_alpha under the nominal values
    bool degenerate_quantile = false;
    Eigen::VectorXd marginal_cdfs;  // F_l(t_alpha), length r
    Eigen::VectorXd c_constants;    // c_l, length r
    std::vector<Eigen::VectorXd> gradient_vectors;  // c_l * f_l(x_u, t_alpha)
    std::vector<Eigen::MatrixXd> v_inverse;         // per-component k x k
    double cdf_time_slope = 0.0;    // dF_T/dt at t_alpha (central difference)
};

// Validates the spec, solves the quantile, and assembles the context.  Throws
// ValidationError or QuantileUnattainable; a degenerate quantile (F_T(0)
// already >= alpha) is flagged in the context, not fatal.
CriterionContext make_criterion_context(const ModelSpec& spec);

// Gradient constants c_l = phi(h_l(t)) / sd_l(t) * dF_T/dF_l evaluated at the
// given time; c_l * f_lq(x_u, t) equals dF_T/d(coefficient lq) at fixed t.
Eigen::VectorXd c_constants(const FailureSystem& system, double quantile_time);

// LDLT factorization of a symmetric matrix with a definiteness and
// conditioning guard: all pivots positive, max/min pivot ratio and norm-based
// condition estimate within 1e12.  Throws SingularInformation naming `label`.
// Singularity is reported, never masked by regularization: a silent ridge
// would corrupt the equivalence certificate downstream.
Eigen::LDLT<Eigen::MatrixXd> guarded_ldlt(const Eigen::MatrixXd& matrix,
                                          const std::string& label);

// Information block M_l(design) = sum_i w_i F_l(x_i)' V_l^{-1} F_l(x_i).
Eigen::MatrixXd info_matrix_component(const CriterionContext& ctx,
                                      const ApproximateDesign& design, int l);

// Criterion value sum_l c_vec_l' M_l^{-1} c_vec_l.  Throws
// SingularInformation when any block is conditioned worse than 1e12.
double objective(const CriterionContext& ctx, const ApproximateDesign& design);

// Directional derivative mass at x:
//   d(x, design) = sum_l c_vec_l' M_l^{-1} F_l(x)' V_l^{-1} F_l(x) M_l^{-1} c_vec_l.
// At an optimal design its maximum over the region equals the objective.
double sensitivity(const CriterionContext& ctx, const ApproximateDesign& design,
                   const Eigen::VectorXd& x);

// Solutions u_l of M_l(design) u_l = c_vec_l for every component.  The
// objective is sum_l c_vec_l . u_l, and the sensitivity at x is
// sum_l ||...||: u_l' F_l(x)' V_l^{-1} F_l(x) u_l — scanning many points
// against one design should solve these systems once.
std::vector<Eigen::VectorXd> solve_gradient_systems(const CriterionContext& ctx,
                                                    const ApproximateDesign& design);

// Sensitivity at x reusing presolved gradient systems.
double sensitivity_from_solutions(const CriterionContext& ctx,
                                  const std::vector<Eigen::VectorXd>& solutions,
                                  const Eigen::VectorXd& x);

// Asymptotic-variance surrogate: the coefficient block only (the
// variance-parameter block is an additive design-independent constant with no
// computable form here and is treated as zero, making reported efficiencies
// lower bounds).  Equal to objective() by construction.
double avar(const CriterionContext& ctx, const ApproximateDesign& design);

// Absolute asymptotic variance of the quantile estimate:
// avar / (dF_T/dt)^2, using the context's finite-difference slope.
double scaled_avar(const CriterionContext& ctx, const ApproximateDesign& design);

// objective(optimal) / objective(design); 1 when design is optimal.  Ratios
// within 1e-6 above 1 (convergence noise in the reference) clamp to 1; larger
// ratios are returned as-is so callers can flag a non-optimal reference.
double efficiency(const CriterionContext& ctx, const ApproximateDesign& design,
                  const ApproximateDesign& optimal);

// Same, with the optimal criterion value supplied directly.  Lets callers
// rate designs against an optimum whose own support is rank-deficient (a
// legitimate c-optimal limit) but whose criterion value is known.
double efficiency(const CriterionContext& ctx, const ApproximateDesign& design,
                  double optimal_value);

// ----------------------------------------------------------------------------
// Factorized fast path
//
// When all components share one basis, one random-effects law and one error
// variance, and the fixed basis is the product of a pure-stress basis with
// the random-effects time powers, each information block factorizes as
//   M_l(design) = M1(design) (x) M2,   M1 = sum_i w_i f1(x_i) f1(x_i)',
//   M2 = G' V^{-1} G,
// and the criterion collapses to
//   (sum_l c_l^2 * g(t_alpha)' M2^{-1} g(t_alpha)) * f1(x_u)' M1^{-1} f1(x_u).
// ----------------------------------------------------------------------------

// Product-structure decomposition of the (shared) component basis.
struct BasisFactorization {
    std::vector<Monomial> stress_basis;  // pure-stress factors, length a
    std::vector<int> time_exponents;     // time factors = random-effects powers, length q
    // basis index of the pair (stress factor i, time factor m); the shared
    // fixed basis at position permutation[i*q + m] equals
    // stress_basis[i] * t^time_exponents[m].
    std::vector<int> permutation;
};

// Checks the preconditions above and returns the decomposition; throws
// PreconditionNotMet when components differ or the basis is not product type.
BasisFactorization factorize_basis(const ModelSpec& spec);

// Stress-marginal information M1(design), a x a.
Eigen::MatrixXd stress_info_matrix(const BasisFactorization& fact,
                                   const ApproximateDesign& design);

// Time-block information M2 = G' V^{-1} G, q x q.
Eigen::MatrixXd time_info_matrix(const CriterionContext& ctx);

// Criterion via the factorization; equals objective() to relative 1e-10
// whenever the preconditions hold.
double factorized_objective(const CriterionContext& ctx,
                            const ApproximateDesign& design);

}  // namespace adt

#endif
