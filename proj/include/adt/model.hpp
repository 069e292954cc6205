#ifndef ADT_MODEL_HPP
#define ADT_MODEL_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace adt {

// ----------------------------------------------------------------------------
// Degradation model description
//
// Each system component degrades along a linear mixed-effects path
//   y_ij = f(x_i, t_j)' (beta + gamma_i) + eps_ij
// where f is a list of monomials in the stress variables x and time t, the
// random effects gamma act on a pure-time sub-basis g(t), and eps is iid
// measurement error.  All matrices downstream (fixed design F, random design
// G, per-unit covariance V) are built from this declarative description.
// ----------------------------------------------------------------------------

// One regression term: prod_j x_j^stress_exponents[j] * t^time_exponent.
struct Monomial {
    std::vector<int> stress_exponents;
    int time_exponent = 0;

    bool operator==(const Monomial& other) const {
        return stress_exponents == other.stress_exponents &&
               time_exponent == other.time_exponent;
    }
};

// One degradation component: its regression basis, random-effects structure,
// nominal coefficients and failure threshold.
struct ComponentSpec {
    std::vector<Monomial> fixed_basis;          // f(x,t), length p
    std::vector<int> random_time_exponents;     // g(t) = (t^e_1, ..., t^e_q)
    Eigen::MatrixXd random_effects_covariance;  // q x q symmetric positive definite
    Eigen::VectorXd coefficients;               // nominal values, length p
    double threshold = 0.0;                     // critical degradation level
    std::optional<double> error_variance;       // overrides the shared value if set
};

struct Interval {
    double lower = 0.0;
    double upper = 1.0;
};

// Full problem description for an s-out-of-r system observed under a common
// time plan.  The time plan is input data and is never optimized.
struct ModelSpec {
    std::vector<ComponentSpec> components;  // r >= 1
    double error_variance = 0.0;            // shared measurement-error variance
    Eigen::VectorXd time_plan;              // strictly increasing, first entry >= 0
    int stress_dim = 0;                     // number of stress variables d
    std::vector<Interval> design_region;    // closed box, default [0,1]^d
    Eigen::VectorXd use_condition;          // x_u; may lie outside the region
    int required_failures = 1;              // s: system fails once s components fail
    double quantile_level = 0.5;            // level of the target failure-time quantile
    double bracket_horizon = 1e6;           // search horizon for the quantile solver

    int component_count() const { return static_cast<int>(components.size()); }

    // Measurement-error variance effective for component l (per-component
    // override, falling back to the shared value).
    double component_error_variance(int l) const {
        return components[static_cast<size_t>(l)].error_variance.value_or(error_variance);
    }
};

// Bundle of the matrices describing one component at one stress setting.
struct DesignMatrices {
    Eigen::MatrixXd fixed;       // k x p, row j = f(x, t_j)
    Eigen::MatrixXd random;      // k x q, row j = g(t_j)
    Eigen::MatrixXd covariance;  // k x k, G Sigma G' + error_variance I
};

// ----------------------------------------------------------------------------
// Matrix builders
// ----------------------------------------------------------------------------

// Evaluates every basis monomial at stress x and time t.
Eigen::VectorXd eval_basis(const std::vector<Monomial>& basis,
                           const Eigen::VectorXd& x, double t);

// k x p matrix with row j = f(x, t_j).
Eigen::MatrixXd fixed_design_matrix(const ComponentSpec& component,
                                    const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& time_plan);

// k x q matrix with row j = (t_j^e_1, ..., t_j^e_q).
Eigen::MatrixXd random_design_matrix(const ComponentSpec& component,
                                     const Eigen::VectorXd& time_plan);

// Per-unit covariance V = G Sigma G' + error_variance I (k x k).
Eigen::MatrixXd unit_covariance(const ComponentSpec& component,
                                const Eigen::VectorXd& time_plan,
                                double error_variance);

// All three matrices for component l at stress x.
DesignMatrices component_matrices(const ModelSpec& spec, int l,
                                  const Eigen::VectorXd& x);

// ----------------------------------------------------------------------------
// Validation
// ----------------------------------------------------------------------------

// Checks every model invariant and returns the complete list of violations
// (empty when the spec is valid).  Each message starts with a stable tag:
//   SpanViolation      - some random-effects power t^e has no pure-time
//                        counterpart in the fixed basis
//   NotPositiveDefinite- random-effects covariance fails the eigenvalue test
//                        (smallest > 1e-10 x largest) or is asymmetric
//   BadTimePlan        - time plan empty, negative start, or not increasing
//   BadSystemOrder     - required_failures outside [1, r]
// plus dimension/sign checks tagged ValidationError.
std::vector<std::string> validate_system(const ModelSpec& spec);

// Returns the spec unchanged if valid, otherwise throws ValidationError with
// all violations joined.
const ModelSpec& ensure_valid(const ModelSpec& spec);

}  // namespace adt

#endif
