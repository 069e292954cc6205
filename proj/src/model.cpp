#include "adt/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>

#include "adt/errors.hpp"

namespace adt {

namespace {

double int_pow(double base, int exponent) {
    double result = 1.0;
    for (int i = 0; i < exponent; ++i) result *= base;
    return result;
}

}  // namespace

Eigen::VectorXd eval_basis(const std::vector<Monomial>& basis,
                           const Eigen::VectorXd& x, double t) {
    Eigen::VectorXd values(static_cast<Eigen::Index>(basis.size()));
    for (size_t q = 0; q < basis.size(); ++q) {
        const Monomial& term = basis[q];
        if (static_cast<Eigen::Index>(term.stress_exponents.size()) != x.size()) {
            throw ValidationError("eval_basis: monomial stress dimension " +
                                  std::to_string(term.stress_exponents.size()) +
                                  " does not match point dimension " +
                                  std::to_string(x.size()));
        }
        double value = int_pow(t, term.time_exponent);
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            value *= int_pow(x[j], term.stress_exponents[static_cast<size_t>(j)]);
        }
        values[static_cast<Eigen::Index>(q)] = value;
    }
    return values;
}

Eigen::MatrixXd fixed_design_matrix(const ComponentSpec& component,
                                    const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& time_plan) {
    const Eigen::Index k = time_plan.size();
    Eigen::MatrixXd design(k, static_cast<Eigen::Index>(component.fixed_basis.size()));
    for (Eigen::Index j = 0; j < k; ++j) {
        design.row(j) = eval_basis(component.fixed_basis, x, time_plan[j]).transpose();
    }
    return design;
}

Eigen::MatrixXd random_design_matrix(const ComponentSpec& component,
                                     const Eigen::VectorXd& time_plan) {
    const Eigen::Index k = time_plan.size();
    const Eigen::Index q = static_cast<Eigen::Index>(component.random_time_exponents.size());
    Eigen::MatrixXd design(k, q);
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index m = 0; m < q; ++m) {
            design(j, m) =
                int_pow(time_plan[j], component.random_time_exponents[static_cast<size_t>(m)]);
        }
    }
    return design;
}

Eigen::MatrixXd unit_covariance(const ComponentSpec& component,
                                const Eigen::VectorXd& time_plan,
                                double error_variance) {
    const Eigen::MatrixXd random = random_design_matrix(component, time_plan);
    Eigen::MatrixXd covariance =
        random * component.random_effects_covariance * random.transpose();
    covariance.diagonal().array() += error_variance;
    // Symmetrize away roundoff so downstream factorizations see an exactly
    // symmetric matrix.
    covariance = ((covariance + covariance.transpose()) * 0.5).eval();
    return covariance;
}

DesignMatrices component_matrices(const ModelSpec& spec, int l,
                                  const Eigen::VectorXd& x) {
    const ComponentSpec& component = spec.components[static_cast<size_t>(l)];
    DesignMatrices matrices;
    matrices.fixed = fixed_design_matrix(component, x, spec.time_plan);
    matrices.random = random_design_matrix(component, spec.time_plan);
    matrices.covariance =
        unit_covariance(component, spec.time_plan, spec.component_error_variance(l));
    return matrices;
}

namespace {

void validate_component(const ModelSpec& spec, int l,
                        std::vector<std::string>& violations) {
    const ComponentSpec& component = spec.components[static_cast<size_t>(l)];
    const std::string where = "component " + std::to_string(l + 1);

    if (component.fixed_basis.empty()) {
        violations.push_back("ValidationError: " + where + ": fixed basis is empty");
    }
    for (size_t q = 0; q < component.fixed_basis.size(); ++q) {
        const Monomial& term = component.fixed_basis[q];
        if (static_cast<int>(term.stress_exponents.size()) != spec.stress_dim) {
            violations.push_back("ValidationError: " + where + ": basis term " +
                                 std::to_string(q + 1) + " has " +
                                 std::to_string(term.stress_exponents.size()) +
                                 " stress exponents, expected " +
                                 std::to_string(spec.stress_dim));
        }
        if (term.time_exponent < 0 ||
            std::any_of(term.stress_exponents.begin(), term.stress_exponents.end(),
                        [](int e) { return e < 0; })) {
            violations.push_back("ValidationError: " + where + ": basis term " +
                                 std::to_string(q + 1) + " has a negative exponent");
        }
    }
    if (component.coefficients.size() !=
        static_cast<Eigen::Index>(component.fixed_basis.size())) {
        violations.push_back("ValidationError: " + where + ": " +
                             std::to_string(component.coefficients.size()) +
                             " coefficients for " +
                             std::to_string(component.fixed_basis.size()) +
                             " basis terms");
    }

    if (component.random_time_exponents.empty()) {
        violations.push_back("ValidationError: " + where +
                             ": random_time_exponents is empty");
    }
    if (std::any_of(component.random_time_exponents.begin(),
                    component.random_time_exponents.end(),
                    [](int e) { return e < 0; })) {
        violations.push_back("ValidationError: " + where +
                             ": negative random-effects time exponent");
    }

    // Span condition: every random-effects power t^e needs the pure-time
    // monomial t^e in the fixed basis, so the random part stays inside the
    // fixed regression space.
    for (int exponent : component.random_time_exponents) {
        const bool found = std::any_of(
            component.fixed_basis.begin(), component.fixed_basis.end(),
            [&](const Monomial& term) {
                return term.time_exponent == exponent &&
                       std::all_of(term.stress_exponents.begin(),
                                   term.stress_exponents.end(),
                                   [](int e) { return e == 0; });
            });
        if (!found) {
            violations.push_back("SpanViolation: " + where +
                                 ": fixed basis lacks the pure-time term t^" +
                                 std::to_string(exponent) +
                                 " required by the random effects");
        }
    }

    const Eigen::MatrixXd& sigma = component.random_effects_covariance;
    const Eigen::Index q = static_cast<Eigen::Index>(component.random_time_exponents.size());
    if (sigma.rows() != q || sigma.cols() != q) {
        violations.push_back("ValidationError: " + where +
                             ": sigma_gamma must be " + std::to_string(q) + "x" +
                             std::to_string(q));
    } else if (q > 0) {
        if (!sigma.isApprox(sigma.transpose(), 1e-12)) {
            violations.push_back("NotPositiveDefinite: " + where +
                                 ": sigma_gamma is not symmetric");
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(sigma);
            const double smallest = eigen.eigenvalues().minCoeff();
            const double largest = eigen.eigenvalues().maxCoeff();
            if (!(largest > 0.0) || !(smallest > 1e-10 * largest)) {
                violations.push_back("NotPositiveDefinite: " + where +
                                     ": sigma_gamma smallest eigenvalue " +
                                     std::to_string(smallest) +
                                     " fails the positive-definite test");
            }
        }
    }

    if (component.error_variance && !(*component.error_variance > 0.0)) {
        violations.push_back("ValidationError: " + where +
                             ": error_variance override must be positive");
    }
}

}  // namespace

std::vector<std::string> validate_system(const ModelSpec& spec) {
    std::vector<std::string> violations;

    if (spec.components.empty()) {
        violations.push_back("ValidationError: model needs at least one component");
    }
    if (spec.stress_dim < 1) {
        violations.push_back("ValidationError: stress_dim must be >= 1");
    }
    if (!(spec.error_variance > 0.0)) {
        violations.push_back("ValidationError: error_variance must be positive");
    }

    if (spec.time_plan.size() == 0) {
        violations.push_back("BadTimePlan: time plan is empty");
    } else {
        if (spec.time_plan[0] < 0.0) {
            violations.push_back("BadTimePlan: time plan starts before 0");
        }
        for (Eigen::Index j = 1; j < spec.time_plan.size(); ++j) {
            if (!(spec.time_plan[j] > spec.time_plan[j - 1])) {
                violations.push_back("BadTimePlan: time plan is not strictly increasing at entry " +
                                     std::to_string(j + 1));
                break;
            }
        }
    }

    const int r = spec.component_count();
    if (spec.required_failures < 1 || spec.required_failures > std::max(r, 1)) {
        violations.push_back("BadSystemOrder: system_s = " +
                             std::to_string(spec.required_failures) +
                             " must lie in [1, " + std::to_string(r) + "]");
    }

    if (!(spec.quantile_level > 0.0 && spec.quantile_level < 1.0)) {
        violations.push_back("ValidationError: alpha must lie strictly between 0 and 1");
    }
    if (!(spec.bracket_horizon > 0.0)) {
        violations.push_back("ValidationError: t_max must be positive");
    }

    if (static_cast<int>(spec.design_region.size()) != spec.stress_dim) {
        violations.push_back("ValidationError: design_region needs one interval per stress variable");
    } else {
        for (size_t j = 0; j < spec.design_region.size(); ++j) {
            if (!(spec.design_region[j].lower < spec.design_region[j].upper)) {
                violations.push_back("ValidationError: design_region interval " +
                                     std::to_string(j + 1) + " is empty");
            }
        }
    }
    if (spec.use_condition.size() != spec.stress_dim) {
        violations.push_back("ValidationError: use_condition must have length " +
                             std::to_string(spec.stress_dim));
    }

    for (int l = 0; l < r; ++l) validate_component(spec, l, violations);

    return violations;
}

const ModelSpec& ensure_valid(const ModelSpec& spec) {
    const std::vector<std::string> violations = validate_system(spec);
    if (!violations.empty()) {
        std::ostringstream message;
        message << "invalid model specification:";
        for (const std::string& violation : violations) message << "\n  " << violation;
        throw ValidationError(message.str());
    }
    return spec;
}

}  // namespace adt
