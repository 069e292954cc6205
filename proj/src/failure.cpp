#include "adt/failure.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "adt/errors.hpp"

namespace adt {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double TimePolynomial::operator()(double t) const {
    double value = 0.0;
    for (Eigen::Index m = coefficients.size() - 1; m >= 0; --m) {
        value = value * t + coefficients[m];
    }
    return value;
}

int TimePolynomial::degree() const {
    for (Eigen::Index m = coefficients.size() - 1; m >= 0; --m) {
        if (coefficients[m] != 0.0) return static_cast<int>(m);
    }
    return 0;
}

TimePolynomial mean_path(const ModelSpec& spec, int l) {
    const ComponentSpec& component = spec.components[static_cast<size_t>(l)];
    int max_power = 0;
    for (const Monomial& term : component.fixed_basis) {
        max_power = std::max(max_power, term.time_exponent);
    }
    TimePolynomial poly{Eigen::VectorXd::Zero(max_power + 1)};
    // Collapse f(x_u, t)' beta over the stress coordinates: each basis term
    // contributes beta_q * prod_j x_u^e to the coefficient of its time power.
    for (size_t q = 0; q < component.fixed_basis.size(); ++q) {
        const Monomial& term = component.fixed_basis[q];
        double stress_factor = 1.0;
        for (Eigen::Index j = 0; j < spec.use_condition.size(); ++j) {
            for (int e = 0; e < term.stress_exponents[static_cast<size_t>(j)]; ++e) {
                stress_factor *= spec.use_condition[j];
            }
        }
        poly.coefficients[term.time_exponent] +=
            component.coefficients[static_cast<Eigen::Index>(q)] * stress_factor;
    }
    return poly;
}

TimePolynomial path_variance(const ModelSpec& spec, int l) {
    const ComponentSpec& component = spec.components[static_cast<size_t>(l)];
    const std::vector<int>& exponents = component.random_time_exponents;
    int max_power = 0;
    for (int e : exponents) max_power = std::max(max_power, e);
    TimePolynomial poly{Eigen::VectorXd::Zero(2 * max_power + 1)};
    // g(t)' Sigma g(t) = sum_{a,b} Sigma_ab t^{e_a + e_b}.
    for (size_t a = 0; a < exponents.size(); ++a) {
        for (size_t b = 0; b < exponents.size(); ++b) {
            poly.coefficients[exponents[a] + exponents[b]] +=
                component.random_effects_covariance(static_cast<Eigen::Index>(a),
                                                    static_cast<Eigen::Index>(b));
        }
    }
    return poly;
}

namespace {

double binomial(int n, int k) {
    double value = 1.0;
    for (int i = 1; i <= k; ++i) value = value * (n - k + i) / i;
    return value;
}

// Elementary symmetric polynomials e_0..e_n of the given values, via the
// coefficients of prod_i (1 + v_i z).
Eigen::VectorXd elementary_symmetric(const Eigen::VectorXd& values) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(values.size() + 1);
    e[0] = 1.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        for (Eigen::Index j = i + 1; j >= 1; --j) {
            e[j] += values[i] * e[j - 1];
        }
    }
    return e;
}

}  // namespace

double combine_failure_probabilities(const Eigen::VectorXd& marginals,
                                     int required_failures) {
    const int r = static_cast<int>(marginals.size());
    const int s = required_failures;
    if (s < 1 || s > r) {
        throw ValidationError("combine_failure_probabilities: order " +
                              std::to_string(s) + " outside [1, " +
                              std::to_string(r) + "]");
    }
    // P(at least s of r fail) as an alternating series in the elementary
    // symmetric polynomials of the marginal probabilities:
    //   sum_{m=0}^{r-s} (-1)^m C(s-1+m, m) e_{s+m}.
    const Eigen::VectorXd e = elementary_symmetric(marginals);
    double probability = 0.0;
    double sign = 1.0;
    for (int m = 0; m <= r - s; ++m) {
        probability += sign * binomial(s - 1 + m, m) * e[s + m];
        sign = -sign;
    }
    return probability;
}

FailureSystem::FailureSystem(std::vector<TimePolynomial> mean_polys,
                             std::vector<TimePolynomial> var_polys,
                             std::vector<double> thresholds,
                             int required_failures, double bracket_horizon)
    : mean_polys_(std::move(mean_polys)),
      var_polys_(std::move(var_polys)),
      thresholds_(std::move(thresholds)),
      required_failures_(required_failures),
      bracket_horizon_(bracket_horizon) {
    const size_t r = thresholds_.size();
    if (mean_polys_.size() != r || var_polys_.size() != r || r == 0) {
        throw ValidationError("FailureSystem: component lists have mismatched lengths");
    }
    if (required_failures_ < 1 || required_failures_ > static_cast<int>(r)) {
        throw ValidationError("FailureSystem: BadSystemOrder: order " +
                              std::to_string(required_failures_) +
                              " outside [1, " + std::to_string(r) + "]");
    }
    if (!(bracket_horizon_ > 0.0)) {
        throw ValidationError("FailureSystem: bracket horizon must be positive");
    }
    // Variance polynomials must stay strictly positive over the search range;
    // probe a dense grid plus both endpoints.
    constexpr int kProbes = 1000;
    for (size_t l = 0; l < r; ++l) {
        for (int i = 0; i <= kProbes; ++i) {
            const double t = bracket_horizon_ * static_cast<double>(i) / kProbes;
            if (!(var_polys_[l](t) > 0.0)) {
                throw ValidationError(
                    "FailureSystem: path variance of component " +
                    std::to_string(l + 1) + " is not positive at t = " +
                    std::to_string(t));
            }
        }
    }
}

FailureSystem FailureSystem::from_model(const ModelSpec& spec) {
    std::vector<TimePolynomial> means;
    std::vector<TimePolynomial> variances;
    std::vector<double> thresholds;
    for (int l = 0; l < spec.component_count(); ++l) {
        means.push_back(mean_path(spec, l));
        variances.push_back(path_variance(spec, l));
        thresholds.push_back(spec.components[static_cast<size_t>(l)].threshold);
    }
    return FailureSystem(std::move(means), std::move(variances),
                         std::move(thresholds), spec.required_failures,
                         spec.bracket_horizon);
}

const TimePolynomial& FailureSystem::mean_poly(int l) const {
    return mean_polys_[static_cast<size_t>(l)];
}

const TimePolynomial& FailureSystem::variance_poly(int l) const {
    return var_polys_[static_cast<size_t>(l)];
}

double FailureSystem::path_sd(int l, double t) const {
    return std::sqrt(var_polys_[static_cast<size_t>(l)](t));
}

double FailureSystem::standardized_margin(int l, double t) const {
    return (mean_polys_[static_cast<size_t>(l)](t) - thresholds_[static_cast<size_t>(l)]) /
           path_sd(l, t);
}

double FailureSystem::marginal_cdf(int l, double t) const {
    return normal_cdf(standardized_margin(l, t));
}

Eigen::VectorXd FailureSystem::marginal_cdfs(double t) const {
    Eigen::VectorXd cdfs(component_count());
    for (int l = 0; l < component_count(); ++l) cdfs[l] = marginal_cdf(l, t);
    return cdfs;
}

double FailureSystem::joint_cdf(double t) const {
    const double value =
        combine_failure_probabilities(marginal_cdfs(t), required_failures_);
    if (value < -1e-12 || value > 1.0 + 1e-12) {
        throw std::logic_error("joint_cdf: value " + std::to_string(value) +
                               " escaped [0,1]");
    }
    return value;
}

QuantileResult FailureSystem::quantile(double alpha) const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("quantile: alpha must lie strictly between 0 and 1");
    }

    QuantileResult result;
    if (joint_cdf(0.0) >= alpha) {
        result.time = 0.0;
        result.degenerate_at_zero = true;
        result.marginal_cdfs = marginal_cdfs(0.0);
        result.joint_cdf_value = joint_cdf(0.0);
        return result;
    }

    // Bracket the root by geometric expansion from t = 1, then bisect.  The
    // joint CDF is monotone, so bisection cannot fail inside a valid bracket.
    double lower = 0.0;
    double upper = std::min(1.0, bracket_horizon_);
    while (joint_cdf(upper) < alpha) {
        if (upper >= bracket_horizon_) {
            throw QuantileUnattainable(
                "quantile: joint CDF reaches only " +
                std::to_string(joint_cdf(bracket_horizon_)) + " < alpha = " +
                std::to_string(alpha) + " at the bracket horizon " +
                std::to_string(bracket_horizon_));
        }
        lower = upper;
        upper = std::min(2.0 * upper, bracket_horizon_);
    }

    while (upper - lower > 1e-12) {
        const double mid = 0.5 * (lower + upper);
        if (mid <= lower || mid >= upper) break;  // interval at double resolution
        if (joint_cdf(mid) < alpha) {
            lower = mid;
        } else {
            upper = mid;
        }
    }

    result.time = 0.5 * (lower + upper);
    result.marginal_cdfs = marginal_cdfs(result.time);
    result.joint_cdf_value = joint_cdf(result.time);
    if (std::abs(result.joint_cdf_value - alpha) > 1e-10) {
        throw std::logic_error("quantile: bisection finished " +
                               std::to_string(result.joint_cdf_value - alpha) +
                               " away from alpha");
    }
    return result;
}

}  // namespace adt
