#ifndef ADT_FAILURE_HPP
#define ADT_FAILURE_HPP

#include <Eigen/Dense>
#include <vector>

#include "adt/model.hpp"

namespace adt {

// ----------------------------------------------------------------------------
// Failure-time distribution under the normal use condition
//
// Component l fails (softly) when its aggregate degradation path crosses the
// threshold, which gives the marginal failure-time law
//   F_l(t) = Phi( (mean_l(t) - threshold_l) / sqrt(var_l(t)) )
// with mean_l(t) = f_l(x_u,t)' beta_l and var_l(t) = g_l(t)' Sigma_l g_l(t).
// The system fails once at least s of the r components have failed; the joint
// law combines the marginals by inclusion-exclusion.
// ----------------------------------------------------------------------------

// Standard normal CDF/density, accurate to double precision (erfc-based).
double normal_cdf(double z);
double normal_pdf(double z);

// Dense polynomial in time: coefficients[m] multiplies t^m.
struct TimePolynomial {
    Eigen::VectorXd coefficients;

    double operator()(double t) const;
    int degree() const;  // highest index with a nonzero coefficient
};

// Aggregate degradation mean f_l(x_u, t)' beta_l, expanded in powers of t.
TimePolynomial mean_path(const ModelSpec& spec, int l);

// Path variance g_l(t)' Sigma_l g_l(t), expanded in powers of t.
TimePolynomial path_variance(const ModelSpec& spec, int l);

// P(at least `required_failures` of the components with the given marginal
// failure probabilities have failed), assuming independence.  Evaluated via
// elementary symmetric polynomials; exact for any r.
double combine_failure_probabilities(const Eigen::VectorXd& marginals,
                                     int required_failures);

// Result of the quantile solve.
struct QuantileResult {
    double time = 0.0;                // t with F_T(t) = alpha (0 if degenerate)
    bool degenerate_at_zero = false;  // F_T(0) >= alpha already
    Eigen::VectorXd marginal_cdfs;    // per-component F_l at the returned time
    double joint_cdf_value = 0.0;     // F_T at the returned time
};

class FailureSystem {
public:
    // var_polys must be strictly positive on [0, bracket_horizon]; checked on
    // a dense grid plus endpoints at construction.
    FailureSystem(std::vector<TimePolynomial> mean_polys,
                  std::vector<TimePolynomial> var_polys,
                  std::vector<double> thresholds, int required_failures,
                  double bracket_horizon = 1e6);

    // Builds the system at spec.use_condition.
    static FailureSystem from_model(const ModelSpec& spec);

    int component_count() const { return static_cast<int>(thresholds_.size()); }
    int required_failures() const { return required_failures_; }
    double bracket_horizon() const { return bracket_horizon_; }
    const TimePolynomial& mean_poly(int l) const;
    const TimePolynomial& variance_poly(int l) const;

    // Path standard deviation sqrt(var_l(t)) and standardized margin
    // h_l(t) = (mean_l(t) - threshold_l) / sd_l(t).
    double path_sd(int l, double t) const;
    double standardized_margin(int l, double t) const;

    // Marginal failure probability F_l(t) = Phi(h_l(t)).
    double marginal_cdf(int l, double t) const;
    Eigen::VectorXd marginal_cdfs(double t) const;

    // System failure probability F_T(t); asserted to lie in [0,1] to 1e-12.
    double joint_cdf(double t) const;

    // Solves F_T(t) = alpha by bracketing (geometric expansion from t=1) and
    // bisection to 1e-12 on t / 1e-10 on F.  Returns time 0 with the
    // degenerate flag when F_T(0) >= alpha; throws QuantileUnattainable when
    // F_T never reaches alpha before the bracket horizon.
    QuantileResult quantile(double alpha) const;

private:
    std::vector<TimePolynomial> mean_polys_;
    std::vector<TimePolynomial> var_polys_;
    std::vector<double> thresholds_;
    int required_failures_ = 1;
    double bracket_horizon_ = 1e6;
};

}  // namespace adt

#endif
