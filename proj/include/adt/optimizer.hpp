#ifndef ADT_OPTIMIZER_HPP
#define ADT_OPTIMIZER_HPP

#include <Eigen/Dense>
#include <vector>

#include "adt/criterion.hpp"

namespace adt {

// ----------------------------------------------------------------------------
// Design optimization on a candidate grid
//
// The multiplicative algorithm iterates
//   w_i <- w_i * (d_i / sum_j w_j d_j)^power
// over the candidate grid, where d_i is the criterion's sensitivity at x_i.
// It stops when the relative objective decrease and the optimality gap are
// both below their tolerances.  The result is certified against the general
// equivalence theorem on a refined verification grid: a design is optimal iff
// max_x d(x, design) equals the objective value.
// ----------------------------------------------------------------------------

struct OptimizerOptions {
    double grid_step = 0.05;        // candidate lattice spacing per axis
    int max_iterations = 100000;
    double convergence_tol = 1e-9;  // relative objective decrease gate
    double equivalence_tol = 1e-6;  // relative optimality gap gate
    double prune_threshold = 1e-8;  // weights zeroed after the run
    double report_threshold = 1e-3; // minimum weight in the reported support
    double power = 1.0;             // multiplicative exponent (monotone at 1)
    long max_grid_points = 1000000; // cap for make_grid
};

// Equivalence-theorem certificate for a design over a verification grid.
struct EquivalenceReport {
    double objective_value = 0.0;
    double max_sensitivity = 0.0;
    Eigen::VectorXd argmax_point;
    double gap = 0.0;  // max_sensitivity / objective_value - 1
    Eigen::VectorXd support_sensitivities;
    bool certified = false;  // gap <= equivalence_tol
};

struct IterationRecord {
    int iteration = 0;
    double objective_value = 0.0;
    double gap = 0.0;  // over the candidate grid
};

struct SolveResult {
    ApproximateDesign design;  // pruned, full remaining support
    EquivalenceReport report;  // on the verification grid
    std::vector<IterationRecord> log;
    int iterations = 0;
    bool converged = false;  // both stopping gates met before max_iterations
};

// Full Cartesian lattice over the region with the given step, both endpoints
// included per axis.  Points are ordered lexicographically by axis index.
// Throws GridTooLarge above the cap.
std::vector<Eigen::VectorXd> make_grid(const std::vector<Interval>& region,
                                       double step, long max_points = 1000000);

// Runs the multiplicative algorithm from the uniform design on `candidates`.
// Throws Infeasible when the uniform start is singular.  A run that exhausts
// max_iterations returns its best iterate with converged=false and an
// uncertified report — not an error.  The verification grid is the design
// region's lattice at half the grid step (2x refinement per axis).
SolveResult multiplicative(const CriterionContext& ctx,
                           const std::vector<Eigen::VectorXd>& candidates,
                           const OptimizerOptions& options);

// Certifies `design` by scanning the sensitivity over `verification_grid`
// (the design's own support is always included in the scan).
EquivalenceReport equivalence_report(const CriterionContext& ctx,
                                     const ApproximateDesign& design,
                                     const std::vector<Eigen::VectorXd>& verification_grid,
                                     double equivalence_tol = 1e-6);

// Closed-form extrapolation design for per-axis bases (1, x_j) on [0,1]^d:
// axis j puts weight |x_uj| / (1 + 2|x_uj|) on x_j = 1, the design is the
// product of the axis marginals over the 2^d vertices.
struct ProductDesign {
    ApproximateDesign design;          // 2^d vertices in make_grid order
    Eigen::VectorXd marginal_weights;  // per-axis weight on x_j = 1
    bool extrapolation = false;        // false when some x_uj lies in [0,1]
};

// The formula is optimal only for use conditions outside the region; inside,
// the design is still returned with extrapolation=false as a warning flag.
ProductDesign product_extrapolation_design(const Eigen::VectorXd& use_condition);

// Drops weights below `report_threshold`, renormalizes, and merges points
// closer than grid_step/2 (weight-centroid snapped to the grid).  Throws
// EmptySupport when nothing survives.
ApproximateDesign consolidate(const ApproximateDesign& design,
                              double report_threshold, double grid_step);

}  // namespace adt

#endif
