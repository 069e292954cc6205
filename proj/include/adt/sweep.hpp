#ifndef ADT_SWEEP_HPP
#define ADT_SWEEP_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "adt/optimizer.hpp"

namespace adt {

// ----------------------------------------------------------------------------
// Robustness sweeps
//
// One model parameter is varied over a list of values.  Each row rebuilds the
// failure system and criterion at the swept truth, re-optimizes the design
// (optionally), and evaluates how well the nominal optimal design and the
// balanced vertex reference design hold up:
//   efficiency_star = objective(re-optimized) / objective(nominal design)
//   efficiency_bar  = objective(re-optimized) / objective(balanced design)
// both computed under the swept truth.  Rows are computed independently (no
// warm starts), and a failing row is flagged in its status, never fatal.
// ----------------------------------------------------------------------------

// Selector grammar (1-based indices):
//   beta[l][q]    coefficient q of component l
//   x_u[j]        use-condition coordinate j
//   alpha         quantile level
//   threshold[l]  failure threshold of component l
struct SweepSpec {
    std::string target;
    std::vector<double> values;
    bool reoptimize = true;
};

struct SweepRow {
    double value = 0.0;
    double quantile_time = 0.0;
    bool degenerate = false;
    // Weights aligned to the base support (SweepResult::support); empty when
    // the row failed before optimization.
    std::vector<double> weights;
    double efficiency_star = 0.0;  // meaningful only when reoptimize ran
    double efficiency_bar = 0.0;
    Eigen::VectorXd marginal_cdfs;  // per-component F_l at the row's quantile
    std::optional<EquivalenceReport> report;  // present when re-optimized
    std::string status;  // "ok", or a flag naming what failed/changed
};

struct SweepResult {
    ApproximateDesign nominal_design;       // optimum under the unswept spec
    std::vector<Eigen::VectorXd> support;   // weight-column points
    std::vector<SweepRow> rows;
};

// Equal weights on the 2^d vertices of a rectangular region.
ApproximateDesign balanced_vertex_design(const std::vector<Interval>& region);

// Parsed selector; apply() returns a copy of the spec with the target set.
struct SweepTarget {
    enum class Kind { Coefficient, UseCondition, QuantileLevel, Threshold };
    Kind kind = Kind::QuantileLevel;
    int component = 0;  // 0-based, Coefficient/Threshold
    int index = 0;      // 0-based coefficient or coordinate index

    ModelSpec apply(const ModelSpec& spec, double value) const;
};

// Throws ValidationError on unknown selectors or out-of-range indices.
SweepTarget parse_sweep_target(const std::string& selector, const ModelSpec& spec);

// Runs the full sweep.  The base optimum is computed once under the unswept
// spec; its support defines the weight columns of every row.
SweepResult sweep(const ModelSpec& spec, const SweepSpec& sweep_spec,
                  const OptimizerOptions& options);

}  // namespace adt

#endif
