#ifndef ADT_CONFIG_HPP
#define ADT_CONFIG_HPP

#include <optional>
#include <string>
#include <vector>

#include "adt/sweep.hpp"

namespace adt {

// ----------------------------------------------------------------------------
// Problem files and data formats
//
// A problem file is a strict JSON document; unknown keys anywhere are errors.
// Schema (1-based indices in selectors, 0-based nowhere):
//
// {
//   "stress_dim": 2,
//   "design_region": [[0,1],[0,1]],          // optional, default [0,1]^d
//   "time_plan": [0, 0.5, 1],
//   "error_variance": 0.10,
//   "use_condition": [-0.4, -0.2],
//   "system_s": 1,
//   "alpha": 0.5,
//   "t_max": 1e6,                            // optional quantile horizon
//   "components": [
//     {
//       "fixed_basis": ["1","x1","x2","x1*x2","t","x1*t","x2*t","x1*x2*t"],
//       "random_time_exponents": [0, 1],
//       "sigma_gamma": [[0.36, 0], [0, 0.10]],
//       "beta": [2.30, 1.60, 1.30, 0.02, 0.70, 0.07, 0.08, 0.03],
//       "threshold": 5.4,
//       "error_variance": 0.10               // optional per-component override
//     }, ...
//   ],
//   "optimizer": {                           // optional, defaults as in
//     "grid_step": 0.05, "max_iterations": 100000, ...OptimizerOptions
//   },
//   "sweep": {                               // optional
//     "target": "beta[1][1]", "values": [ ... ], "reoptimize": true
//   }
// }
//
// Basis monomials are written as '*'-separated factors "x<j>", "t", with an
// optional "^<power>"; the constant term is "1".
// ----------------------------------------------------------------------------

struct ProblemConfig {
    ModelSpec model;
    OptimizerOptions optimizer;
    std::optional<SweepSpec> sweep;
};

// Parses and validates; throws ValidationError with the offending key/path.
ProblemConfig parse_problem_config(const std::string& json_text);
ProblemConfig load_problem_config(const std::string& path);

// Monomial text format used in problem files (round-trips).
Monomial parse_monomial(const std::string& text, int stress_dim);
std::string monomial_to_string(const Monomial& monomial);

// Formats with 17 significant digits (lossless double round trip).
std::string format_full(double value);

// Design CSV: header "x_1,...,x_d,weight", one row per support point,
// full-precision values, newline-terminated.
std::string design_csv_text(const ApproximateDesign& design);
void write_design_csv(const std::string& path, const ApproximateDesign& design);

// Reads and validates a design CSV; throws ValidationError on malformed
// files, wrong dimension, or weights violating the design invariants.
ApproximateDesign read_design_csv(const std::string& path, int stress_dim);

// Sweep CSV: header "value,t_alpha,w_1..w_m,eff_star,eff_bar,F_T1..F_Tr,status";
// efficiency cells are empty when the row was not re-optimized.
std::string sweep_csv_text(const SweepResult& result, int component_count,
                           bool reoptimized);

}  // namespace adt

#endif
