#include "adt/sweep.hpp"

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>

#include "adt/errors.hpp"

namespace adt {

ApproximateDesign balanced_vertex_design(const std::vector<Interval>& region) {
    const size_t d = region.size();
    if (d == 0) throw ValidationError("balanced_vertex_design: region is empty");

    ApproximateDesign design;
    const long vertex_count = 1L << d;
    design.weights = Eigen::VectorXd::Constant(
        vertex_count, 1.0 / static_cast<double>(vertex_count));
    for (long v = 0; v < vertex_count; ++v) {
        Eigen::VectorXd vertex(static_cast<Eigen::Index>(d));
        for (size_t j = 0; j < d; ++j) {
            const bool upper = (v >> (d - 1 - j)) & 1L;  // last axis fastest
            vertex[static_cast<Eigen::Index>(j)] =
                upper ? region[j].upper : region[j].lower;
        }
        design.points.push_back(std::move(vertex));
    }
    return design;
}

namespace {

// Parses "name[i]" or "name[i][j]" with 1-based indices.
bool parse_indexed(const std::string& text, const std::string& name, int arity,
                   int& first, int& second) {
    if (text.size() < name.size() || text.compare(0, name.size(), name) != 0) {
        return false;
    }
    std::istringstream rest(text.substr(name.size()));
    char open = 0, close = 0;
    if (!(rest >> open >> first >> close) || open != '[' || close != ']') {
        throw ValidationError("sweep target '" + text + "': expected " + name +
                              "[i]" + (arity == 2 ? "[j]" : ""));
    }
    if (arity == 2) {
        if (!(rest >> open >> second >> close) || open != '[' || close != ']') {
            throw ValidationError("sweep target '" + text + "': expected " + name +
                                  "[i][j]");
        }
    }
    std::string leftover;
    if (rest >> leftover) {
        throw ValidationError("sweep target '" + text + "': trailing text");
    }
    return true;
}

}  // namespace

SweepTarget parse_sweep_target(const std::string& selector, const ModelSpec& spec) {
    SweepTarget target;
    int first = 0, second = 0;

    if (selector == "alpha") {
        target.kind = SweepTarget::Kind::QuantileLevel;
        return target;
    }
    if (parse_indexed(selector, "beta", 2, first, second)) {
        target.kind = SweepTarget::Kind::Coefficient;
        target.component = first - 1;
        target.index = second - 1;
        if (target.component < 0 || target.component >= spec.component_count()) {
            throw ValidationError("sweep target '" + selector +
                                  "': component index out of range");
        }
        const Eigen::Index p =
            spec.components[static_cast<size_t>(target.component)].coefficients.size();
        if (target.index < 0 || target.index >= p) {
            throw ValidationError("sweep target '" + selector +
                                  "': coefficient index out of range");
        }
        return target;
    }
    if (parse_indexed(selector, "x_u", 1, first, second)) {
        target.kind = SweepTarget::Kind::UseCondition;
        target.index = first - 1;
        if (target.index < 0 || target.index >= spec.stress_dim) {
            throw ValidationError("sweep target '" + selector +
                                  "': coordinate index out of range");
        }
        return target;
    }
    if (parse_indexed(selector, "threshold", 1, first, second)) {
        target.kind = SweepTarget::Kind::Threshold;
        target.component = first - 1;
        if (target.component < 0 || target.component >= spec.component_count()) {
            throw ValidationError("sweep target '" + selector +
                                  "': component index out of range");
        }
        return target;
    }
    throw ValidationError("sweep target '" + selector +
                          "': expected beta[l][q], x_u[j], alpha, or threshold[l]");
}

ModelSpec SweepTarget::apply(const ModelSpec& spec, double value) const {
    ModelSpec swept = spec;
    switch (kind) {
        case Kind::Coefficient:
            swept.components[static_cast<size_t>(component)].coefficients[index] = value;
            break;
        case Kind::UseCondition:
            swept.use_condition[index] = value;
            break;
        case Kind::QuantileLevel:
            swept.quantile_level = value;
            break;
        case Kind::Threshold:
            swept.components[static_cast<size_t>(component)].threshold = value;
            break;
    }
    return swept;
}

namespace {

// Maps a re-optimized design onto the base support columns.  Mass on points
// that match no column (within half a grid step) is reported via the status.
std::vector<double> align_weights(const std::vector<Eigen::VectorXd>& support,
                                  const ApproximateDesign& design,
                                  double grid_step, std::string& status) {
    std::vector<double> aligned(support.size(), 0.0);
    for (size_t i = 0; i < design.points.size(); ++i) {
        bool matched = false;
        for (size_t j = 0; j < support.size(); ++j) {
            if ((design.points[i] - support[j]).norm() < grid_step / 2.0) {
                aligned[j] += design.weights[static_cast<Eigen::Index>(i)];
                matched = true;
                break;
            }
        }
        if (!matched) {
            std::ostringstream note;
            note << "support grew at (";
            for (Eigen::Index k = 0; k < design.points[i].size(); ++k) {
                note << (k ? " " : "") << design.points[i][k];
            }
            note << ")";
            if (status == "ok") status = note.str();
        }
    }
    return aligned;
}

}  // namespace

SweepResult sweep(const ModelSpec& spec, const SweepSpec& sweep_spec,
                  const OptimizerOptions& options) {
    ensure_valid(spec);
    if (sweep_spec.values.empty()) {
        throw ValidationError("sweep: values list is empty");
    }
    for (double value : sweep_spec.values) {
        if (!std::isfinite(value)) {
            throw ValidationError("sweep: values must be finite");
        }
    }
    const SweepTarget target = parse_sweep_target(sweep_spec.target, spec);

    // Base run under the unswept spec: defines the weight columns and the
    // fixed design whose robustness the sweep measures.
    const std::vector<Eigen::VectorXd> candidates =
        make_grid(spec.design_region, options.grid_step, options.max_grid_points);
    const CriterionContext nominal_ctx = make_criterion_context(spec);
    const SolveResult nominal_solve = multiplicative(nominal_ctx, candidates, options);
    SweepResult result;
    result.nominal_design =
        consolidate(nominal_solve.design, options.report_threshold, options.grid_step);
    result.support = result.nominal_design.points;

    const ApproximateDesign balanced = balanced_vertex_design(spec.design_region);

    for (double value : sweep_spec.values) {
        SweepRow row;
        row.value = value;
        row.status = "ok";
        try {
            const ModelSpec swept = target.apply(spec, value);
            const CriterionContext ctx = make_criterion_context(swept);
            row.quantile_time = ctx.quantile_time;
            row.marginal_cdfs = ctx.marginal_cdfs;
            if (ctx.degenerate_quantile) {
                row.degenerate = true;
                row.status = "degenerate quantile at 0";
                result.rows.push_back(std::move(row));
                continue;
            }
            if (sweep_spec.reoptimize) {
                const SolveResult solve = multiplicative(ctx, candidates, options);
                const ApproximateDesign optimal = consolidate(
                    solve.design, options.report_threshold, options.grid_step);
                row.report = solve.report;
                if (!solve.report.certified) row.status = "uncertified";
                row.weights = align_weights(result.support, optimal,
                                            options.grid_step, row.status);
                double optimal_value;
                try {
                    optimal_value = objective(ctx, optimal);
                } catch (const SingularInformation&) {
                    // The swept truth can have a c-optimal limit supported on
                    // too few points for a full-rank information matrix; the
                    // certified pre-consolidation iterate carries its value.
                    optimal_value = solve.report.objective_value;
                }
                row.efficiency_star = efficiency(ctx, result.nominal_design, optimal_value);
                row.efficiency_bar = efficiency(ctx, balanced, optimal_value);
            }
        } catch (const QuantileUnattainable& error) {
            row.status = std::string("quantile unattainable: ") + error.what();
        } catch (const ValidationError& error) {
            row.status = std::string("invalid: ") + error.what();
        } catch (const SingularInformation& error) {
            row.status = std::string("singular: ") + error.what();
        } catch (const Infeasible& error) {
            row.status = std::string("infeasible: ") + error.what();
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

}  // namespace adt
