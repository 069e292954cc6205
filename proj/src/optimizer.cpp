#include "adt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

#include "adt/errors.hpp"

namespace adt {

std::vector<Eigen::VectorXd> make_grid(const std::vector<Interval>& region,
                                       double step, long max_points) {
    if (!(step > 0.0)) throw ValidationError("make_grid: step must be positive");
    if (region.empty()) throw ValidationError("make_grid: region is empty");

    std::vector<long> counts;  // lattice points per axis
    long total = 1;
    for (size_t j = 0; j < region.size(); ++j) {
        const double edge = region[j].upper - region[j].lower;
        const double ratio = edge / step;
        const long segments = std::lround(ratio);
        if (segments < 1 || std::abs(ratio - static_cast<double>(segments)) > 1e-9) {
            throw ValidationError("make_grid: step " + std::to_string(step) +
                                  " does not divide the edge of axis " +
                                  std::to_string(j + 1));
        }
        counts.push_back(segments + 1);
        if (total > max_points / counts.back()) {
            throw GridTooLarge("make_grid: grid exceeds the cap of " +
                               std::to_string(max_points) + " points");
        }
        total *= counts.back();
    }

    // Odometer over the axes, last axis fastest; endpoints are set exactly so
    // vertices land on the region boundary bit-for-bit.
    const size_t d = region.size();
    std::vector<long> index(d, 0);
    std::vector<Eigen::VectorXd> points;
    points.reserve(static_cast<size_t>(total));
    while (true) {
        Eigen::VectorXd point(static_cast<Eigen::Index>(d));
        for (size_t j = 0; j < d; ++j) {
            point[static_cast<Eigen::Index>(j)] =
                index[j] == counts[j] - 1
                    ? region[j].upper
                    : region[j].lower + static_cast<double>(index[j]) * step;
        }
        points.push_back(std::move(point));
        size_t axis = d;
        while (axis > 0) {
            --axis;
            if (++index[axis] < counts[axis]) break;
            index[axis] = 0;
            if (axis == 0) return points;
        }
    }
}

namespace {

// Per-component kernel over a fixed candidate list: column i holds
// vec(F(x_i)' V^{-1} F(x_i)), so the information matrix of a weighting w is
// the reshaped product stack * w and the candidate sensitivities of a solved
// gradient u are stack' vec(u u').
struct ComponentKernel {
    Eigen::MatrixXd stack;  // p*p x n
    Eigen::Index p = 0;
};

std::vector<ComponentKernel> build_kernels(const CriterionContext& ctx,
                                           const std::vector<Eigen::VectorXd>& candidates) {
    std::vector<ComponentKernel> kernels;
    for (int l = 0; l < ctx.spec.component_count(); ++l) {
        const ComponentSpec& component = ctx.spec.components[static_cast<size_t>(l)];
        ComponentKernel kernel;
        kernel.p = static_cast<Eigen::Index>(component.fixed_basis.size());
        kernel.stack.resize(kernel.p * kernel.p,
                            static_cast<Eigen::Index>(candidates.size()));
        for (size_t i = 0; i < candidates.size(); ++i) {
            const Eigen::MatrixXd fixed =
                fixed_design_matrix(component, candidates[i], ctx.spec.time_plan);
            const Eigen::MatrixXd block =
                fixed.transpose() * ctx.v_inverse[static_cast<size_t>(l)] * fixed;
            kernel.stack.col(static_cast<Eigen::Index>(i)) =
                Eigen::Map<const Eigen::VectorXd>(block.data(), kernel.p * kernel.p);
        }
        kernels.push_back(std::move(kernel));
    }
    return kernels;
}

// Objective and per-candidate sensitivities of the weighting w, via the
// kernels.  Sensitivities are clamped at zero: they are quadratic forms whose
// tiny negative excursions are pure roundoff, and a negative value would
// poison the fractional-power update.
double evaluate(const CriterionContext& ctx,
                const std::vector<ComponentKernel>& kernels,
                const Eigen::VectorXd& weights, Eigen::VectorXd& sensitivities) {
    sensitivities.setZero(weights.size());
    double objective_value = 0.0;
    for (size_t l = 0; l < kernels.size(); ++l) {
        const ComponentKernel& kernel = kernels[l];
        const Eigen::VectorXd packed = kernel.stack * weights;
        const Eigen::Map<const Eigen::MatrixXd> info(packed.data(), kernel.p, kernel.p);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt = guarded_ldlt(
            info, "information block of component " + std::to_string(static_cast<int>(l) + 1));
        const Eigen::VectorXd solution = ldlt.solve(ctx.gradient_vectors[l]);
        objective_value += ctx.gradient_vectors[l].dot(solution);
        const Eigen::MatrixXd outer = solution * solution.transpose();
        sensitivities.noalias() +=
            kernel.stack.transpose() *
            Eigen::Map<const Eigen::VectorXd>(outer.data(), kernel.p * kernel.p);
    }
    sensitivities = sensitivities.cwiseMax(0.0);
    return objective_value;
}

}  // namespace

EquivalenceReport equivalence_report(const CriterionContext& ctx,
                                     const ApproximateDesign& design,
                                     const std::vector<Eigen::VectorXd>& verification_grid,
                                     double equivalence_tol) {
    validate_design(design, ctx.spec.stress_dim);
    const std::vector<Eigen::VectorXd> solutions = solve_gradient_systems(ctx, design);

    EquivalenceReport report;
    for (size_t l = 0; l < solutions.size(); ++l) {
        report.objective_value += ctx.gradient_vectors[l].dot(solutions[l]);
    }

    report.support_sensitivities.resize(design.size());
    report.max_sensitivity = -1.0;
    for (int i = 0; i < design.size(); ++i) {
        const double value = sensitivity_from_solutions(
            ctx, solutions, design.points[static_cast<size_t>(i)]);
        report.support_sensitivities[i] = value;
        if (value > report.max_sensitivity) {
            report.max_sensitivity = value;
            report.argmax_point = design.points[static_cast<size_t>(i)];
        }
    }
    for (const Eigen::VectorXd& point : verification_grid) {
        const double value = sensitivity_from_solutions(ctx, solutions, point);
        if (value > report.max_sensitivity) {
            report.max_sensitivity = value;
            report.argmax_point = point;
        }
    }

    report.gap = report.max_sensitivity / report.objective_value - 1.0;
    report.certified = report.gap <= equivalence_tol;
    return report;
}

SolveResult multiplicative(const CriterionContext& ctx,
                           const std::vector<Eigen::VectorXd>& candidates,
                           const OptimizerOptions& options) {
    if (candidates.empty()) {
        throw ValidationError("multiplicative: candidate list is empty");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(candidates.size());
    const std::vector<ComponentKernel> kernels = build_kernels(ctx, candidates);

    Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    Eigen::VectorXd sensitivities(n);

    SolveResult result;
    result.log.reserve(static_cast<size_t>(std::min(options.max_iterations, 100000)));

    double previous_objective = 0.0;
    double best_objective = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_weights = weights;

    for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
        double objective_value;
        try {
            objective_value = evaluate(ctx, kernels, weights, sensitivities);
        } catch (const SingularInformation& error) {
            if (iteration == 0) {
                throw Infeasible(std::string("multiplicative: uniform starting design "
                                             "is infeasible: ") +
                                 error.what());
            }
            throw;
        }
        const double gap = sensitivities.maxCoeff() / objective_value - 1.0;
        result.log.push_back({iteration, objective_value, gap});
        result.iterations = iteration + 1;

        if (objective_value < best_objective) {
            best_objective = objective_value;
            best_weights = weights;
        }
        if (iteration > 0) {
            // The exponent-1 update provably never increases the objective;
            // anything beyond roundoff means a broken sensitivity.
            if (options.power == 1.0 &&
                objective_value > previous_objective * (1.0 + 1e-12)) {
                throw std::logic_error(
                    "multiplicative: objective increased at exponent 1 (iteration " +
                    std::to_string(iteration) + ")");
            }
            const double decrease =
                (previous_objective - objective_value) / objective_value;
            if (std::abs(decrease) <= options.convergence_tol &&
                gap <= options.equivalence_tol) {
                result.converged = true;
                break;
            }
        }
        previous_objective = objective_value;

        const double average = weights.dot(sensitivities);
        weights.array() *= (sensitivities.array() / average).pow(options.power);
        weights /= weights.sum();
    }

    if (!result.converged) weights = best_weights;

    // Zero out numerically dead candidates and keep the remaining support.
    Eigen::VectorXd pruned = (weights.array() < options.prune_threshold)
                                 .select(Eigen::VectorXd::Zero(n), weights);
    if (!(pruned.sum() > 0.0)) {
        throw EmptySupport("multiplicative: prune threshold removed all weight");
    }
    pruned /= pruned.sum();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (pruned[i] > 0.0) {
            result.design.points.push_back(candidates[static_cast<size_t>(i)]);
        }
    }
    result.design.weights.resize(static_cast<Eigen::Index>(result.design.points.size()));
    for (Eigen::Index i = 0, j = 0; i < n; ++i) {
        if (pruned[i] > 0.0) result.design.weights[j++] = pruned[i];
    }

    std::vector<Eigen::VectorXd> verification;
    try {
        verification = make_grid(ctx.spec.design_region, options.grid_step / 2.0,
                                 options.max_grid_points);
    } catch (const GridTooLarge&) {
        verification = candidates;  // refinement over budget: certify on the lattice
    }
    result.report =
        equivalence_report(ctx, result.design, verification, options.equivalence_tol);
    return result;
}

ProductDesign product_extrapolation_design(const Eigen::VectorXd& use_condition) {
    const Eigen::Index d = use_condition.size();
    if (d < 1) {
        throw ValidationError("product_extrapolation_design: empty use condition");
    }

    ProductDesign product;
    product.marginal_weights.resize(d);
    product.extrapolation = true;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double magnitude = std::abs(use_condition[j]);
        product.marginal_weights[j] = magnitude / (1.0 + 2.0 * magnitude);
        if (use_condition[j] >= 0.0 && use_condition[j] <= 1.0) {
            product.extrapolation = false;  // formula is not optimal here
        }
    }

    const long vertex_count = 1L << d;
    product.design.weights.resize(vertex_count);
    for (long v = 0; v < vertex_count; ++v) {
        Eigen::VectorXd vertex(d);
        double weight = 1.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            const bool upper = (v >> (d - 1 - j)) & 1L;  // last axis fastest
            vertex[j] = upper ? 1.0 : 0.0;
            weight *= upper ? product.marginal_weights[j]
                            : 1.0 - product.marginal_weights[j];
        }
        product.design.points.push_back(std::move(vertex));
        product.design.weights[v] = weight;
    }
    return product;
}

ApproximateDesign consolidate(const ApproximateDesign& design,
                              double report_threshold, double grid_step) {
    std::vector<Eigen::VectorXd> kept_points;
    std::vector<double> kept_weights;
    for (size_t i = 0; i < design.points.size(); ++i) {
        if (design.weights[static_cast<Eigen::Index>(i)] >= report_threshold) {
            kept_points.push_back(design.points[i]);
            kept_weights.push_back(design.weights[static_cast<Eigen::Index>(i)]);
        }
    }
    if (kept_points.empty()) {
        throw EmptySupport("consolidate: every weight fell below the report threshold " +
                           std::to_string(report_threshold));
    }

    // Merge clusters of near-coincident points (closer than half a grid step)
    // into their weight centroid, snapped back onto the step lattice.
    const double merge_radius = grid_step / 2.0;
    std::vector<bool> merged(kept_points.size(), false);
    ApproximateDesign result;
    std::vector<double> weights;
    for (size_t i = 0; i < kept_points.size(); ++i) {
        if (merged[i]) continue;
        Eigen::VectorXd centroid = kept_weights[i] * kept_points[i];
        double cluster_weight = kept_weights[i];
        int cluster_size = 1;
        for (size_t j = i + 1; j < kept_points.size(); ++j) {
            if (!merged[j] &&
                (kept_points[j] - kept_points[i]).norm() < merge_radius) {
                centroid += kept_weights[j] * kept_points[j];
                cluster_weight += kept_weights[j];
                merged[j] = true;
                ++cluster_size;
            }
        }
        if (cluster_size == 1) {
            // Lone point: keep it bit-for-bit so clean designs stay unchanged.
            result.points.push_back(kept_points[i]);
        } else {
            centroid /= cluster_weight;
            for (Eigen::Index k = 0; k < centroid.size(); ++k) {
                centroid[k] = std::round(centroid[k] / grid_step) * grid_step;
            }
            result.points.push_back(centroid);
        }
        weights.push_back(cluster_weight);
    }

    double total = 0.0;
    for (double w : weights) total += w;
    result.weights.resize(static_cast<Eigen::Index>(weights.size()));
    for (size_t i = 0; i < weights.size(); ++i) {
        result.weights[static_cast<Eigen::Index>(i)] = weights[i] / total;
    }
    return result;
}

}  // namespace adt
