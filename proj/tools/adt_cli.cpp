// Command-line front end: solve / quantile / check / sweep / product-design.
//
// Exit codes: 0 success (solve/check: certified), 1 validation or
// infeasibility error, 2 not converged / not certified, 3 quantile
// unattainable.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adt/config.hpp"
#include "adt/errors.hpp"
#include "adt/optimizer.hpp"
#include "adt/sweep.hpp"

namespace {

struct CommandOptions {
    std::string config_path;
    std::string out_path;
    std::string design_path;
    std::optional<double> alpha;
    std::optional<double> grid_step;
    std::optional<double> equivalence_tol;
    std::string sweep_target;
    std::string sweep_range;
    bool force_reoptimize = false;
};

adt::ProblemConfig load(const CommandOptions& options) {
    adt::ProblemConfig config = adt::load_problem_config(options.config_path);
    if (options.alpha) {
        config.model.quantile_level = *options.alpha;
        adt::ensure_valid(config.model);
    }
    if (options.grid_step) config.optimizer.grid_step = *options.grid_step;
    if (options.equivalence_tol) config.optimizer.equivalence_tol = *options.equivalence_tol;
    return config;
}

std::string point_text(const Eigen::VectorXd& point) {
    std::string text = "(";
    for (Eigen::Index j = 0; j < point.size(); ++j) {
        char cell[32];
        std::snprintf(cell, sizeof(cell), "%g", point[j]);
        text += (j ? ", " : "") + std::string(cell);
    }
    return text + ")";
}

void print_design_table(const adt::ApproximateDesign& design) {
    const Eigen::Index d = design.points.empty() ? 0 : design.points.front().size();
    for (Eigen::Index j = 0; j < d; ++j) std::printf("%10s_%lld", "x", static_cast<long long>(j + 1));
    std::printf("%12s\n", "weight");
    for (size_t i = 0; i < design.points.size(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) std::printf("%12g", design.points[i][j]);
        std::printf("%12.3f\n", design.weights[static_cast<Eigen::Index>(i)]);
    }
}

void print_quantile_lines(const adt::CriterionContext& ctx) {
    std::printf("quantile level alpha:    %s\n",
                adt::format_full(ctx.spec.quantile_level).c_str());
    std::printf("quantile time t_alpha:   %s\n",
                adt::format_full(ctx.quantile_time).c_str());
    std::printf("marginal CDFs at t_alpha:");
    for (Eigen::Index l = 0; l < ctx.marginal_cdfs.size(); ++l) {
        std::printf(" %.12g", ctx.marginal_cdfs[l]);
    }
    std::printf("\n");
    if (ctx.degenerate_quantile) {
        std::printf("warning: quantile is degenerate at t = 0 "
                    "(system already failed at level alpha)\n");
    }
}

void print_report(const adt::EquivalenceReport& report, size_t verification_points) {
    std::printf("criterion value:         %.15g\n", report.objective_value);
    std::printf("max sensitivity:         %.15g at %s\n", report.max_sensitivity,
                point_text(report.argmax_point).c_str());
    std::printf("equivalence gap:         %.6g (verification grid: %zu points)\n",
                report.gap, verification_points);
    std::printf("certified:               %s\n", report.certified ? "yes" : "no");
}

int run_solve(const CommandOptions& options) {
    const adt::ProblemConfig config = load(options);
    const adt::CriterionContext ctx = adt::make_criterion_context(config.model);
    print_quantile_lines(ctx);

    const std::vector<Eigen::VectorXd> candidates =
        adt::make_grid(config.model.design_region, config.optimizer.grid_step,
                       config.optimizer.max_grid_points);
    std::printf("candidate grid:          %zu points (step %g)\n", candidates.size(),
                config.optimizer.grid_step);

    const adt::SolveResult result =
        adt::multiplicative(ctx, candidates, config.optimizer);
    std::printf("iterations:              %d (%s)\n", result.iterations,
                result.converged ? "converged" : "not converged");

    adt::ApproximateDesign reported =
        adt::consolidate(result.design, config.optimizer.report_threshold,
                         config.optimizer.grid_step);

    // Report and certify the consolidated design: that is what gets printed
    // and written, so its certificate must be the one shown.
    std::vector<Eigen::VectorXd> verification;
    try {
        verification = adt::make_grid(config.model.design_region,
                                      config.optimizer.grid_step / 2.0,
                                      config.optimizer.max_grid_points);
    } catch (const adt::GridTooLarge&) {
        verification = candidates;
    }
    adt::EquivalenceReport report;
    try {
        report = adt::equivalence_report(ctx, reported, verification,
                                         config.optimizer.equivalence_tol);
    } catch (const adt::SingularInformation&) {
        // The optimum can concentrate on too few points for a full-rank
        // information matrix; the full surviving support still carries a
        // finite, certified criterion value, so report that instead.
        std::printf("note: the consolidated support is rank-deficient under this "
                    "model;\n      reporting the full surviving support instead\n");
        reported = result.design;
        report = result.report;
    }

    std::printf("design (weights rounded to 3 decimals):\n");
    print_design_table(reported);
    print_report(report, verification.size());
    std::printf("scaled asymptotic variance (coefficient part): %.15g\n",
                report.objective_value / (ctx.cdf_time_slope * ctx.cdf_time_slope));
    std::printf("note: the variance-parameter block of the information matrix is a\n"
                "      design-independent additive term and is excluded; reported\n"
                "      efficiencies are therefore lower bounds.\n");

    if (!options.out_path.empty()) {
        adt::write_design_csv(options.out_path, reported);
        std::printf("design written to %s\n", options.out_path.c_str());
    }
    return (result.converged && report.certified) ? 0 : 2;
}

int run_quantile(const CommandOptions& options) {
    const adt::ProblemConfig config = load(options);
    const adt::CriterionContext ctx = adt::make_criterion_context(config.model);
    print_quantile_lines(ctx);
    std::printf("dF_T/dt at t_alpha:      %.12g\n", ctx.cdf_time_slope);
    return 0;
}

int run_check(const CommandOptions& options) {
    const adt::ProblemConfig config = load(options);
    const adt::CriterionContext ctx = adt::make_criterion_context(config.model);
    const adt::ApproximateDesign design =
        adt::read_design_csv(options.design_path, config.model.stress_dim);
    std::printf("design: %d support points from %s\n", design.size(),
                options.design_path.c_str());

    const std::vector<Eigen::VectorXd> verification =
        adt::make_grid(config.model.design_region, config.optimizer.grid_step / 2.0,
                       config.optimizer.max_grid_points);
    const adt::EquivalenceReport report = adt::equivalence_report(
        ctx, design, verification, config.optimizer.equivalence_tol);
    print_report(report, verification.size());
    std::printf("support sensitivities (relative to criterion value):");
    for (Eigen::Index i = 0; i < report.support_sensitivities.size(); ++i) {
        std::printf(" %.9g", report.support_sensitivities[i] / report.objective_value);
    }
    std::printf("\n");
    return report.certified ? 0 : 2;
}

std::vector<double> parse_range(const std::string& text) {
    double start = 0.0, stop = 0.0, step = 0.0;
    char trailing = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step, &trailing) != 3 ||
        !(step > 0.0)) {
        throw adt::ValidationError("sweep range '" + text +
                                   "': expected start:stop:step with step > 0");
    }
    std::vector<double> values;
    for (int i = 0;; ++i) {
        const double value = start + i * step;
        if (value > stop + 1e-9 * step) break;
        values.push_back(value);
    }
    if (values.empty()) {
        throw adt::ValidationError("sweep range '" + text + "' produced no values");
    }
    return values;
}

int run_sweep(const CommandOptions& options) {
    adt::ProblemConfig config = load(options);

    adt::SweepSpec sweep_spec;
    if (config.sweep) sweep_spec = *config.sweep;
    if (!options.sweep_target.empty()) sweep_spec.target = options.sweep_target;
    if (!options.sweep_range.empty()) sweep_spec.values = parse_range(options.sweep_range);
    if (options.force_reoptimize) sweep_spec.reoptimize = true;
    if (sweep_spec.target.empty()) {
        throw adt::ValidationError(
            "sweep: no target (config 'sweep' section or --sweep-target)");
    }
    if (sweep_spec.values.empty()) {
        throw adt::ValidationError(
            "sweep: no values (config 'sweep' section or --sweep-range)");
    }

    const adt::SweepResult result =
        adt::sweep(config.model, sweep_spec, config.optimizer);
    const std::string csv = adt::sweep_csv_text(
        result, config.model.component_count(), sweep_spec.reoptimize);

    // The support legend goes wherever the CSV is not.
    std::FILE* legend = options.out_path.empty() ? stderr : stdout;
    std::fprintf(legend, "sweep of %s over %zu values; weight columns:\n",
                 sweep_spec.target.c_str(), sweep_spec.values.size());
    for (size_t i = 0; i < result.support.size(); ++i) {
        std::fprintf(legend, "  w_%zu = weight at %s\n", i + 1,
                     point_text(result.support[i]).c_str());
    }

    if (options.out_path.empty()) {
        std::fputs(csv.c_str(), stdout);
    } else {
        std::ofstream out(options.out_path, std::ios::binary);
        if (!out) {
            throw adt::ValidationError("cannot open '" + options.out_path +
                                       "' for writing");
        }
        out << csv;
        std::printf("sweep written to %s\n", options.out_path.c_str());
    }
    return 0;
}

int run_product_design(const CommandOptions& options) {
    const adt::ProblemConfig config = load(options);
    for (const adt::Interval& interval : config.model.design_region) {
        if (interval.lower != 0.0 || interval.upper != 1.0) {
            throw adt::ValidationError(
                "product-design: closed form requires the design region [0,1]^d");
        }
    }

    const adt::ProductDesign product =
        adt::product_extrapolation_design(config.model.use_condition);
    std::printf("use condition:           %s\n",
                point_text(config.model.use_condition).c_str());
    std::printf("marginal weights on the upper level:");
    for (Eigen::Index j = 0; j < product.marginal_weights.size(); ++j) {
        std::printf(" %.12g", product.marginal_weights[j]);
    }
    std::printf("\n");
    if (!product.extrapolation) {
        std::printf("warning: use condition lies inside [0,1] on some axis; the\n"
                    "         closed-form design is not optimal there\n");
    }
    std::printf("design (weights rounded to 3 decimals):\n");
    print_design_table(product.design);

    if (!options.out_path.empty()) {
        adt::write_design_csv(options.out_path, product.design);
        std::printf("design written to %s\n", options.out_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Locally c-optimal designs for accelerated degradation tests\n"
                 "with linear mixed-effects degradation paths and s-out-of-r\n"
                 "failure systems."};
    app.require_subcommand(1);

    CommandOptions options;
    const auto add_common = [&](CLI::App* cmd, bool with_out) {
        cmd->add_option("--config", options.config_path, "problem file (JSON)")
            ->required();
        if (with_out) {
            cmd->add_option("--out", options.out_path, "output CSV path");
        }
        return cmd;
    };

    CLI::App* solve = add_common(
        app.add_subcommand("solve", "compute and certify the optimal design"), true);
    solve->add_option("--alpha", options.alpha, "override the quantile level");
    solve->add_option("--grid-step", options.grid_step, "override the candidate grid step");
    solve->add_option("--tol", options.equivalence_tol, "override the equivalence tolerance");

    CLI::App* quantile = add_common(
        app.add_subcommand("quantile", "solve the failure-time quantile"), false);
    quantile->add_option("--alpha", options.alpha, "override the quantile level");

    CLI::App* check = add_common(
        app.add_subcommand("check", "certify a design CSV against the equivalence theorem"),
        false);
    check->add_option("--design", options.design_path, "design CSV to certify")
        ->required();
    check->add_option("--grid-step", options.grid_step, "override the verification grid step");
    check->add_option("--tol", options.equivalence_tol, "override the equivalence tolerance");

    CLI::App* sweep = add_common(
        app.add_subcommand("sweep", "robustness sweep over one model parameter"), true);
    sweep->add_option("--sweep-target", options.sweep_target,
                      "parameter selector: beta[l][q], x_u[j], alpha, threshold[l]");
    sweep->add_option("--sweep-range", options.sweep_range, "values as start:stop:step");
    sweep->add_flag("--reoptimize", options.force_reoptimize,
                    "re-optimize the design at every swept value");
    sweep->add_option("--grid-step", options.grid_step, "override the candidate grid step");
    sweep->add_option("--tol", options.equivalence_tol, "override the equivalence tolerance");

    CLI::App* product = add_common(
        app.add_subcommand("product-design",
                           "closed-form extrapolation design on the vertices"),
        true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed()) return run_solve(options);
        if (quantile->parsed()) return run_quantile(options);
        if (check->parsed()) return run_check(options);
        if (sweep->parsed()) return run_sweep(options);
        if (product->parsed()) return run_product_design(options);
    } catch (const adt::QuantileUnattainable& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 3;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 1;
}
