#include "adt/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "adt/errors.hpp"

namespace adt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ValidationError("config: " + path + ": " + message);
}

// Unknown keys are hard errors so a typo can never silently fall back to a
// default value.
void reject_unknown_keys(const json& object, const std::set<std::string>& known,
                         const std::string& path) {
    for (const auto& item : object.items()) {
        if (!known.count(item.key())) {
            fail(path, "unknown key '" + item.key() + "'");
        }
    }
}

const json& require(const json& object, const std::string& key,
                    const std::string& path) {
    if (!object.contains(key)) fail(path, "missing key '" + key + "'");
    return object.at(key);
}

double as_number(const json& value, const std::string& path) {
    if (!value.is_number()) fail(path, "expected a number");
    return value.get<double>();
}

int as_integer(const json& value, const std::string& path) {
    if (!value.is_number_integer()) fail(path, "expected an integer");
    return value.get<int>();
}

bool as_boolean(const json& value, const std::string& path) {
    if (!value.is_boolean()) fail(path, "expected true or false");
    return value.get<bool>();
}

Eigen::VectorXd as_vector(const json& value, const std::string& path) {
    if (!value.is_array()) fail(path, "expected an array of numbers");
    Eigen::VectorXd vector(static_cast<Eigen::Index>(value.size()));
    for (size_t i = 0; i < value.size(); ++i) {
        vector[static_cast<Eigen::Index>(i)] =
            as_number(value[i], path + "[" + std::to_string(i + 1) + "]");
    }
    return vector;
}

Eigen::MatrixXd as_matrix(const json& value, const std::string& path) {
    if (!value.is_array() || value.empty()) fail(path, "expected an array of rows");
    const size_t columns = value[0].is_array() ? value[0].size() : 0;
    Eigen::MatrixXd matrix(static_cast<Eigen::Index>(value.size()),
                           static_cast<Eigen::Index>(columns));
    for (size_t i = 0; i < value.size(); ++i) {
        const std::string row_path = path + "[" + std::to_string(i + 1) + "]";
        if (!value[i].is_array() || value[i].size() != columns) {
            fail(row_path, "expected a row of " + std::to_string(columns) + " numbers");
        }
        for (size_t j = 0; j < columns; ++j) {
            matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                as_number(value[i][j], row_path + "[" + std::to_string(j + 1) + "]");
        }
    }
    return matrix;
}

ComponentSpec parse_component(const json& object, int stress_dim,
                              const std::string& path) {
    reject_unknown_keys(object,
                        {"fixed_basis", "random_time_exponents", "sigma_gamma",
                         "beta", "threshold", "error_variance"},
                        path);
    ComponentSpec component;

    const json& basis = require(object, "fixed_basis", path);
    if (!basis.is_array()) fail(path + ".fixed_basis", "expected an array of strings");
    for (size_t q = 0; q < basis.size(); ++q) {
        const std::string term_path =
            path + ".fixed_basis[" + std::to_string(q + 1) + "]";
        if (!basis[q].is_string()) fail(term_path, "expected a monomial string");
        component.fixed_basis.push_back(
            parse_monomial(basis[q].get<std::string>(), stress_dim));
    }

    const json& exponents = require(object, "random_time_exponents", path);
    if (!exponents.is_array()) {
        fail(path + ".random_time_exponents", "expected an array of integers");
    }
    for (size_t m = 0; m < exponents.size(); ++m) {
        component.random_time_exponents.push_back(as_integer(
            exponents[m],
            path + ".random_time_exponents[" + std::to_string(m + 1) + "]"));
    }

    component.random_effects_covariance =
        as_matrix(require(object, "sigma_gamma", path), path + ".sigma_gamma");
    component.coefficients = as_vector(require(object, "beta", path), path + ".beta");
    component.threshold = as_number(require(object, "threshold", path), path + ".threshold");
    if (object.contains("error_variance")) {
        component.error_variance =
            as_number(object.at("error_variance"), path + ".error_variance");
    }
    return component;
}

OptimizerOptions parse_optimizer(const json& object, const std::string& path) {
    reject_unknown_keys(object,
                        {"grid_step", "max_iterations", "convergence_tol",
                         "equivalence_tol", "prune_threshold", "report_threshold",
                         "power", "max_grid_points"},
                        path);
    OptimizerOptions options;
    if (object.contains("grid_step")) {
        options.grid_step = as_number(object.at("grid_step"), path + ".grid_step");
    }
    if (object.contains("max_iterations")) {
        options.max_iterations =
            as_integer(object.at("max_iterations"), path + ".max_iterations");
    }
    if (object.contains("convergence_tol")) {
        options.convergence_tol =
            as_number(object.at("convergence_tol"), path + ".convergence_tol");
    }
    if (object.contains("equivalence_tol")) {
        options.equivalence_tol =
            as_number(object.at("equivalence_tol"), path + ".equivalence_tol");
    }
    if (object.contains("prune_threshold")) {
        options.prune_threshold =
            as_number(object.at("prune_threshold"), path + ".prune_threshold");
    }
    if (object.contains("report_threshold")) {
        options.report_threshold =
            as_number(object.at("report_threshold"), path + ".report_threshold");
    }
    if (object.contains("power")) {
        options.power = as_number(object.at("power"), path + ".power");
    }
    if (object.contains("max_grid_points")) {
        options.max_grid_points =
            as_integer(object.at("max_grid_points"), path + ".max_grid_points");
    }
    if (!(options.grid_step > 0.0) || options.max_iterations < 1 ||
        !(options.convergence_tol > 0.0) || !(options.equivalence_tol > 0.0) ||
        !(options.prune_threshold > 0.0) || !(options.report_threshold > 0.0) ||
        !(options.power > 0.0) || options.max_grid_points < 1) {
        fail(path, "optimizer settings must all be positive");
    }
    return options;
}

SweepSpec parse_sweep_section(const json& object, const std::string& path) {
    reject_unknown_keys(object, {"target", "values", "reoptimize"}, path);
    SweepSpec sweep;
    const json& target = require(object, "target", path);
    if (!target.is_string()) fail(path + ".target", "expected a selector string");
    sweep.target = target.get<std::string>();
    const Eigen::VectorXd values =
        as_vector(require(object, "values", path), path + ".values");
    sweep.values.assign(values.data(), values.data() + values.size());
    if (object.contains("reoptimize")) {
        sweep.reoptimize = as_boolean(object.at("reoptimize"), path + ".reoptimize");
    }
    return sweep;
}

}  // namespace

Monomial parse_monomial(const std::string& text, int stress_dim) {
    Monomial monomial;
    monomial.stress_exponents.assign(static_cast<size_t>(stress_dim), 0);

    std::string compact;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
    }
    if (compact.empty()) {
        throw ValidationError("monomial '" + text + "': empty term");
    }

    std::istringstream stream(compact);
    std::string factor;
    while (std::getline(stream, factor, '*')) {
        if (factor == "1") continue;

        int power = 1;
        const size_t caret = factor.find('^');
        std::string base = factor.substr(0, caret);
        if (caret != std::string::npos) {
            const std::string exponent = factor.substr(caret + 1);
            try {
                size_t used = 0;
                power = std::stoi(exponent, &used);
                if (used != exponent.size()) throw std::invalid_argument(exponent);
            } catch (const std::exception&) {
                throw ValidationError("monomial '" + text + "': bad exponent '" +
                                      exponent + "'");
            }
            if (power < 0) {
                throw ValidationError("monomial '" + text + "': negative exponent");
            }
        }

        if (base == "t") {
            monomial.time_exponent += power;
        } else if (base.size() >= 2 && base[0] == 'x') {
            int index = 0;
            try {
                size_t used = 0;
                index = std::stoi(base.substr(1), &used);
                if (used != base.size() - 1) throw std::invalid_argument(base);
            } catch (const std::exception&) {
                throw ValidationError("monomial '" + text + "': bad factor '" +
                                      factor + "'");
            }
            if (index < 1 || index > stress_dim) {
                throw ValidationError("monomial '" + text + "': stress variable x" +
                                      std::to_string(index) + " out of range 1.." +
                                      std::to_string(stress_dim));
            }
            monomial.stress_exponents[static_cast<size_t>(index - 1)] += power;
        } else {
            throw ValidationError("monomial '" + text + "': bad factor '" + factor +
                                  "' (expected x<j>, t, or 1)");
        }
    }
    return monomial;
}

std::string monomial_to_string(const Monomial& monomial) {
    std::string text;
    for (size_t j = 0; j < monomial.stress_exponents.size(); ++j) {
        if (monomial.stress_exponents[j] == 0) continue;
        if (!text.empty()) text += '*';
        text += "x" + std::to_string(j + 1);
        if (monomial.stress_exponents[j] > 1) {
            text += "^" + std::to_string(monomial.stress_exponents[j]);
        }
    }
    if (monomial.time_exponent > 0) {
        if (!text.empty()) text += '*';
        text += "t";
        if (monomial.time_exponent > 1) {
            text += "^" + std::to_string(monomial.time_exponent);
        }
    }
    return text.empty() ? "1" : text;
}

ProblemConfig parse_problem_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& error) {
        throw ValidationError(std::string("config: not valid JSON: ") + error.what());
    }
    if (!doc.is_object()) throw ValidationError("config: top level must be an object");

    reject_unknown_keys(doc,
                        {"stress_dim", "design_region", "time_plan", "error_variance",
                         "use_condition", "system_s", "alpha", "t_max", "components",
                         "optimizer", "sweep"},
                        "top level");

    ProblemConfig config;
    ModelSpec& model = config.model;
    model.stress_dim = as_integer(require(doc, "stress_dim", "top level"), "stress_dim");
    model.time_plan = as_vector(require(doc, "time_plan", "top level"), "time_plan");
    model.error_variance =
        as_number(require(doc, "error_variance", "top level"), "error_variance");
    model.use_condition =
        as_vector(require(doc, "use_condition", "top level"), "use_condition");
    model.required_failures =
        as_integer(require(doc, "system_s", "top level"), "system_s");
    model.quantile_level = as_number(require(doc, "alpha", "top level"), "alpha");
    if (doc.contains("t_max")) {
        model.bracket_horizon = as_number(doc.at("t_max"), "t_max");
    }

    if (doc.contains("design_region")) {
        const json& region = doc.at("design_region");
        if (!region.is_array()) {
            fail("design_region", "expected an array of [lower, upper] pairs");
        }
        for (size_t j = 0; j < region.size(); ++j) {
            const std::string axis_path =
                "design_region[" + std::to_string(j + 1) + "]";
            const Eigen::VectorXd bounds = as_vector(region[j], axis_path);
            if (bounds.size() != 2) fail(axis_path, "expected [lower, upper]");
            model.design_region.push_back({bounds[0], bounds[1]});
        }
    } else if (model.stress_dim >= 1) {
        model.design_region.assign(static_cast<size_t>(model.stress_dim), {0.0, 1.0});
    }

    const json& components = require(doc, "components", "top level");
    if (!components.is_array() || components.empty()) {
        fail("components", "expected a nonempty array");
    }
    for (size_t l = 0; l < components.size(); ++l) {
        const std::string path = "components[" + std::to_string(l + 1) + "]";
        if (!components[l].is_object()) fail(path, "expected an object");
        model.components.push_back(
            parse_component(components[l], model.stress_dim, path));
    }

    if (doc.contains("optimizer")) {
        const json& optimizer = doc.at("optimizer");
        if (!optimizer.is_object()) fail("optimizer", "expected an object");
        config.optimizer = parse_optimizer(optimizer, "optimizer");
    }
    if (doc.contains("sweep")) {
        const json& sweep_section = doc.at("sweep");
        if (!sweep_section.is_object()) fail("sweep", "expected an object");
        config.sweep = parse_sweep_section(sweep_section, "sweep");
    }

    ensure_valid(model);
    if (config.sweep) parse_sweep_target(config.sweep->target, model);
    return config;
}

ProblemConfig load_problem_config(const std::string& path) {
    std::ifstream input(path);
    if (!input) throw ValidationError("config: cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << input.rdbuf();
    return parse_problem_config(buffer.str());
}

std::string format_full(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string design_csv_text(const ApproximateDesign& design) {
    std::ostringstream out;
    const Eigen::Index d = design.points.empty() ? 0 : design.points.front().size();
    for (Eigen::Index j = 0; j < d; ++j) {
        out << (j ? "," : "") << "x_" << (j + 1);
    }
    out << ",weight\n";
    for (size_t i = 0; i < design.points.size(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            out << (j ? "," : "") << format_full(design.points[i][j]);
        }
        out << "," << format_full(design.weights[static_cast<Eigen::Index>(i)]) << "\n";
    }
    return out.str();
}

void write_design_csv(const std::string& path, const ApproximateDesign& design) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out << design_csv_text(design);
}

ApproximateDesign read_design_csv(const std::string& path, int stress_dim) {
    std::ifstream input(path);
    if (!input) throw ValidationError("design csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(input, line)) {
        throw ValidationError("design csv '" + path + "': empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string expected_header;
    for (int j = 0; j < stress_dim; ++j) {
        expected_header += "x_" + std::to_string(j + 1) + ",";
    }
    expected_header += "weight";
    if (line != expected_header) {
        throw ValidationError("design csv '" + path + "': header '" + line +
                              "' does not match '" + expected_header + "'");
    }

    ApproximateDesign design;
    std::vector<double> weights;
    int row = 1;
    while (std::getline(input, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream cells(line);
        std::string cell;
        Eigen::VectorXd point(stress_dim);
        for (int j = 0; j <= stress_dim; ++j) {
            if (!std::getline(cells, cell, ',')) {
                throw ValidationError("design csv '" + path + "': row " +
                                      std::to_string(row) + " has too few columns");
            }
            char* end = nullptr;
            const double value = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size() || cell.empty()) {
                throw ValidationError("design csv '" + path + "': row " +
                                      std::to_string(row) + ": bad number '" + cell +
                                      "'");
            }
            if (j < stress_dim) {
                point[j] = value;
            } else {
                weights.push_back(value);
            }
        }
        if (std::getline(cells, cell, ',')) {
            throw ValidationError("design csv '" + path + "': row " +
                                  std::to_string(row) + " has too many columns");
        }
        design.points.push_back(std::move(point));
    }

    design.weights.resize(static_cast<Eigen::Index>(weights.size()));
    for (size_t i = 0; i < weights.size(); ++i) {
        design.weights[static_cast<Eigen::Index>(i)] = weights[i];
    }
    validate_design(design, stress_dim);
    return design;
}

std::string sweep_csv_text(const SweepResult& result, int component_count,
                           bool reoptimized) {
    std::ostringstream out;
    out << "value,t_alpha";
    for (size_t i = 0; i < result.support.size(); ++i) out << ",w_" << (i + 1);
    out << ",eff_star,eff_bar";
    for (int l = 0; l < component_count; ++l) out << ",F_T" << (l + 1);
    out << ",status\n";

    for (const SweepRow& row : result.rows) {
        out << format_full(row.value) << "," << format_full(row.quantile_time);
        for (size_t i = 0; i < result.support.size(); ++i) {
            out << ",";
            if (i < row.weights.size()) out << format_full(row.weights[i]);
        }
        const bool has_efficiencies = reoptimized && !row.weights.empty();
        out << "," << (has_efficiencies ? format_full(row.efficiency_star) : "");
        out << "," << (has_efficiencies ? format_full(row.efficiency_bar) : "");
        for (int l = 0; l < component_count; ++l) {
            out << ",";
            if (l < row.marginal_cdfs.size()) out << format_full(row.marginal_cdfs[l]);
        }
        std::string status = row.status;
        for (char& c : status) {
            if (c == ',' || c == '\n') c = ';';
        }
        out << "," << status << "\n";
    }
    return out.str();
}

}  // namespace adt
