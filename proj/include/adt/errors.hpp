#ifndef ADT_ERRORS_HPP
#define ADT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace adt {

// Invalid problem description or design: bad config keys, violated model
// invariants, malformed design files. CLI maps these to exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested quantile level cannot be reached: F_T saturates below alpha
// within the bracketing horizon. CLI maps this to exit code 3.
struct QuantileUnattainable : std::runtime_error {
    explicit QuantileUnattainable(const std::string& msg) : std::runtime_error(msg) {}
};

// An information block is singular (or conditioned worse than 1e12) for the
// design being evaluated.
struct SingularInformation : std::runtime_error {
    explicit SingularInformation(const std::string& msg) : std::runtime_error(msg) {}
};

// The factorized fast path was called on a system that does not satisfy its
// preconditions (identical components with a product-type basis).
struct PreconditionNotMet : std::runtime_error {
    explicit PreconditionNotMet(const std::string& msg) : std::runtime_error(msg) {}
};

// Candidate grid would exceed the configured size cap.
struct GridTooLarge : std::runtime_error {
    explicit GridTooLarge(const std::string& msg) : std::runtime_error(msg) {}
};

// Consolidation removed every support point.
struct EmptySupport : std::runtime_error {
    explicit EmptySupport(const std::string& msg) : std::runtime_error(msg) {}
};

// The uniform starting design on the candidate grid is already singular.
struct Infeasible : std::runtime_error {
    explicit Infeasible(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace adt

#endif
