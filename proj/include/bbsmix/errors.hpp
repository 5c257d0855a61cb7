#pragma once

#include <stdexcept>
#include <string>

namespace bbsmix {

// Bad user input (malformed file, missing column, invalid value). CLI exit 1.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fit could not be carried out or did not converge. CLI exit 2.
struct FitError : std::runtime_error {
    enum class Kind {
        not_identifiable,   // m = 0 with a free logit component
        over_censored,      // m/n beyond the saturation guard
        too_few_uncensored, // fewer uncensored rows than continuous parameters
        diverged,
    };

    FitError(Kind kind_, const std::string& what_) : std::runtime_error(what_), kind(kind_) {}

    Kind kind;
};

}  // namespace bbsmix
