#pragma once

#include <stdexcept>
#include <string>

namespace nslab {

// Exit-code mapping used by the CLI: ConfigError/RuntimeError -> 1,
// HypothesisError -> 2, BlowUpError -> 3.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RuntimeError : std::runtime_error {
    explicit RuntimeError(const std::string& what) : std::runtime_error(what) {}
};

struct HypothesisError : std::runtime_error {
    explicit HypothesisError(const std::string& what) : std::runtime_error(what) {}
};

struct BlowUpError : std::runtime_error {
    explicit BlowUpError(const std::string& what) : std::runtime_error(what) {}
};

// Density undershoot beyond the clipping tolerance; a form of blow-up.
struct NegativeDensityError : BlowUpError {
    explicit NegativeDensityError(const std::string& what) : BlowUpError(what) {}
};

} // namespace nslab
