#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace synrl {

// Bad shapes, bad configs, malformed files. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite loss during training. Maps to CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t iteration, std::size_t layer, const std::string& what)
        : std::runtime_error(what), iteration_(iteration), layer_(layer) {}

    std::size_t iteration() const noexcept { return iteration_; }
    // Index of the first layer whose weights or activations went non-finite.
    std::size_t layer() const noexcept { return layer_; }

private:
    std::size_t iteration_;
    std::size_t layer_;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDivergence = 3;

}  // namespace synrl
