#pragma once

#include <stdexcept>
#include <string>

namespace mlq {

/// Invalid model or experiment parameter. `key()` names the offending field.
class ParameterError : public std::invalid_argument {
public:
    ParameterError(std::string key, const std::string& what)
        : std::invalid_argument(key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// A path or epoch sequence was queried outside the interval it covers.
class CoverageError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

}  // namespace mlq
