#pragma once

#include <stdexcept>
#include <string>

namespace ntnpos {

/// Invalid scenario configuration; `field()` holds the dotted path of the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// An anchor sits at or below the UE horizon.
class VisibilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Normal equations or information matrix are singular for the given geometry.
class DegenerateGeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Statistics requested over a sample set that has no usable (non-degenerate) values.
class EmptyStatisticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ntnpos
