#pragma once

#include <stdexcept>
#include <string>

namespace biasaudit {

/// Malformed or inconsistent input (schema documents, score rows, config values).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem-level failures; message carries the path involved.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An attribute has no subgroup with both comparison sides populated.
class NotMeasurableError : public std::runtime_error {
public:
    explicit NotMeasurableError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A per-bucket operation was asked to work on an empty score multiset.
/// Callers that average over subgroups catch this condition up front and
/// count the subgroup as skipped instead.
class EmptyBucketError : public std::runtime_error {
public:
    explicit EmptyBucketError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace biasaudit
