#pragma once

#include <stdexcept>
#include <string>

namespace tsync {

// Error taxonomy mirrored by the CLI exit codes: config=2, io=3, numeric=4.
class Error : public std::runtime_error {
public:
    enum class Kind { config, io, numeric };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(Kind::config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(Kind::io, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(Kind::numeric, what) {}
};

}  // namespace tsync
