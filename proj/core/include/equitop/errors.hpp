#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace equitop {

/// Error category; maps 1:1 onto CLI exit codes (input → 2, domain → 3,
/// internal → 1).
enum class ErrorKind { input, domain, internal };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// -- input errors (bad files, bad config; exit code 2) --

struct InputError : Error {
    explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

struct SchemaError : InputError {
    SchemaError(const std::string& what, std::string column)
        : InputError(what), column(std::move(column)) {}
    std::string column;
};

struct ValidationError : InputError {
    ValidationError(const std::string& what, std::size_t line)
        : InputError(what), line(line) {}
    std::size_t line;  // 1-based, header = line 1
};

struct UniquenessError : InputError {
    using InputError::InputError;
};

struct ConfigError : InputError {
    using InputError::InputError;
};

struct BindingError : InputError {
    BindingError(const std::string& what, std::vector<std::string> missing_dates)
        : InputError(what), missing_dates(std::move(missing_dates)) {}
    std::vector<std::string> missing_dates;
};

// -- domain errors (valid inputs, infeasible request; exit code 3) --

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

struct LookupError : DomainError {
    using DomainError::DomainError;
};

struct ComputationError : DomainError {
    using DomainError::DomainError;
};

struct ShortfallError : DomainError {
    ShortfallError(const std::string& what,
                   std::vector<std::pair<std::string, std::size_t>> deficits)
        : DomainError(what), deficits(std::move(deficits)) {}
    /// (group, missing slot count), one entry per short group.
    std::vector<std::pair<std::string, std::size_t>> deficits;
};

}  // namespace equitop
