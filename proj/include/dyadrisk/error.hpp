#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dyadrisk {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File-format failure carrying the offending file and 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::string file, std::size_t line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what),
          file_(std::move(file)), line_(line) {}

    const std::string& file() const { return file_; }
    std::size_t line() const { return line_; }

private:
    std::string file_;
    std::size_t line_;
};

struct Issue {
    std::string session_id;   // empty when not session-scoped
    std::string field;
    std::string message;

    std::string to_string() const;
};

// Accumulates every problem found during corpus validation. Nothing is
// dropped: callers decide whether errors are fatal.
struct ValidationReport {
    std::vector<Issue> errors;
    std::vector<Issue> warnings;

    bool ok() const { return errors.empty(); }
    void error(std::string session, std::string field, std::string message) {
        errors.push_back({std::move(session), std::move(field), std::move(message)});
    }
    void warn(std::string session, std::string field, std::string message) {
        warnings.push_back({std::move(session), std::move(field), std::move(message)});
    }
    void merge(const ValidationReport& other);
    std::string to_string() const;
};

class ValidationError : public Error {
public:
    explicit ValidationError(ValidationReport report)
        : Error(report.to_string()), report_(std::move(report)) {}

    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

}  // namespace dyadrisk
