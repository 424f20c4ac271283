#ifndef USC_DIMER_ERRORS_HPP
#define USC_DIMER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace usc_dimer {

/// Broad failure classes. The CLI maps each to a distinct exit status.
enum class ErrorKind { config = 1, integration = 2, cutoff = 3, io = 4 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

/// Thrown when the adaptive controller drives the step below its floor.
class StepSizeUnderflow : public Error {
public:
    StepSizeUnderflow(const std::string& what, double time)
        : Error(ErrorKind::integration, what), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// Probability leaked into the Fock-cutoff boundary beyond tolerance.
class UnconvergedCutoff : public Error {
public:
    UnconvergedCutoff(const std::string& what, double leakage)
        : Error(ErrorKind::cutoff, what), leakage_(leakage) {}

    double leakage() const noexcept { return leakage_; }

private:
    double leakage_;
};

class DegenerateNorm : public Error {
public:
    explicit DegenerateNorm(const std::string& what) : Error(ErrorKind::integration, what) {}
};

class EmptySeries : public Error {
public:
    explicit EmptySeries(const std::string& what) : Error(ErrorKind::integration, what) {}
};

class NotApplicable : public Error {
public:
    explicit NotApplicable(const std::string& what) : Error(ErrorKind::config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

} // namespace usc_dimer

#endif
