#pragma once

#include <stdexcept>
#include <string>

namespace attitude {

// Base of every error raised by the library. `kind()` is the stable class
// name written into solver reports.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define ATTITUDE_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name, what) {}      \
    }

// so3
ATTITUDE_DEFINE_ERROR(NotSkewSymmetric);
ATTITUDE_DEFINE_ERROR(AngleNearPi);
ATTITUDE_DEFINE_ERROR(NotNormalized);

// dynamics
ATTITUDE_DEFINE_ERROR(NewtonDiverged);
ATTITUDE_DEFINE_ERROR(SingularNewtonStep);
ATTITUDE_DEFINE_ERROR(SingularTraceOperator);
ATTITUDE_DEFINE_ERROR(InvalidInertia);

// optimality
ATTITUDE_DEFINE_ERROR(DivisionByZeroMomentum);

// shooting
ATTITUDE_DEFINE_ERROR(MaxIterationsExceeded);
ATTITUDE_DEFINE_ERROR(SingularJacobian);
ATTITUDE_DEFINE_ERROR(ActiveSetCycling);

// io
ATTITUDE_DEFINE_ERROR(ParseError);
ATTITUDE_DEFINE_ERROR(ValidationError);
ATTITUDE_DEFINE_ERROR(IoError);

#undef ATTITUDE_DEFINE_ERROR

// Raised when a per-step computation fails inside the shooting loop; carries
// the offending step index and the class name of the underlying failure.
class DynamicsFailure : public Error {
public:
    DynamicsFailure(int step, const Error& cause)
        : Error("DynamicsFailure",
                "step " + std::to_string(step) + ": " + cause.kind() + ": " + cause.what()),
          step_(step), cause_kind_(cause.kind()) {}

    int step() const noexcept { return step_; }
    const std::string& cause_kind() const noexcept { return cause_kind_; }

private:
    int step_;
    std::string cause_kind_;
};

}  // namespace attitude
