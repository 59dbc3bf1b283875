#pragma once

#include <stdexcept>
#include <string>

namespace lhf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: bad configuration, violated precondition, shape mismatch.
class InvalidArgument : public Error
{
  public:
    using Error::Error;
};

/// An iterative or adaptive procedure did not reach its tolerance.
class ConvergenceError : public Error
{
  public:
    using Error::Error;
};

/// A post-condition check on computed data failed.
class VerificationError : public Error
{
  public:
    using Error::Error;
};

/// An iterate left the ball B_M on which the fixed-point map contracts.
class BallExitError : public Error
{
  public:
    using Error::Error;
};

inline void require(bool cond, const std::string& msg)
{
    if (!cond) {
        throw InvalidArgument(msg);
    }
}

} // namespace lhf
