#pragma once

#include <stdexcept>
#include <string>

namespace ips {

// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class DegeneratePointError : public Error { public: using Error::Error; };
class InvalidScenarioError : public Error { public: using Error::Error; };
class NeedleError : public Error { public: using Error::Error; };
class ProximityError : public Error { public: using Error::Error; };
class ResonanceError : public Error { public: using Error::Error; };
class ResolutionError : public Error { public: using Error::Error; };

// Boundary-condition residual above the hard limit.
class NonconvergenceError : public Error { public: using Error::Error; };

// Condition estimate too large: k^2 is likely close to an interior eigenvalue.
class NearEigenvalueError : public Error { public: using Error::Error; };

// Needle fit still above the residual limit at the maximum order.
class ApproximationError : public Error { public: using Error::Error; };

}  // namespace ips
