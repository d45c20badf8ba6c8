#pragma once

#include <stdexcept>
#include <string>

namespace ktree {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Degree set / singularity solver.
struct InvalidOmega : Error { using Error::Error; };
struct DegenerateModel : Error { using Error::Error; };
struct ZeroMean : Error { using Error::Error; };

// Enumeration.
struct DivisibilityViolation : Error { using Error::Error; };
struct UnsupportedOmega : Error { using Error::Error; };

// Tree structures and bijections.
struct InvalidCodingTree : Error { using Error::Error; };
struct NotAKTree : Error { using Error::Error; };
struct DisconnectedRoot : Error { using Error::Error; };
struct BadOutdegree : Error { using Error::Error; };

// Samplers.
struct InfeasibleSize : Error { using Error::Error; };
struct StrategyTimeout : Error { using Error::Error; };
struct CapExceeded : Error { using Error::Error; };

// Metrics.
struct LemmaViolation : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };

}  // namespace ktree
