#pragma once

#include <stdexcept>
#include <string>

namespace spraypaint {

// Nozzle ray does not hit the surface within the search bracket.
class NoIntersection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Ray (almost) parallel to the tangent plane at the intersection point.
class DegenerateTangent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Spray-task error grew beyond the divergence threshold during a run.
class Diverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spraypaint
