#pragma once

#include <stdexcept>
#include <string>

namespace nlbt {

// Violated theorem hypotheses: non-Hurwitz linearization, repeated or zero Hankel values,
// resonant k-way Lyapunov systems.
struct hypothesis_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct resource_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Newton iteration did not converge; usually the point is outside the region of validity.
struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nlbt
