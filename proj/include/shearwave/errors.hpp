#pragma once

#include <stdexcept>
#include <string>

namespace shearwave {

/// Adaptive step control could not reach the requested tolerance.
struct IntegrationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A computed Riccati solution left its tanh sub/super-solution envelope.
/// This signals a solver bug and must abort the computation.
struct BoundViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operation requires a wavevector with k1 != 0.
struct ZeroFirstComponent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Calibration produced sigma <= 0: gravity too strong or flow too slow.
struct NotCapillary : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested mode indices violate the Nyquist bound of the grid.
struct AliasError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The flattening is singular: 1 + eta/d <= 0 somewhere.
struct DegenerateSurface : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SymmetryViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An amplitude targets a wavevector outside the resonant set.
struct NonResonantMode : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Config schema violation; carries the offending field path.
struct ConfigError : std::runtime_error {
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), field_path(std::move(path)) {}
  std::string field_path;
};

}  // namespace shearwave
