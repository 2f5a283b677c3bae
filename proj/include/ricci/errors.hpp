#pragma once

#include <stdexcept>
#include <string>

namespace ricci {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration value (including CFL violations).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A metric node is not positive definite or is too badly conditioned.
class DegenerateMetricError : public Error {
 public:
  DegenerateMetricError(const std::string& what, long node) : Error(what), node_(node) {}
  long node() const { return node_; }

 private:
  long node_;
};

/// Sectional curvature requested on a plane spanned by dependent vectors.
class DegeneratePlaneError : public Error {
 public:
  using Error::Error;
};

/// A warped profile has w <= 0 at an interior node (the flow has pinched).
class PinchedProfileError : public Error {
 public:
  PinchedProfileError(const std::string& what, long node) : Error(what), node_(node) {}
  long node() const { return node_; }

 private:
  long node_;
};

/// NaN/Inf appeared in the evolving state.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// The grid cannot resolve the requested structure.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// A path, ball or point lies outside the chart.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Curvature scale requested at a point with R <= 0.
class NotHighCurvatureError : public Error {
 public:
  using Error::Error;
};

/// A profile family parameter produced a geometry that fails its certificate.
class ConstructionError : public Error {
 public:
  ConstructionError(const std::string& what, long node) : Error(what), node_(node) {}
  long node() const { return node_; }

 private:
  long node_;
};

/// The cut sphere is not inside the certified neck.
class UnsafeSurgeryError : public Error {
 public:
  using Error::Error;
};

/// The glued profile grossly violates the curvature certificate.
class BlendFailureError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or configuration.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace ricci
