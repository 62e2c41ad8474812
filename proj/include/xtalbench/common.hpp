#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace xtalbench {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Repository-wide units: lengths in angstrom, angles in degrees, mass in amu,
// density in g/cm^3. Supercell radii are carried in nanometres and converted
// at the point of use.
inline constexpr double kAngstromPerNanometre = 10.0;

inline constexpr double nm_to_angstrom(double nm) { return nm * kAngstromPerNanometre; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Atom {
  std::string element;
  Vec3 position = Vec3::Zero();

  bool operator==(const Atom&) const = default;
};

}  // namespace xtalbench
