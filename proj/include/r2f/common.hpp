#ifndef R2F_COMMON_HPP
#define R2F_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace r2f
{

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec2i = Eigen::Vector2i;

// Error taxonomy. Every failure the library reports is one of these; callers
// that only care about "something went wrong" can catch r2f::Error.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error
{
public:
  using Error::Error;
};

class UnknownConcept : public Error
{
public:
  using Error::Error;
};

class RenderError : public Error
{
public:
  using Error::Error;
};

class DisconnectedError : public Error
{
public:
  using Error::Error;
};

class ResourceLimit : public Error
{
public:
  using Error::Error;
};

class UnreachableGoal : public Error
{
public:
  using Error::Error;
};

class NoPath : public Error
{
public:
  using Error::Error;
};

class Unparseable : public Error
{
public:
  using Error::Error;
};

class ConfigError : public Error
{
public:
  using Error::Error;
};

/// 64-bit FNV-1a over the bytes of `text`.
constexpr std::uint64_t fnv1a64(std::string_view text)
{
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (char c : text) {
    hash ^= static_cast<std::uint8_t>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

/// splitmix64 finaliser; used to decorrelate combined seeds.
constexpr std::uint64_t mix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive a stream seed from (base seed, step, purpose). Every stochastic draw
/// in an episode goes through this so that results never depend on call order.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t step, std::uint64_t purpose)
{
  return mix64(mix64(base ^ mix64(step)) ^ mix64(purpose + 0x51ed27ULL));
}

constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wrap an angle in degrees into (-180, 180].
double wrap_degrees(double deg);

}  // namespace r2f

#endif  // R2F_COMMON_HPP
