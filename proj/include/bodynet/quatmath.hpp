#pragma once

// Quaternion arithmetic for orientation tracking.
//
// Convention: Hamilton product, rotations applied right-to-left, so the
// rotation a * b applies b first and then a. Every angle crossing the public
// surface is in degrees.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "bodynet/errors.hpp"

namespace bodynet {

struct Vector3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vector3 operator+(const Vector3& a, const Vector3& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend constexpr Vector3 operator-(const Vector3& a, const Vector3& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend constexpr Vector3 operator*(double s, const Vector3& v) { return {s * v.x, s * v.y, s * v.z}; }
  friend constexpr bool operator==(const Vector3&, const Vector3&) = default;
};

constexpr double dot(const Vector3& a, const Vector3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vector3 cross(const Vector3& a, const Vector3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vector3& v) { return std::sqrt(dot(v, v)); }

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Unit quaternion w + xi + yj + zk. Construction always renormalizes, so the
// norm invariant holds for every value of this type.
class UnitQuaternion {
 public:
  constexpr UnitQuaternion() = default;

  UnitQuaternion(double w, double x, double y, double z) {
    if (!std::isfinite(w) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw InvalidInput("quaternion has non-finite components");
    }
    const double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (n < 1e-12) {
      throw InvalidInput("quaternion has zero norm");
    }
    // Already-normalized input passes through untouched, so renormalizing is idempotent.
    if (std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) {
      w_ = w, x_ = x, y_ = y, z_ = z;
    } else {
      w_ = w / n, x_ = x / n, y_ = y / n, z_ = z / n;
    }
  }

  static constexpr UnitQuaternion identity() { return {}; }

  constexpr double w() const { return w_; }
  constexpr double x() const { return x_; }
  constexpr double y() const { return y_; }
  constexpr double z() const { return z_; }

  double norm() const { return std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_); }

  // Same rotation, opposite hemisphere.
  UnitQuaternion operator-() const { return negated(); }

  friend constexpr bool operator==(const UnitQuaternion&, const UnitQuaternion&) = default;

 private:
  constexpr UnitQuaternion negated() const {
    UnitQuaternion q;
    q.w_ = -w_, q.x_ = -x_, q.y_ = -y_, q.z_ = -z_;
    return q;
  }

  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

inline std::ostream& operator<<(std::ostream& os, const UnitQuaternion& q) {
  return os << '(' << q.w() << ", " << q.x() << ", " << q.y() << ", " << q.z() << ')';
}

// Four-component inner product.
constexpr double dot4(const UnitQuaternion& a, const UnitQuaternion& b) {
  return a.w() * b.w() + a.x() * b.x() + a.y() * b.y() + a.z() * b.z();
}

inline UnitQuaternion hamilton_product(const UnitQuaternion& a, const UnitQuaternion& b) {
  return {a.w() * b.w() - a.x() * b.x() - a.y() * b.y() - a.z() * b.z(),
          a.w() * b.x() + a.x() * b.w() + a.y() * b.z() - a.z() * b.y(),
          a.w() * b.y() - a.x() * b.z() + a.y() * b.w() + a.z() * b.x(),
          a.w() * b.z() + a.x() * b.y() - a.y() * b.x() + a.z() * b.w()};
}

inline UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) { return hamilton_product(a, b); }

inline UnitQuaternion inverse(const UnitQuaternion& q) { return {q.w(), -q.x(), -q.y(), -q.z()}; }

// Orientation of a sensor relative to its calibration snapshot: q * q_calib^-1.
// The calibration reading itself maps to the identity exactly.
inline UnitQuaternion relative_to_calibration(const UnitQuaternion& q, const UnitQuaternion& q_calib) {
  if (q == q_calib) {
    return UnitQuaternion::identity();
  }
  return q * inverse(q_calib);
}

// ENU sensor frame to the left-handed avatar frame: (q0, q1, q2, q3) -> (q0, q2, -q3, -q1).
inline UnitQuaternion enu_to_left_handed(const UnitQuaternion& q) { return {q.w(), q.y(), -q.z(), -q.x()}; }

namespace detail {

inline double ordered_sum(double a, double b, double c, double d) {
  std::array<double, 4> v{a, b, c, d};
  std::sort(v.begin(), v.end());
  return ((v[0] + v[1]) + v[2]) + v[3];
}

}  // namespace detail

// Shortest rotation angle between two segment orientations,
// 2 * acos(min(|r_a . r_b|, 1)) in degrees.
//
// Evaluated through the chord identity acos(d) = 2 * atan2(|a - b|, |a + b|)
// (b taken in a's hemisphere), which equals the acos form for unit inputs but
// stays accurate near 0 deg where acos loses half the significant digits.
//
// Every sum runs over its terms in sorted order, so the result is bit-for-bit
// unchanged when the same signed component permutation is applied to both
// arguments (the avatar-frame map is one).
inline double shortest_angle_deg(const UnitQuaternion& r_a, const UnitQuaternion& r_b) {
  const double dot = detail::ordered_sum(r_a.w() * r_b.w(), r_a.x() * r_b.x(), r_a.y() * r_b.y(), r_a.z() * r_b.z());
  const double s = dot < 0.0 ? -1.0 : 1.0;
  const double dw = r_a.w() - s * r_b.w(), dx = r_a.x() - s * r_b.x();
  const double dy = r_a.y() - s * r_b.y(), dz = r_a.z() - s * r_b.z();
  const double pw = r_a.w() + s * r_b.w(), px = r_a.x() + s * r_b.x();
  const double py = r_a.y() + s * r_b.y(), pz = r_a.z() + s * r_b.z();
  const double chord = std::sqrt(detail::ordered_sum(dw * dw, dx * dx, dy * dy, dz * dz));
  const double span = std::sqrt(detail::ordered_sum(pw * pw, px * px, py * py, pz * pz));
  return rad_to_deg(4.0 * std::atan2(chord, span));
}

// Literal form of the shortest-angle formula, kept as an independent route for tests.
inline double shortest_angle_deg_acos(const UnitQuaternion& r_a, const UnitQuaternion& r_b) {
  return rad_to_deg(2.0 * std::acos(std::min(std::abs(dot4(r_a, r_b)), 1.0)));
}

// Angle between two direction vectors, acos(u.v / |u||v|) in degrees, in [0, 180].
// atan2(|u x v|, u . v) is the same quantity without a clamped acos argument.
inline double vector_angle_deg(const Vector3& u, const Vector3& v) {
  const double nu = norm(u);
  const double nv = norm(v);
  if (!std::isfinite(nu) || !std::isfinite(nv)) {
    throw InvalidInput("vector has non-finite components");
  }
  if (nu == 0.0 || nv == 0.0) {
    throw InvalidInput("angle undefined for a zero vector");
  }
  return rad_to_deg(std::atan2(norm(cross(u, v)), dot(u, v)));
}

// Rotation of `deg` degrees about `axis` (normalized internally).
inline UnitQuaternion from_axis_angle(const Vector3& axis, double deg) {
  const double n = norm(axis);
  if (!std::isfinite(n) || !std::isfinite(deg)) {
    throw InvalidInput("axis-angle has non-finite components");
  }
  if (n == 0.0) {
    throw InvalidInput("rotation axis is the zero vector");
  }
  const double half = deg_to_rad(deg) / 2.0;
  const double s = std::sin(half) / n;
  return {std::cos(half), s * axis.x, s * axis.y, s * axis.z};
}

// Rotates v by q (q v q^-1).
inline Vector3 rotate(const UnitQuaternion& q, const Vector3& v) {
  const Vector3 u{q.x(), q.y(), q.z()};
  const Vector3 t = 2.0 * cross(u, v);
  return v + q.w() * t + cross(u, t);
}

// Below this 4D arc (radians) slerp degenerates to normalized lerp.
inline constexpr double kSlerpLinearThreshold = 1e-6;

// Constant-angular-velocity interpolation along the shorter arc; t in [0, 1].
inline UnitQuaternion slerp(const UnitQuaternion& a, const UnitQuaternion& b, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw InvalidInput("slerp parameter outside [0, 1]");
  }
  const double s = dot4(a, b) < 0.0 ? -1.0 : 1.0;
  const double bw = s * b.w(), bx = s * b.x(), by = s * b.y(), bz = s * b.z();
  const double dw = a.w() - bw, dx = a.x() - bx, dy = a.y() - by, dz = a.z() - bz;
  const double pw = a.w() + bw, px = a.x() + bx, py = a.y() + by, pz = a.z() + bz;
  const double arc = 2.0 * std::atan2(std::sqrt(dw * dw + dx * dx + dy * dy + dz * dz),
                                      std::sqrt(pw * pw + px * px + py * py + pz * pz));
  double ka = 1.0 - t;
  double kb = t;
  if (arc >= kSlerpLinearThreshold) {
    const double sin_arc = std::sin(arc);
    ka = std::sin((1.0 - t) * arc) / sin_arc;
    kb = std::sin(t * arc) / sin_arc;
  }
  return {ka * a.w() + kb * bw, ka * a.x() + kb * bx, ka * a.y() + kb * by, ka * a.z() + kb * bz};
}

}  // namespace bodynet
