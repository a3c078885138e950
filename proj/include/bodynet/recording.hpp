#pragma once

// Recording CSV: one row per delivered sample.
//
//   timestamp_us,sensor_id,seq,qw,qx,qy,qz,status
//
// Quaternion components are written with 9 significant digits. Frames built
// through make_frame() are already rounded to that precision, so a
// write/read cycle reproduces them bit for bit.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "bodynet/errors.hpp"
#include "bodynet/quatmath.hpp"
#include "bodynet/skeleton.hpp"

namespace bodynet {

struct RecordingFrame {
  std::int64_t timestamp_us = 0;
  SensorId sensor_id = 0;
  std::int64_t seq = 0;
  double qw = 1.0;
  double qx = 0.0;
  double qy = 0.0;
  double qz = 0.0;
  int status = 3;

  UnitQuaternion quaternion() const { return {qw, qx, qy, qz}; }
  friend bool operator==(const RecordingFrame&, const RecordingFrame&) = default;
};

// Rounds each component to 9 significant digits.
double round_to_csv(double v);
RecordingFrame make_frame(std::int64_t timestamp_us, SensorId sensor, std::int64_t seq, const UnitQuaternion& q,
                          int status = 3);

// Throws ValidationError naming sensor and seq: quaternion off unit norm by
// more than 1e-6, status outside 0..3, timestamp regression or non-increasing
// seq within a sensor.
void validate_recording(const std::vector<RecordingFrame>& frames);

void write_recording(std::ostream& os, const std::vector<RecordingFrame>& frames);
void write_recording(const std::filesystem::path& path, const std::vector<RecordingFrame>& frames);

// Throws ParseError (with line number) for malformed rows and ValidationError
// (with line number) for invariant violations.
std::vector<RecordingFrame> read_recording(std::istream& is);
std::vector<RecordingFrame> read_recording(const std::filesystem::path& path);

}  // namespace bodynet
