#include "bodynet/recording.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

namespace bodynet {

namespace {

constexpr std::string_view kHeader = "timestamp_us,sensor_id,seq,qw,qx,qy,qz,status";

std::string format_component(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 9);
  return std::string(buf.data(), end);
}

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* name) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw ParseError(line, std::string("bad ") + name + " '" + std::string(text) + "'");
  }
  return value;
}

struct Progress {
  std::int64_t timestamp_us;
  std::int64_t seq;
};

void check_frame(const RecordingFrame& f, std::map<SensorId, Progress>& seen, const std::string& where) {
  const std::string who = "sensor " + std::to_string(f.sensor_id) + " seq " + std::to_string(f.seq);
  const double n = std::sqrt(f.qw * f.qw + f.qx * f.qx + f.qy * f.qy + f.qz * f.qz);
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) {
    throw ValidationError(where + who + ": quaternion is not unit length");
  }
  if (f.status < 0 || f.status > 3) {
    throw ValidationError(where + who + ": status outside 0..3");
  }
  if (f.sensor_id < 0) {
    throw ValidationError(where + who + ": negative sensor id");
  }
  auto [it, fresh] = seen.try_emplace(f.sensor_id, Progress{f.timestamp_us, f.seq});
  if (!fresh) {
    if (f.timestamp_us < it->second.timestamp_us) {
      throw ValidationError(where + who + ": timestamp goes backwards");
    }
    if (f.seq <= it->second.seq) {
      throw ValidationError(where + who + ": seq does not increase");
    }
    it->second = {f.timestamp_us, f.seq};
  }
}

}  // namespace

double round_to_csv(double v) {
  const std::string s = format_component(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

RecordingFrame make_frame(std::int64_t timestamp_us, SensorId sensor, std::int64_t seq, const UnitQuaternion& q,
                          int status) {
  return {timestamp_us,       sensor, seq, round_to_csv(q.w()), round_to_csv(q.x()), round_to_csv(q.y()),
          round_to_csv(q.z()), status};
}

void validate_recording(const std::vector<RecordingFrame>& frames) {
  std::map<SensorId, Progress> seen;
  for (const auto& f : frames) {
    check_frame(f, seen, "");
  }
}

void write_recording(std::ostream& os, const std::vector<RecordingFrame>& frames) {
  validate_recording(frames);
  os << kHeader << '\n';
  for (const auto& f : frames) {
    os << f.timestamp_us << ',' << f.sensor_id << ',' << f.seq << ',' << format_component(f.qw) << ','
       << format_component(f.qx) << ',' << format_component(f.qy) << ',' << format_component(f.qz) << ','
       << f.status << '\n';
  }
}

void write_recording(const std::filesystem::path& path, const std::vector<RecordingFrame>& frames) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  write_recording(os, frames);
  if (!os) {
    throw IoError("write to '" + path.string() + "' failed");
  }
}

std::vector<RecordingFrame> read_recording(std::istream& is) {
  std::vector<RecordingFrame> frames;
  std::map<SensorId, Progress> seen;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) {
    throw ParseError(1, "missing header");
  }
  ++line_no;
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != kHeader) {
    throw ParseError(line_no, "unexpected header '" + line + "'");
  }
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::array<std::string_view, 8> fields{};
    std::size_t count = 0;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      if (count == fields.size()) {
        throw ParseError(line_no, "expected 8 fields");
      }
      fields[count++] = rest.substr(0, comma);
      if (comma == std::string_view::npos) {
        break;
      }
      rest.remove_prefix(comma + 1);
    }
    if (count != fields.size()) {
      throw ParseError(line_no, "expected 8 fields, found " + std::to_string(count));
    }
    RecordingFrame f;
    f.timestamp_us = parse_field<std::int64_t>(fields[0], line_no, "timestamp_us");
    f.sensor_id = parse_field<int>(fields[1], line_no, "sensor_id");
    f.seq = parse_field<std::int64_t>(fields[2], line_no, "seq");
    f.qw = parse_field<double>(fields[3], line_no, "qw");
    f.qx = parse_field<double>(fields[4], line_no, "qx");
    f.qy = parse_field<double>(fields[5], line_no, "qy");
    f.qz = parse_field<double>(fields[6], line_no, "qz");
    f.status = parse_field<int>(fields[7], line_no, "status");
    check_frame(f, seen, "line " + std::to_string(line_no) + ": ");
    frames.push_back(f);
  }
  return frames;
}

std::vector<RecordingFrame> read_recording(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  return read_recording(is);
}

}  // namespace bodynet
