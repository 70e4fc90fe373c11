// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dcmp/entropy.hpp"
#include "dcmp/geometry.hpp"

namespace dcmp {

enum class TransformKind : std::uint8_t { Adwt = 0, UniformDwt = 1, Dct = 2 };

/// Decoder received an inter packet with no reference frame; the caller
/// should skip forward to the next keyframe.
class MissingReference : public std::runtime_error {
 public:
  explicit MissingReference(const std::string& what) : std::runtime_error(what) {}
};

/// Stream-level parameters, written once at the head of a .dcmp container.
struct StreamHeader {
  static constexpr char kMagic[4] = {'D', 'C', 'M', 'P'};
  static constexpr std::uint8_t kVersion = 1;

  ProjectionParams params;
  bool rate_control = false;
  TransformKind transform = TransformKind::Adwt;
};

/// One self-delimiting frame: fixed fields plus an opaque payload whose
/// internal layout (pose or side info, mask, per-block steps and
/// coefficients) is documented in docs/bitstream.md.
struct FramePacket {
  std::uint32_t frame_index = 0;
  PredictionMode mode = PredictionMode::Intra;
  std::uint32_t point_count = 0;  // original cloud size, for bpp accounting
  std::vector<std::uint8_t> payload;

  std::size_t byte_size() const { return 13 + payload.size(); }
};

// Little-endian primitive serialization. The reader throws CorruptStream on
// any out-of-bounds access.
class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  void bytes(std::span<const std::uint8_t> b);
  std::size_t size() const { return out_.size(); }

 private:
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  float f32();
  double f64();
  std::span<const std::uint8_t> bytes(std::size_t n);
  std::size_t remaining() const { return data_.size() - pos_; }
  std::size_t consumed() const { return pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> serialize_header(const StreamHeader& header);
StreamHeader parse_header(ByteReader& reader);

std::vector<std::uint8_t> serialize_packet(const FramePacket& packet);
FramePacket parse_packet(ByteReader& reader);

/// Container file I/O: header followed by a packet sequence.
class StreamWriter {
 public:
  StreamWriter(std::ostream& out, const StreamHeader& header);
  void write(const FramePacket& packet);

 private:
  std::ostream& out_;
};

class StreamReader {
 public:
  explicit StreamReader(std::vector<std::uint8_t> data);

  const StreamHeader& header() const { return header_; }
  bool done() const { return reader_.remaining() == 0; }
  FramePacket next();

 private:
  std::vector<std::uint8_t> data_;
  ByteReader reader_;
  StreamHeader header_;
};

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

}  // namespace dcmp
