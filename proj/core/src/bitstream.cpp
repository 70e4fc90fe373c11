// SPDX-License-Identifier: Apache-2.0
#include "dcmp/bitstream.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <ostream>

namespace dcmp {

void ByteWriter::u16(std::uint16_t v) {
  out_.push_back(static_cast<std::uint8_t>(v & 0xff));
  out_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void ByteWriter::f64(double v) {
  const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
  u32(static_cast<std::uint32_t>(u & 0xffffffffu));
  u32(static_cast<std::uint32_t>(u >> 32));
}

void ByteWriter::bytes(std::span<const std::uint8_t> b) {
  out_.insert(out_.end(), b.begin(), b.end());
}

std::uint8_t ByteReader::u8() {
  if (pos_ >= data_.size()) throw CorruptStream("unexpected end of stream");
  return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
  const std::uint16_t lo = u8();
  return static_cast<std::uint16_t>(lo | (static_cast<std::uint16_t>(u8()) << 8));
}

std::uint32_t ByteReader::u32() {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

double ByteReader::f64() {
  const std::uint64_t lo = u32();
  const std::uint64_t hi = u32();
  return std::bit_cast<double>(lo | (hi << 32));
}

std::span<const std::uint8_t> ByteReader::bytes(std::size_t n) {
  if (n > remaining()) throw CorruptStream("unexpected end of stream");
  auto s = data_.subspan(pos_, n);
  pos_ += n;
  return s;
}

std::vector<std::uint8_t> serialize_header(const StreamHeader& header) {
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  for (char c : StreamHeader::kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u8(StreamHeader::kVersion);
  const std::uint8_t flags = (header.rate_control ? 1 : 0) |
                             (static_cast<std::uint8_t>(header.transform) << 1);
  w.u8(flags);
  w.u32(static_cast<std::uint32_t>(header.params.rows));
  w.u32(static_cast<std::uint32_t>(header.params.cols));
  w.f64(header.params.elevation_min);
  w.f64(header.params.elevation_max);
  w.f64(header.params.range_max);
  w.u8(header.params.row_elevations.empty() ? 0 : 1);
  for (double e : header.params.row_elevations) w.f64(e);
  return out;
}

StreamHeader parse_header(ByteReader& r) {
  for (char c : StreamHeader::kMagic)
    if (r.u8() != static_cast<std::uint8_t>(c)) throw CorruptStream("bad magic, not a .dcmp stream");
  if (r.u8() != StreamHeader::kVersion) throw CorruptStream("unsupported stream version");
  const std::uint8_t flags = r.u8();
  StreamHeader h;
  h.rate_control = (flags & 1) != 0;
  const std::uint8_t tf = (flags >> 1) & 3;
  if (tf > 2) throw CorruptStream("unknown transform id");
  h.transform = static_cast<TransformKind>(tf);
  h.params.rows = static_cast<int>(r.u32());
  h.params.cols = static_cast<int>(r.u32());
  h.params.elevation_min = r.f64();
  h.params.elevation_max = r.f64();
  h.params.range_max = r.f64();
  if (h.params.rows < 1 || h.params.rows > 1 << 16 || h.params.cols < 1 ||
      h.params.cols > 1 << 20)
    throw CorruptStream("implausible grid dimensions");
  if (r.u8() != 0) {
    h.params.row_elevations.resize(h.params.rows);
    for (double& e : h.params.row_elevations) e = r.f64();
  }
  try {
    h.params.validate();
  } catch (const std::invalid_argument& e) {
    throw CorruptStream(std::string("invalid projection parameters: ") + e.what());
  }
  return h;
}

std::vector<std::uint8_t> serialize_packet(const FramePacket& p) {
  std::vector<std::uint8_t> out;
  out.reserve(p.byte_size());
  ByteWriter w(out);
  w.u32(p.frame_index);
  w.u8(static_cast<std::uint8_t>(p.mode));
  w.u32(p.point_count);
  w.u32(static_cast<std::uint32_t>(p.payload.size()));
  w.bytes(p.payload);
  return out;
}

FramePacket parse_packet(ByteReader& r) {
  FramePacket p;
  p.frame_index = r.u32();
  const std::uint8_t mode = r.u8();
  if (mode > 1) throw CorruptStream("bad mode flag");
  p.mode = static_cast<PredictionMode>(mode);
  p.point_count = r.u32();
  const std::uint32_t size = r.u32();
  const auto body = r.bytes(size);
  p.payload.assign(body.begin(), body.end());
  return p;
}

StreamWriter::StreamWriter(std::ostream& out, const StreamHeader& header) : out_(out) {
  const auto bytes = serialize_header(header);
  out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void StreamWriter::write(const FramePacket& packet) {
  const auto bytes = serialize_packet(packet);
  out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

StreamReader::StreamReader(std::vector<std::uint8_t> data)
    : data_(std::move(data)), reader_(data_) {
  header_ = parse_header(reader_);
}

FramePacket StreamReader::next() { return parse_packet(reader_); }

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

}  // namespace dcmp
