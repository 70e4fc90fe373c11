// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dcmp/adwt.hpp"

namespace dcmp {

/// Decoder-side failure: range-coder state violation, run overflow, or a
/// read past the end of the payload.
class CorruptStream : public std::runtime_error {
 public:
  explicit CorruptStream(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Carry-less adaptive binary range coder (32-bit range, 11-bit probabilities,
// adaptation shift 5). Integer-only, byte-exact across platforms. The decoder
// consumes exactly the bytes the encoder emitted.
// ---------------------------------------------------------------------------

inline constexpr unsigned kProbBits = 11;
inline constexpr unsigned kProbInit = 1u << (kProbBits - 1);
inline constexpr unsigned kProbShift = 5;

struct BitModel {
  std::uint16_t prob = kProbInit;
};

class RangeEncoder {
 public:
  explicit RangeEncoder(std::vector<std::uint8_t>& out) : out_(out) {}

  void encode_bit(BitModel& m, int bit);
  void encode_bit_raw(int bit);                    // fixed p = 1/2, no adaptation
  void encode_bits_raw(std::uint32_t value, int count);  // MSB first
  void flush();

 private:
  void shift_low();

  std::vector<std::uint8_t>& out_;
  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes);

  int decode_bit(BitModel& m);
  int decode_bit_raw();
  std::uint32_t decode_bits_raw(int count);
  std::size_t consumed() const { return pos_; }

 private:
  std::uint8_t next_byte();

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
};

// ---------------------------------------------------------------------------
// Coefficient coding. Each segment is one already-scanned coefficient array
// (Morton order for DWT subbands) tagged with a context class; zero runs and
// Exp-Golomb magnitudes are driven through per-class adaptive contexts.
// Context state lives in FrameContexts and is reset once per frame.
// ---------------------------------------------------------------------------

inline constexpr int kContextClasses = 10;

struct CoeffSegment {
  int ctx_class = 0;  // clamped to [0, kContextClasses)
  std::span<const std::int32_t> values;
};

struct FrameContexts {
  struct ClassCtx {
    BitModel empty;          // segment-is-all-zero flag
    BitModel run_prefix[8];  // zero-run EG prefix, per bit position
    BitModel mag_prefix[8];  // |value|-1 EG prefix, per bit position
  };
  ClassCtx coeff[kContextClasses];
  BitModel mask_first;
  BitModel mask_run_prefix[2][8];  // [current bit value][bit position]
  BitModel split_flag[2];          // quadtree depth 0 / 1
  BitModel direction_bit[2];       // 2-bit leaf direction
};

/// Append-encode segments into an existing encoder (no flush).
void encode_segments(RangeEncoder& enc, FrameContexts& ctx,
                     std::span<const CoeffSegment> segments);
/// Decode counterpart; sizes/classes must mirror the encode call.
void decode_segments(RangeDecoder& dec, FrameContexts& ctx,
                     std::span<const CoeffSegment> layout,
                     std::span<std::int32_t*> outputs);

/// Standalone coding of one quantized pyramid (subbands in serialization
/// order, Morton-scanned). Exactly invertible.
std::vector<std::uint8_t> encode_block(const QuantizedPyramid& indices,
                                       FrameContexts& ctx);
QuantizedPyramid decode_block(std::span<const std::uint8_t> bytes, FrameContexts& ctx);

/// Row-major run-length occupancy mask coding.
std::vector<std::uint8_t> encode_mask(std::span<const std::uint8_t> mask,
                                      FrameContexts& ctx);
std::vector<std::uint8_t> decode_mask(std::span<const std::uint8_t> bytes,
                                      std::size_t pixel_count, FrameContexts& ctx);

/// Morton (z-order) scan of an n x n grid, n a power of two: returns
/// row-major indices in scan order.
std::vector<std::uint32_t> morton_scan(int n);

}  // namespace dcmp
