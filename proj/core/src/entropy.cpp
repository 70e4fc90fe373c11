// SPDX-License-Identifier: Apache-2.0
#include "dcmp/entropy.hpp"

#include <algorithm>
#include <bit>

namespace dcmp {
namespace {

constexpr std::uint32_t kTopValue = 1u << 24;
constexpr int kMaxEgBits = 31;

}  // namespace

// --------------------------- range coder ----------------------------------

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const std::uint8_t carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t byte = cache_;
    do {
      out_.push_back(static_cast<std::uint8_t>(byte + carry));
      byte = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = static_cast<std::uint32_t>(low_) << 8;
}

void RangeEncoder::encode_bit(BitModel& m, int bit) {
  const std::uint32_t bound = (range_ >> kProbBits) * m.prob;
  if (bit == 0) {
    range_ = bound;
    m.prob = static_cast<std::uint16_t>(m.prob + (((1u << kProbBits) - m.prob) >> kProbShift));
  } else {
    low_ += bound;
    range_ -= bound;
    m.prob = static_cast<std::uint16_t>(m.prob - (m.prob >> kProbShift));
  }
  if (range_ < kTopValue) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode_bit_raw(int bit) {
  const std::uint32_t bound = range_ >> 1;
  if (bit == 0) {
    range_ = bound;
  } else {
    low_ += bound;
    range_ -= bound;
  }
  if (range_ < kTopValue) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode_bits_raw(std::uint32_t value, int count) {
  for (int i = count - 1; i >= 0; --i) encode_bit_raw((value >> i) & 1u);
}

void RangeEncoder::flush() {
  for (int i = 0; i < 5; ++i) shift_low();
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ >= bytes_.size()) throw CorruptStream("range decoder: payload exhausted");
  return bytes_[pos_++];
}

int RangeDecoder::decode_bit(BitModel& m) {
  const std::uint32_t bound = (range_ >> kProbBits) * m.prob;
  int bit;
  if (code_ < bound) {
    bit = 0;
    range_ = bound;
    m.prob = static_cast<std::uint16_t>(m.prob + (((1u << kProbBits) - m.prob) >> kProbShift));
  } else {
    bit = 1;
    code_ -= bound;
    range_ -= bound;
    m.prob = static_cast<std::uint16_t>(m.prob - (m.prob >> kProbShift));
  }
  if (range_ < kTopValue) {
    range_ <<= 8;
    code_ = (code_ << 8) | next_byte();
  }
  return bit;
}

int RangeDecoder::decode_bit_raw() {
  const std::uint32_t bound = range_ >> 1;
  int bit;
  if (code_ < bound) {
    bit = 0;
    range_ = bound;
  } else {
    bit = 1;
    code_ -= bound;
    range_ -= bound;
  }
  if (range_ < kTopValue) {
    range_ <<= 8;
    code_ = (code_ << 8) | next_byte();
  }
  return bit;
}

std::uint32_t RangeDecoder::decode_bits_raw(int count) {
  std::uint32_t v = 0;
  for (int i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint32_t>(decode_bit_raw());
  return v;
}

// ----------------------- Exp-Golomb binarization ---------------------------

namespace {

// EG0 of x >= 0: unary length prefix through adaptive contexts, suffix raw.
void encode_eg(RangeEncoder& enc, BitModel* prefix_ctx, std::uint32_t x) {
  const std::uint32_t v = x + 1;
  const int n = std::bit_width(v);  // 1 + floor(log2(v))
  for (int i = 0; i < n - 1; ++i) enc.encode_bit(prefix_ctx[std::min(i, 7)], 1);
  enc.encode_bit(prefix_ctx[std::min(n - 1, 7)], 0);
  if (n > 1) enc.encode_bits_raw(v & ((1u << (n - 1)) - 1u), n - 1);
}

std::uint32_t decode_eg(RangeDecoder& dec, BitModel* prefix_ctx) {
  int n = 0;
  while (dec.decode_bit(prefix_ctx[std::min(n, 7)]) == 1) {
    if (++n > kMaxEgBits) throw CorruptStream("exp-golomb prefix overflow");
  }
  std::uint32_t v = 1u << n;
  if (n > 0) v |= dec.decode_bits_raw(n);
  return v - 1;
}

}  // namespace

// --------------------------- coefficient coding ----------------------------

void encode_segments(RangeEncoder& enc, FrameContexts& ctx,
                     std::span<const CoeffSegment> segments) {
  for (const CoeffSegment& seg : segments) {
    auto& cc = ctx.coeff[std::clamp(seg.ctx_class, 0, kContextClasses - 1)];
    const auto& v = seg.values;
    const bool empty = std::all_of(v.begin(), v.end(), [](std::int32_t x) { return x == 0; });
    enc.encode_bit(cc.empty, empty ? 1 : 0);
    if (empty) continue;
    std::size_t pos = 0;
    while (pos < v.size()) {
      std::size_t run = 0;
      while (pos + run < v.size() && v[pos + run] == 0) ++run;
      encode_eg(enc, cc.run_prefix, static_cast<std::uint32_t>(run));
      pos += run;
      if (pos >= v.size()) break;  // run == remaining means "rest is zero"
      const std::int32_t x = v[pos++];
      const std::uint32_t mag = static_cast<std::uint32_t>(x < 0 ? -static_cast<std::int64_t>(x)
                                                                 : x);
      encode_eg(enc, cc.mag_prefix, mag - 1);
      enc.encode_bit_raw(x < 0 ? 1 : 0);
    }
  }
}

void decode_segments(RangeDecoder& dec, FrameContexts& ctx,
                     std::span<const CoeffSegment> layout,
                     std::span<std::int32_t*> outputs) {
  for (std::size_t s = 0; s < layout.size(); ++s) {
    auto& cc = ctx.coeff[std::clamp(layout[s].ctx_class, 0, kContextClasses - 1)];
    const std::size_t n = layout[s].values.size();
    std::int32_t* out = outputs[s];
    std::fill(out, out + n, 0);
    if (dec.decode_bit(cc.empty) == 1) continue;
    std::size_t pos = 0;
    while (pos < n) {
      const std::uint32_t run = decode_eg(dec, cc.run_prefix);
      if (run > n - pos) throw CorruptStream("zero-run overflows segment");
      pos += run;
      if (pos >= n) break;
      const std::uint32_t mag = decode_eg(dec, cc.mag_prefix) + 1;
      const int sign = dec.decode_bit_raw();
      const std::int64_t val = sign ? -static_cast<std::int64_t>(mag) : mag;
      if (val > INT32_MAX || val < INT32_MIN) throw CorruptStream("magnitude overflow");
      out[pos++] = static_cast<std::int32_t>(val);
    }
  }
}

std::vector<std::uint32_t> morton_scan(int n) {
  std::vector<std::uint32_t> order(static_cast<std::size_t>(n) * n);
  for (std::uint32_t m = 0; m < order.size(); ++m) {
    std::uint32_t x = 0, y = 0;
    for (int b = 0; 2 * b < 32; ++b) {
      x |= ((m >> (2 * b)) & 1u) << b;
      y |= ((m >> (2 * b + 1)) & 1u) << b;
    }
    order[m] = y * static_cast<std::uint32_t>(n) + x;
  }
  return order;
}

namespace {

const std::vector<std::uint32_t>& morton_for(int n) {
  static const std::vector<std::uint32_t> m8 = morton_scan(8);
  static const std::vector<std::uint32_t> m16 = morton_scan(16);
  static const std::vector<std::uint32_t> m32 = morton_scan(32);
  switch (n) {
    case 8: return m8;
    case 16: return m16;
    default: return m32;
  }
}

// Gather one subband of a pyramid in Morton order.
void gather_subband(const QuantizedPyramid& p, int sb, std::vector<std::int32_t>& out) {
  const SubbandRect rect = subband_rect(sb);
  const auto& order = morton_for(rect.size);
  out.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int r = rect.row0 + static_cast<int>(order[i]) / rect.size;
    const int c = rect.col0 + static_cast<int>(order[i]) % rect.size;
    out[i] = p.index[static_cast<std::size_t>(r) * kBlockSize + c];
  }
}

void scatter_subband(QuantizedPyramid& p, int sb, const std::vector<std::int32_t>& in) {
  const SubbandRect rect = subband_rect(sb);
  const auto& order = morton_for(rect.size);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int r = rect.row0 + static_cast<int>(order[i]) / rect.size;
    const int c = rect.col0 + static_cast<int>(order[i]) % rect.size;
    p.index[static_cast<std::size_t>(r) * kBlockSize + c] = in[i];
  }
}

}  // namespace

std::vector<std::uint8_t> encode_block(const QuantizedPyramid& indices, FrameContexts& ctx) {
  std::vector<std::uint8_t> out;
  RangeEncoder enc(out);
  std::array<std::vector<std::int32_t>, kSubbandCount> scanned;
  std::array<CoeffSegment, kSubbandCount> segs;
  for (int sb = 0; sb < kSubbandCount; ++sb) {
    gather_subband(indices, sb, scanned[sb]);
    segs[sb] = {sb, scanned[sb]};
  }
  encode_segments(enc, ctx, segs);
  enc.flush();
  return out;
}

QuantizedPyramid decode_block(std::span<const std::uint8_t> bytes, FrameContexts& ctx) {
  RangeDecoder dec(bytes);
  std::array<std::vector<std::int32_t>, kSubbandCount> scanned;
  std::array<CoeffSegment, kSubbandCount> layout;
  std::array<std::int32_t*, kSubbandCount> outs;
  for (int sb = 0; sb < kSubbandCount; ++sb) {
    scanned[sb].resize(static_cast<std::size_t>(subband_size(sb)) * subband_size(sb));
    layout[sb] = {sb, scanned[sb]};
    outs[sb] = scanned[sb].data();
  }
  decode_segments(dec, ctx, layout, outs);
  QuantizedPyramid p;
  for (int sb = 0; sb < kSubbandCount; ++sb) scatter_subband(p, sb, scanned[sb]);
  return p;
}

// ------------------------------ mask coding --------------------------------

std::vector<std::uint8_t> encode_mask(std::span<const std::uint8_t> mask,
                                      FrameContexts& ctx) {
  std::vector<std::uint8_t> out;
  RangeEncoder enc(out);
  if (!mask.empty()) {
    int cur = mask[0] ? 1 : 0;
    enc.encode_bit(ctx.mask_first, cur);
    std::size_t pos = 0;
    while (pos < mask.size()) {
      std::size_t run = 0;
      while (pos + run < mask.size() && (mask[pos + run] != 0) == (cur != 0)) ++run;
      encode_eg(enc, ctx.mask_run_prefix[cur], static_cast<std::uint32_t>(run - 1));
      pos += run;
      cur ^= 1;
    }
  }
  enc.flush();
  return out;
}

std::vector<std::uint8_t> decode_mask(std::span<const std::uint8_t> bytes,
                                      std::size_t pixel_count, FrameContexts& ctx) {
  std::vector<std::uint8_t> mask(pixel_count, 0);
  if (pixel_count == 0) return mask;
  RangeDecoder dec(bytes);
  int cur = dec.decode_bit(ctx.mask_first);
  std::size_t pos = 0;
  while (pos < pixel_count) {
    const std::uint64_t run = static_cast<std::uint64_t>(decode_eg(dec, ctx.mask_run_prefix[cur])) + 1;
    if (run > pixel_count - pos) throw CorruptStream("mask run overflows grid");
    if (cur) std::fill(mask.begin() + pos, mask.begin() + pos + run, std::uint8_t{1});
    pos += run;
    cur ^= 1;
  }
  return mask;
}

}  // namespace dcmp
