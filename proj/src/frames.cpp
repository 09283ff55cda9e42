#include "jamwatch/frames.hpp"

#include "jamwatch/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <string>

namespace jamwatch {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8)
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
}

std::uint16_t get_u16(std::span<const std::uint8_t> p, std::size_t at) {
  return static_cast<std::uint16_t>(p[at] | (p[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> p, std::size_t at) {
  return static_cast<std::uint32_t>(p[at]) | (static_cast<std::uint32_t>(p[at + 1]) << 8) |
         (static_cast<std::uint32_t>(p[at + 2]) << 16) | (static_cast<std::uint32_t>(p[at + 3]) << 24);
}

bool known_block(std::uint16_t id) {
  return id == static_cast<std::uint16_t>(BlockId::ReceiverStatus) ||
         id == static_cast<std::uint16_t>(BlockId::MeasEpoch);
}

std::size_t min_payload(std::uint16_t id, std::span<const std::uint8_t> payload) {
  if (id == static_cast<std::uint16_t>(BlockId::ReceiverStatus))
    return 8;
  if (id == static_cast<std::uint16_t>(BlockId::MeasEpoch))
    return payload.size() >= 5 ? 5 + 3 * static_cast<std::size_t>(payload[4]) : 5;
  return 0;
}

std::uint32_t tow_of(double t) {
  const double ms = t * 1000.0;
  const double rounded = std::round(ms);
  if (std::abs(ms - rounded) > 1e-6 || rounded < 0.0 || rounded > 4294967295.0)
    throw InvalidArgument("epoch time " + std::to_string(t) + " s is not a representable whole millisecond");
  return static_cast<std::uint32_t>(rounded);
}

} // namespace

std::uint16_t crc16_xmodem(std::span<const std::uint8_t> data) noexcept {
  std::uint16_t crc = 0x0000;
  for (std::uint8_t byte : data) {
    crc ^= static_cast<std::uint16_t>(byte) << 8;
    for (int bit = 0; bit < 8; ++bit)
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021) : static_cast<std::uint16_t>(crc << 1);
  }
  return crc;
}

std::vector<std::uint8_t> encode_block(std::uint16_t block_id, std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxPayloadLen)
    throw InvalidArgument("frame payload exceeds " + std::to_string(kMaxPayloadLen) + " bytes");
  const std::size_t padded = (payload.size() + 3) / 4 * 4;
  const std::size_t length = kFrameHeaderLen + padded;
  if (length > 0xFFFF)
    throw InvalidArgument("frame length exceeds 65535 bytes");

  std::vector<std::uint8_t> frame{kSync0, kSync1, 0, 0};
  frame.reserve(length);
  put_u16(frame, block_id);
  put_u16(frame, static_cast<std::uint16_t>(length));
  frame.insert(frame.end(), payload.begin(), payload.end());
  frame.resize(length, 0);
  const std::uint16_t crc = crc16_xmodem(std::span(frame).subspan(4));
  frame[2] = static_cast<std::uint8_t>(crc & 0xFF);
  frame[3] = static_cast<std::uint8_t>(crc >> 8);
  return frame;
}

DecodedBlock decode_block(std::span<const std::uint8_t> bytes) {
  using Kind = FrameError::Kind;
  if (bytes.size() < 2 || bytes[0] != kSync0 || bytes[1] != kSync1)
    throw FrameError(Kind::BadSync, "frame does not start with the 0x24 0x40 sync pattern");
  if (bytes.size() < kFrameHeaderLen)
    throw FrameError(Kind::BadLength, "truncated frame header");
  const std::uint16_t length = get_u16(bytes, 6);
  if (length < kFrameHeaderLen || length % 4 != 0)
    throw FrameError(Kind::BadLength, "frame length " + std::to_string(length) + " is not a multiple of 4 >= 8");
  if (length > bytes.size())
    throw FrameError(Kind::BadLength, "frame length " + std::to_string(length) + " exceeds available bytes");
  const auto body = bytes.subspan(4, length - 4);
  if (crc16_xmodem(body) != get_u16(bytes, 2))
    throw FrameError(Kind::BadCrc, "frame CRC mismatch");

  DecodedBlock block;
  block.block_id = get_u16(bytes, 4);
  const auto payload = bytes.subspan(kFrameHeaderLen, length - kFrameHeaderLen);
  if (!known_block(block.block_id))
    throw FrameError(Kind::UnknownBlockId, "unknown block id " + std::to_string(block.block_id));
  if (payload.size() < min_payload(block.block_id, payload))
    throw FrameError(Kind::BadLength, "payload too short for block id " + std::to_string(block.block_id));
  block.payload.assign(payload.begin(), payload.end());
  return block;
}

StreamDecodeResult decode_stream(std::span<const std::uint8_t> bytes) {
  StreamDecodeResult result;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    if (pos + 1 >= bytes.size() || bytes[pos] != kSync0 || bytes[pos + 1] != kSync1) {
      ++pos;
      ++result.skipped_bytes;
      continue;
    }
    try {
      auto block = decode_block(bytes.subspan(pos));
      pos += kFrameHeaderLen + block.payload.size();
      result.blocks.push_back(std::move(block));
      continue;
    } catch (const FrameError& e) {
      switch (e.kind()) {
      case FrameError::Kind::BadCrc: ++result.bad_crc; break;
      case FrameError::Kind::BadLength: ++result.bad_length; break;
      case FrameError::Kind::UnknownBlockId: {
        // CRC was good, so the length field can be trusted.
        ++result.unknown_id;
        pos += get_u16(bytes, pos + 6);
        continue;
      }
      case FrameError::Kind::BadSync: break;
      }
    }
    ++pos;
    ++result.skipped_bytes;
  }
  return result;
}

std::vector<std::uint8_t> encode_receiver_status(const ReceiverStatus& status) {
  std::vector<std::uint8_t> out;
  put_u32(out, status.tow_ms);
  put_u32(out, std::bit_cast<std::uint32_t>(status.agc_db));
  return out;
}

ReceiverStatus decode_receiver_status(std::span<const std::uint8_t> payload) {
  if (payload.size() < 8)
    throw FrameError(FrameError::Kind::BadLength, "receiver status payload shorter than 8 bytes");
  return {get_u32(payload, 0), std::bit_cast<float>(get_u32(payload, 4))};
}

std::vector<std::uint8_t> encode_meas_epoch(const MeasEpoch& meas) {
  if (meas.entries.size() > 255)
    throw InvalidArgument("at most 255 satellites per measurement block");
  std::vector<std::uint8_t> out;
  put_u32(out, meas.tow_ms);
  out.push_back(static_cast<std::uint8_t>(meas.entries.size()));
  for (const auto& e : meas.entries) {
    out.push_back(e.svid);
    put_u16(out, e.cno_centi);
  }
  return out;
}

MeasEpoch decode_meas_epoch(std::span<const std::uint8_t> payload) {
  if (payload.size() < 5)
    throw FrameError(FrameError::Kind::BadLength, "measurement payload shorter than 5 bytes");
  MeasEpoch meas;
  meas.tow_ms = get_u32(payload, 0);
  const std::size_t n = payload[4];
  if (payload.size() < 5 + 3 * n)
    throw FrameError(FrameError::Kind::BadLength, "measurement payload shorter than its satellite count");
  for (std::size_t k = 0; k < n; ++k)
    meas.entries.push_back({payload[5 + 3 * k], get_u16(payload, 6 + 3 * k)});
  return meas;
}

std::vector<std::uint8_t> encode_epochs(std::span<const ObservableEpoch> epochs) {
  validate_epochs(epochs);
  std::vector<std::uint8_t> out;
  for (const auto& e : epochs) {
    const std::uint32_t tow = tow_of(e.t);
    if (e.agc_db) {
      const auto payload = encode_receiver_status({tow, static_cast<float>(*e.agc_db)});
      const auto frame = encode_block(static_cast<std::uint16_t>(BlockId::ReceiverStatus), payload);
      out.insert(out.end(), frame.begin(), frame.end());
    }
    MeasEpoch meas{tow, {}};
    for (const auto& [sat, cno] : e.cno_dbhz)
      meas.entries.push_back({static_cast<std::uint8_t>(sat), static_cast<std::uint16_t>(std::lround(cno * 10.0))});
    for (SatId sat : e.lost)
      meas.entries.push_back({static_cast<std::uint8_t>(sat), kLostCno});
    const auto frame = encode_block(static_cast<std::uint16_t>(BlockId::MeasEpoch), encode_meas_epoch(meas));
    out.insert(out.end(), frame.begin(), frame.end());
  }
  return out;
}

std::vector<ObservableEpoch> decode_epochs(std::span<const std::uint8_t> bytes, StreamDecodeResult* stats) {
  auto decoded = decode_stream(bytes);
  std::map<std::uint32_t, ObservableEpoch> by_tow;
  for (const auto& block : decoded.blocks) {
    if (block.block_id == static_cast<std::uint16_t>(BlockId::ReceiverStatus)) {
      const auto status = decode_receiver_status(block.payload);
      auto& e = by_tow[status.tow_ms];
      e.t = status.tow_ms / 1000.0;
      e.agc_db = static_cast<double>(status.agc_db);
    } else {
      const auto meas = decode_meas_epoch(block.payload);
      auto& e = by_tow[meas.tow_ms];
      e.t = meas.tow_ms / 1000.0;
      for (const auto& entry : meas.entries) {
        if (entry.cno_centi == kLostCno)
          e.lost.push_back(entry.svid);
        else
          e.cno_dbhz[entry.svid] = entry.cno_centi / 10.0;
      }
    }
  }
  std::vector<ObservableEpoch> epochs;
  epochs.reserve(by_tow.size());
  for (auto& [_, e] : by_tow)
    epochs.push_back(std::move(e));
  if (stats)
    *stats = std::move(decoded);
  return epochs;
}

std::size_t write_frame_log(std::span<const ObservableEpoch> epochs, const std::filesystem::path& path) {
  const auto bytes = encode_epochs(epochs);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoFailure("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw IoFailure("write failed on " + path.string());
  return bytes.size();
}

std::vector<ObservableEpoch> read_frame_log(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoFailure("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_epochs(bytes);
}

} // namespace jamwatch
