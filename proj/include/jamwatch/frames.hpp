#pragma once

// Framed binary block stream for observables.
//
// Frame layout (all little-endian):
//   0  u8[2] sync 0x24 0x40
//   2  u16   CRC-16/XMODEM over bytes 4..length-1
//   4  u16   block id
//   6  u16   length, total frame bytes, multiple of 4
//   8  ...   payload, zero padded
//
// Block 1 (receiver status): u32 time-of-week ms, f32 AGC gain dB.
// Block 2 (measurement epoch): u32 time-of-week ms, u8 n, then n x (u8 svid,
// u16 C/N0 in 0.1 dB-Hz). A C/N0 of 0xFFFF marks a satellite that lost lock.
//
// The layout borrows the general shape of common receiver binary formats but
// is not compatible with any of them.

#include "jamwatch/observables.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace jamwatch {

inline constexpr std::uint8_t kSync0 = 0x24;
inline constexpr std::uint8_t kSync1 = 0x40;
inline constexpr std::size_t kFrameHeaderLen = 8;
inline constexpr std::size_t kMaxPayloadLen = 65527;

enum class BlockId : std::uint16_t { ReceiverStatus = 1, MeasEpoch = 2 };

std::uint16_t crc16_xmodem(std::span<const std::uint8_t> data) noexcept;

struct DecodedBlock {
  std::uint16_t block_id = 0;
  std::vector<std::uint8_t> payload; ///< including any zero padding

  bool operator==(const DecodedBlock&) const = default;
};

/// Builds a frame, zero-padding the payload to a multiple of four bytes.
std::vector<std::uint8_t> encode_block(std::uint16_t block_id, std::span<const std::uint8_t> payload);

/// Decodes the frame at the start of `bytes`. Throws FrameError.
DecodedBlock decode_block(std::span<const std::uint8_t> bytes);

struct StreamDecodeResult {
  std::vector<DecodedBlock> blocks;
  std::size_t bad_crc = 0;
  std::size_t bad_length = 0;
  std::size_t unknown_id = 0;
  std::size_t skipped_bytes = 0;
};

/// Decodes every frame in a byte stream, resynchronising on the next sync
/// pattern after any damaged or unknown frame.
StreamDecodeResult decode_stream(std::span<const std::uint8_t> bytes);

struct ReceiverStatus {
  std::uint32_t tow_ms = 0;
  float agc_db = 0.0F;
};

struct MeasEntry {
  std::uint8_t svid = 0;
  std::uint16_t cno_centi = 0; ///< 0.1 dB-Hz units, 0xFFFF = lost
};

struct MeasEpoch {
  std::uint32_t tow_ms = 0;
  std::vector<MeasEntry> entries;
};

inline constexpr std::uint16_t kLostCno = 0xFFFF;

std::vector<std::uint8_t> encode_receiver_status(const ReceiverStatus& status);
ReceiverStatus decode_receiver_status(std::span<const std::uint8_t> payload);
std::vector<std::uint8_t> encode_meas_epoch(const MeasEpoch& meas);
MeasEpoch decode_meas_epoch(std::span<const std::uint8_t> payload);

/// Serialises epochs as frames (status block when AGC is present, then a
/// measurement block). Times must be whole milliseconds.
std::vector<std::uint8_t> encode_epochs(std::span<const ObservableEpoch> epochs);
std::vector<ObservableEpoch> decode_epochs(std::span<const std::uint8_t> bytes,
                                           StreamDecodeResult* stats = nullptr);

std::size_t write_frame_log(std::span<const ObservableEpoch> epochs, const std::filesystem::path& path);
std::vector<ObservableEpoch> read_frame_log(const std::filesystem::path& path);

} // namespace jamwatch
