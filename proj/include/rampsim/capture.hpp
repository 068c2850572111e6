#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rampsim/profile.hpp"
#include "rampsim/signals.hpp"

namespace rampsim::capture {

/// Direction-aware step counter for one motor: +1 per STEP rising edge when
/// DIR is high, -1 when low.
struct AxisTracker {
    std::int64_t count = 0;
    int dir_level = 0;

    void on_dir(int level) { dir_level = level; }
    void on_step_rise() { count += dir_level ? 1 : -1; }
};

/// One telemetry sample: monotonically increasing index plus the four signed
/// step counters. Encodes to exactly 16 bytes.
struct Transaction {
    std::uint32_t index = 0;
    std::int32_t x = 0;
    std::int32_t y = 0;
    std::int32_t z = 0;
    std::int32_t e = 0;

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

/// Sampling interval of the telemetry stream.
constexpr Tick kTransactionInterval = 10'000'000;  // 0.1 s

/// Counts step edges after the homing sequence completes and samples all
/// four counters every 0.1 s, starting at the first post-homing STEP rising
/// edge. A trailing partial window is flushed as a final transaction.
/// Throws std::runtime_error when the timeline never finishes homing.
std::vector<Transaction> capture(const SignalTimeline& timeline,
                                 const PrinterProfile& profile);

/// Wire format: X, Y, Z, E as little-endian signed 32-bit words, in that
/// order. The index travels implicitly (records are consecutive).
std::array<std::uint8_t, 16> encode(const Transaction& tx);
Transaction decode(const std::array<std::uint8_t, 16>& bytes, std::uint32_t index);

/// Total signed step counts, checked against the 32-bit wire range. Throws
/// std::overflow_error when a counter cannot be represented.
Transaction make_transaction(std::uint32_t index, std::int64_t x, std::int64_t y,
                             std::int64_t z, std::int64_t e);

std::string write_csv(const std::vector<Transaction>& txs);
/// Throws std::runtime_error naming the bad line on malformed input.
std::vector<Transaction> read_csv(const std::string& text);

std::vector<std::uint8_t> write_binary(const std::vector<Transaction>& txs);
std::vector<Transaction> read_binary(const std::vector<std::uint8_t>& bytes);

void save_csv(const std::vector<Transaction>& txs, const std::string& path);
std::vector<Transaction> load_csv(const std::string& path);
void save_binary(const std::vector<Transaction>& txs, const std::string& path);
std::vector<Transaction> load_binary(const std::string& path);

}  // namespace rampsim::capture
