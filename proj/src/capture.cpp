#include "rampsim/capture.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rampsim/trojan.hpp"

namespace rampsim::capture {

namespace {

std::int32_t narrow_count(std::int64_t v, const char* axis) {
    if (v < std::numeric_limits<std::int32_t>::min() ||
        v > std::numeric_limits<std::int32_t>::max())
        throw std::overflow_error(std::string("step counter overflows 32 bits on ") + axis);
    return static_cast<std::int32_t>(v);
}

}  // namespace

Transaction make_transaction(std::uint32_t index, std::int64_t x, std::int64_t y,
                             std::int64_t z, std::int64_t e) {
    Transaction tx;
    tx.index = index;
    tx.x = narrow_count(x, "X");
    tx.y = narrow_count(y, "Y");
    tx.z = narrow_count(z, "Z");
    tx.e = narrow_count(e, "E");
    return tx;
}

std::vector<Transaction> capture(const SignalTimeline& timeline,
                                 const PrinterProfile& profile) {
    auto homed = trojan::find_homed_tick(timeline, profile.homing_order);
    if (!homed)
        throw std::runtime_error("unsynchronized capture: timeline contains no homing sequence");
    const Tick homed_tick = *homed;

    std::array<AxisTracker, kAxisCount> trackers;
    std::array<int, kAxisCount> step_level = {0, 0, 0, 0};

    std::vector<Transaction> txs;
    bool synced = false;
    Tick sync_tick = 0;
    std::uint32_t next_index = 0;

    // Transaction i samples the counters at sync + (i+1) * 0.1 s; edges at
    // exactly the boundary are included.
    auto flush_until = [&](Tick t) {
        while (sync_tick + static_cast<Tick>(next_index + 1) * kTransactionInterval <= t) {
            txs.push_back(make_transaction(next_index, trackers[0].count, trackers[1].count,
                                           trackers[2].count, trackers[3].count));
            ++next_index;
        }
    };

    Tick last_event = 0;
    for (const Event& ev : timeline.events) {
        last_event = ev.t;
        Axis axis;
        if (!axis_of_line(ev.line, axis))
            continue;
        int a = static_cast<int>(axis);
        if (ev.line == dir_line(axis)) {
            trackers[a].on_dir(ev.level);
            continue;
        }
        if (ev.line != step_line(axis)) {
            continue;
        }
        int prev = step_level[a];
        step_level[a] = ev.level;
        if (prev != 0 || ev.level != 1)
            continue;
        if (ev.t <= homed_tick)
            continue;  // homing motion is deliberately not recorded
        if (!synced) {
            synced = true;
            sync_tick = ev.t;
        }
        flush_until(ev.t - 1);
        trackers[a].on_step_rise();
    }

    if (synced) {
        flush_until(last_event);
        // Partial tail window: timeline ran past the last full boundary.
        Tick covered = sync_tick + static_cast<Tick>(next_index) * kTransactionInterval;
        if (last_event > covered)
            txs.push_back(make_transaction(next_index, trackers[0].count, trackers[1].count,
                                           trackers[2].count, trackers[3].count));
    }
    return txs;
}

std::array<std::uint8_t, 16> encode(const Transaction& tx) {
    std::array<std::uint8_t, 16> out;
    const std::int32_t words[4] = {tx.x, tx.y, tx.z, tx.e};
    for (int w = 0; w < 4; ++w) {
        std::uint32_t bits = static_cast<std::uint32_t>(words[w]);
        out[w * 4 + 0] = static_cast<std::uint8_t>(bits & 0xff);
        out[w * 4 + 1] = static_cast<std::uint8_t>((bits >> 8) & 0xff);
        out[w * 4 + 2] = static_cast<std::uint8_t>((bits >> 16) & 0xff);
        out[w * 4 + 3] = static_cast<std::uint8_t>((bits >> 24) & 0xff);
    }
    return out;
}

Transaction decode(const std::array<std::uint8_t, 16>& bytes, std::uint32_t index) {
    Transaction tx;
    tx.index = index;
    std::int32_t* words[4] = {&tx.x, &tx.y, &tx.z, &tx.e};
    for (int w = 0; w < 4; ++w) {
        std::uint32_t bits = static_cast<std::uint32_t>(bytes[w * 4 + 0]) |
                             (static_cast<std::uint32_t>(bytes[w * 4 + 1]) << 8) |
                             (static_cast<std::uint32_t>(bytes[w * 4 + 2]) << 16) |
                             (static_cast<std::uint32_t>(bytes[w * 4 + 3]) << 24);
        *words[w] = static_cast<std::int32_t>(bits);
    }
    return tx;
}

std::string write_csv(const std::vector<Transaction>& txs) {
    std::string out = "Index, X, Y, Z, E\n";
    char buf[96];
    for (const Transaction& tx : txs) {
        int n = std::snprintf(buf, sizeof(buf), "%u, %d, %d, %d, %d\n", tx.index, tx.x,
                              tx.y, tx.z, tx.e);
        out.append(buf, static_cast<size_t>(n));
    }
    return out;
}

namespace {

bool parse_int_field(std::string_view field, std::int64_t& out) {
    size_t b = field.find_first_not_of(" \t");
    size_t e = field.find_last_not_of(" \t\r");
    if (b == std::string_view::npos)
        return false;
    field = field.substr(b, e - b + 1);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace

std::vector<Transaction> read_csv(const std::string& text) {
    std::vector<Transaction> txs;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (!header_seen) {
            header_seen = true;
            if (line.find("Index") != std::string::npos)
                continue;  // header row; otherwise fall through and parse
        }
        std::string_view view = line;
        std::array<std::int64_t, 5> fields;
        size_t pos = 0;
        for (int f = 0; f < 5; ++f) {
            size_t comma = view.find(',', pos);
            std::string_view cell =
                view.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                 : comma - pos);
            if (!parse_int_field(cell, fields[f]))
                throw std::runtime_error("capture CSV line " + std::to_string(line_no) +
                                         ": malformed field " + std::to_string(f + 1));
            if (comma == std::string_view::npos) {
                if (f != 4)
                    throw std::runtime_error("capture CSV line " + std::to_string(line_no) +
                                             ": expected 5 fields");
                pos = view.size();
            } else {
                pos = comma + 1;
            }
        }
        if (fields[0] < 0 || fields[0] > std::numeric_limits<std::uint32_t>::max())
            throw std::runtime_error("capture CSV line " + std::to_string(line_no) +
                                     ": index out of range");
        txs.push_back(make_transaction(static_cast<std::uint32_t>(fields[0]), fields[1],
                                       fields[2], fields[3], fields[4]));
    }
    return txs;
}

std::vector<std::uint8_t> write_binary(const std::vector<Transaction>& txs) {
    std::vector<std::uint8_t> out;
    out.reserve(txs.size() * 16);
    for (const Transaction& tx : txs) {
        auto bytes = encode(tx);
        out.insert(out.end(), bytes.begin(), bytes.end());
    }
    return out;
}

std::vector<Transaction> read_binary(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() % 16 != 0)
        throw std::runtime_error("capture stream length is not a multiple of 16 bytes");
    std::vector<Transaction> txs;
    txs.reserve(bytes.size() / 16);
    for (size_t off = 0; off < bytes.size(); off += 16) {
        std::array<std::uint8_t, 16> record;
        std::copy(bytes.begin() + off, bytes.begin() + off + 16, record.begin());
        txs.push_back(decode(record, static_cast<std::uint32_t>(off / 16)));
    }
    return txs;
}

void save_csv(const std::vector<Transaction>& txs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write capture CSV: " + path);
    out << write_csv(txs);
}

std::vector<Transaction> load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open capture CSV: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_csv(buf.str());
}

void save_binary(const std::vector<Transaction>& txs, const std::string& path) {
    auto bytes = write_binary(txs);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write capture stream: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<Transaction> load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open capture stream: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return read_binary(bytes);
}

}  // namespace rampsim::capture
