#pragma once

#include <string>
#include <vector>

#include "rampsim/capture.hpp"

namespace rampsim::detector {

enum class Verdict { Clean, TrojanLikely };

struct Mismatch {
    std::uint32_t index = 0;
    char column = 'X';  // X, Y, Z or E
    std::int32_t golden_value = 0;
    std::int32_t observed_value = 0;
    double percent_diff = 0.0;
};

struct DetectionReport {
    std::vector<Mismatch> mismatches;
    double largest_percent_diff = 0.0;
    std::size_t transactions_compared = 0;
    bool final_check_passed = true;
    Verdict verdict = Verdict::Clean;
    double margin_percent = 5.0;
};

/// Percent difference with the zero-count guard: 100*|g-o|/max(|g|,1).
double percent_diff(std::int64_t golden, std::int64_t observed);

/// Golden-model comparison. Rows pair up positionally up to the shorter
/// list; per-column differences beyond the margin are recorded. The final
/// check demands exact equality of the last row and tolerates at most one
/// transaction of length difference. Throws std::invalid_argument when the
/// golden list is empty ("no reference").
DetectionReport compare(const std::vector<capture::Transaction>& golden,
                        const std::vector<capture::Transaction>& observed,
                        double margin_percent = 5.0);

/// Incremental comparison for live monitoring. Feed observed transactions in
/// index order; each margin violation surfaces as soon as it is seen and the
/// terminal report equals the batch result on the same data.
class StreamComparer {
public:
    StreamComparer(std::vector<capture::Transaction> golden, double margin_percent = 5.0);

    /// Returns the mismatches this transaction produced (usually empty).
    /// Throws std::runtime_error on an out-of-order index.
    std::vector<Mismatch> feed(const capture::Transaction& tx);

    /// True as soon as any mismatch has been seen.
    bool trojan_suspected() const { return suspected_; }

    /// Terminal report; call once after the stream ends.
    DetectionReport finish();

private:
    std::vector<capture::Transaction> golden_;
    double margin_;
    std::vector<capture::Transaction> seen_;
    std::vector<Mismatch> pending_;
    bool suspected_ = false;
    bool finished_ = false;
};

/// Human-readable report, one mismatch per line:
///   Index: 5115, Column: X, Values: 7218, 6489
/// followed by the summary block and the verdict line.
std::string render_text(const DetectionReport& report);

/// Machine-readable JSON rendering with the same fields.
std::string render_json(const DetectionReport& report);

}  // namespace rampsim::detector
