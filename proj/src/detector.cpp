#include "rampsim/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace rampsim::detector {

namespace {

void compare_row(const capture::Transaction& g, const capture::Transaction& o,
                 double margin, std::vector<Mismatch>& out) {
    const char columns[4] = {'X', 'Y', 'Z', 'E'};
    const std::int32_t gv[4] = {g.x, g.y, g.z, g.e};
    const std::int32_t ov[4] = {o.x, o.y, o.z, o.e};
    for (int c = 0; c < 4; ++c) {
        double pd = percent_diff(gv[c], ov[c]);
        if (pd > margin)
            out.push_back({g.index, columns[c], gv[c], ov[c], pd});
    }
}

bool last_rows_equal(const capture::Transaction& g, const capture::Transaction& o) {
    return g.x == o.x && g.y == o.y && g.z == o.z && g.e == o.e;
}

DetectionReport finalize(std::vector<Mismatch> mismatches, std::size_t compared,
                         const std::vector<capture::Transaction>& golden,
                         const std::vector<capture::Transaction>& observed,
                         double margin) {
    DetectionReport report;
    report.mismatches = std::move(mismatches);
    report.transactions_compared = compared;
    report.margin_percent = margin;
    for (const Mismatch& m : report.mismatches)
        report.largest_percent_diff = std::max(report.largest_percent_diff, m.percent_diff);

    // Exact end-of-print check: the final counts must agree bit for bit and
    // the run may not be more than one transaction shorter or longer.
    std::size_t len_g = golden.size();
    std::size_t len_o = observed.size();
    std::size_t diff = len_g > len_o ? len_g - len_o : len_o - len_g;
    report.final_check_passed =
        diff <= 1 && !observed.empty() && last_rows_equal(golden.back(), observed.back());
    report.verdict = (!report.mismatches.empty() || !report.final_check_passed)
                         ? Verdict::TrojanLikely
                         : Verdict::Clean;
    return report;
}

}  // namespace

double percent_diff(std::int64_t golden, std::int64_t observed) {
    double denom = static_cast<double>(std::max<std::int64_t>(std::llabs(golden), 1));
    return 100.0 * static_cast<double>(std::llabs(golden - observed)) / denom;
}

DetectionReport compare(const std::vector<capture::Transaction>& golden,
                        const std::vector<capture::Transaction>& observed,
                        double margin_percent) {
    if (golden.empty())
        throw std::invalid_argument("no reference: golden capture is empty");
    if (margin_percent < 0)
        throw std::invalid_argument("margin must be non-negative");

    std::vector<Mismatch> mismatches;
    std::size_t compared = std::min(golden.size(), observed.size());
    for (std::size_t i = 0; i < compared; ++i)
        compare_row(golden[i], observed[i], margin_percent, mismatches);
    return finalize(std::move(mismatches), compared, golden, observed, margin_percent);
}

StreamComparer::StreamComparer(std::vector<capture::Transaction> golden,
                               double margin_percent)
    : golden_(std::move(golden)), margin_(margin_percent) {
    if (golden_.empty())
        throw std::invalid_argument("no reference: golden capture is empty");
}

std::vector<Mismatch> StreamComparer::feed(const capture::Transaction& tx) {
    if (finished_)
        throw std::runtime_error("stream already finished");
    if (!seen_.empty() && tx.index <= seen_.back().index)
        throw std::runtime_error("protocol error: transaction index out of order");
    std::vector<Mismatch> found;
    if (seen_.size() < golden_.size())
        compare_row(golden_[seen_.size()], tx, margin_, found);
    seen_.push_back(tx);
    if (!found.empty())
        suspected_ = true;
    pending_.insert(pending_.end(), found.begin(), found.end());
    return found;
}

DetectionReport StreamComparer::finish() {
    finished_ = true;
    return finalize(std::move(pending_), std::min(golden_.size(), seen_.size()), golden_,
                    seen_, margin_);
}

std::string render_text(const DetectionReport& report) {
    std::string out;
    char buf[160];
    for (const Mismatch& m : report.mismatches) {
        std::snprintf(buf, sizeof(buf), "Index: %u, Column: %c, Values: %d, %d\n", m.index,
                      m.column, m.golden_value, m.observed_value);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "Largest percent difference found: %.2f%%\n",
                  report.largest_percent_diff);
    out += buf;
    std::snprintf(buf, sizeof(buf), "Number of transactions compared: %zu\n",
                  report.transactions_compared);
    out += buf;
    std::snprintf(buf, sizeof(buf), "Number of mismatches: %zu\n", report.mismatches.size());
    out += buf;
    out += report.final_check_passed ? "Final exact check: passed\n"
                                     : "Final exact check: FAILED\n";
    out += report.verdict == Verdict::TrojanLikely ? "Trojan likely!\n"
                                                   : "No Trojan detected.\n";
    return out;
}

std::string render_json(const DetectionReport& report) {
    nlohmann::ordered_json j;
    j["verdict"] = report.verdict == Verdict::TrojanLikely ? "trojan_likely" : "clean";
    j["margin_percent"] = report.margin_percent;
    j["transactions_compared"] = report.transactions_compared;
    j["largest_percent_diff"] = report.largest_percent_diff;
    j["final_check_passed"] = report.final_check_passed;
    j["mismatch_count"] = report.mismatches.size();
    auto rows = nlohmann::ordered_json::array();
    for (const Mismatch& m : report.mismatches) {
        nlohmann::ordered_json row;
        row["index"] = m.index;
        row["column"] = std::string(1, m.column);
        row["golden"] = m.golden_value;
        row["observed"] = m.observed_value;
        row["percent_diff"] = m.percent_diff;
        rows.push_back(row);
    }
    j["mismatches"] = rows;
    return j.dump(2) + "\n";
}

}  // namespace rampsim::detector
