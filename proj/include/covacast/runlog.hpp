#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "covacast/experiment.hpp"

namespace covacast {

[[nodiscard]] nlohmann::json to_json(const CellKey& key);
[[nodiscard]] CellKey cell_key_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const MetricReport& report);
[[nodiscard]] MetricReport metric_report_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const RunRecord& record);
[[nodiscard]] RunRecord run_record_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const WelchResult& result);

/// Append-only JSONL log. Every entry gets "seq" (0, 1, ...), "seed" and
/// "kind"; the first entry must be the config snapshot. Writes are
/// serialized and flushed line by line.
class RunLog {
 public:
  /// In-memory only when `path` is empty.
  explicit RunLog(std::uint64_t seed, const std::filesystem::path& path = {});

  void append(const std::string& kind, nlohmann::json payload);

  [[nodiscard]] const std::vector<nlohmann::json>& entries() const noexcept { return entries_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::ofstream out_;
  std::vector<nlohmann::json> entries_;
  mutable std::mutex mutex_;
};

/// Reads a JSONL log; blank lines are skipped. Throws Io, InvalidArgument
/// (line that is not a JSON object).
[[nodiscard]] std::vector<nlohmann::json> read_runlog(const std::filesystem::path& path);

/// RunRecords of every "run_record" entry, in log order.
[[nodiscard]] std::vector<RunRecord> records_in(const std::vector<nlohmann::json>& entries);

/// The config snapshot; throws EmptyLog when there is none.
[[nodiscard]] const nlohmann::json& config_snapshot(const std::vector<nlohmann::json>& entries);

}  // namespace covacast
