#include "covacast/runlog.hpp"

#include <cmath>

#include "covacast/error.hpp"

namespace covacast {

using nlohmann::json;

namespace {

template <typename T, typename Parse>
T enum_from(const json& j, const char* field, Parse parse) {
  const std::string name = j.at(field).get<std::string>();
  const auto v = parse(name);
  if (!v) throw Error(ErrorCode::InvalidArgument, std::string("unknown ") + field + " '" + name + "'");
  return *v;
}

json finite_or_text(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

json to_json(const CellKey& key) {
  return json{
      {"dataset", key.dataset_id},
      {"horizon", key.horizon},
      {"method", std::string(to_string(key.method))},
      {"format", std::string(to_string(key.format))},
      {"covariate", key.covariate ? json(*key.covariate) : json(nullptr)},
      {"split", std::string(to_string(key.split))},
      {"censoring_level", key.censoring_level},
      {"replication", key.replication},
      {"stage", std::string(to_string(key.stage))},
  };
}

CellKey cell_key_from_json(const json& j) {
  CellKey key;
  key.dataset_id = j.at("dataset").get<std::string>();
  key.horizon = j.at("horizon").get<std::size_t>();
  key.method = enum_from<Method>(j, "method", parse_method);
  key.format = enum_from<PromptFormat>(j, "format", parse_prompt_format);
  if (!j.at("covariate").is_null()) key.covariate = j.at("covariate").get<std::string>();
  key.split = enum_from<Split>(j, "split", parse_split);
  key.censoring_level = j.at("censoring_level").get<double>();
  key.replication = j.at("replication").get<std::size_t>();
  key.stage = enum_from<Stage>(j, "stage", parse_stage);
  return key;
}

json to_json(const MetricReport& report) {
  return json{
      {"rmse", report.rmse},
      {"mae", report.mae},
      {"mape_percent", report.mape_percent ? json(*report.mape_percent) : json(nullptr)},
      {"n_points", report.n_points},
      {"n_skipped_zero_truth", report.n_skipped_zero_truth},
  };
}

MetricReport metric_report_from_json(const json& j) {
  MetricReport r;
  r.rmse = j.at("rmse").get<double>();
  r.mae = j.at("mae").get<double>();
  if (!j.at("mape_percent").is_null()) r.mape_percent = j.at("mape_percent").get<double>();
  r.n_points = j.at("n_points").get<std::size_t>();
  r.n_skipped_zero_truth = j.at("n_skipped_zero_truth").get<std::size_t>();
  return r;
}

json to_json(const RunRecord& record) {
  json points = json::array();
  for (const auto& p : record.points) {
    points.push_back(json::array({p.task, format_iso(p.timestamp), p.truth, p.forecast}));
  }
  return json{
      {"key", to_json(record.key)},
      {"report", to_json(record.report)},
      {"seed", record.seed},
      {"backend_id", record.backend_id},
      {"parse_failures", record.parse_failures},
      {"wall_time_ms", record.wall_time.count()},
      {"prompt_tokens", record.prompt_tokens},
      {"completion_tokens", record.completion_tokens},
      {"scheduled_points", record.scheduled_points},
      {"uncovered_points", record.uncovered_points},
      {"points", std::move(points)},
  };
}

RunRecord run_record_from_json(const json& j) {
  RunRecord r;
  r.key = cell_key_from_json(j.at("key"));
  r.report = metric_report_from_json(j.at("report"));
  r.seed = j.at("seed").get<std::uint64_t>();
  r.backend_id = j.at("backend_id").get<std::string>();
  r.parse_failures = j.at("parse_failures").get<std::size_t>();
  r.wall_time = std::chrono::milliseconds{j.at("wall_time_ms").get<long long>()};
  r.prompt_tokens = j.at("prompt_tokens").get<std::size_t>();
  r.completion_tokens = j.at("completion_tokens").get<std::size_t>();
  r.scheduled_points = j.at("scheduled_points").get<std::size_t>();
  r.uncovered_points = j.at("uncovered_points").get<std::size_t>();
  for (const auto& p : j.at("points")) {
    r.points.push_back(ForecastPoint{p.at(0).get<std::size_t>(), parse_timestamp(p.at(1).get<std::string>()),
                                     p.at(2).get<double>(), p.at(3).get<double>()});
  }
  return r;
}

json to_json(const WelchResult& result) {
  return json{
      {"t", finite_or_text(result.t)},
      {"df", finite_or_text(result.df)},
      {"p", result.p_two_sided},
      {"degenerate", result.degenerate},
  };
}

RunLog::RunLog(std::uint64_t seed, const std::filesystem::path& path) : seed_(seed) {
  if (path.empty()) return;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::Io, "cannot write run log " + path.string());
}

void RunLog::append(const std::string& kind, json payload) {
  std::lock_guard lock(mutex_);
  if (entries_.empty() && kind != "config") {
    throw Error(ErrorCode::InvalidArgument, "the first log entry must be the config snapshot");
  }
  json entry = json::object();
  entry["seq"] = entries_.size();
  entry["seed"] = seed_;
  entry["kind"] = kind;
  for (auto& [k, v] : payload.items()) entry[k] = std::move(v);
  if (out_.is_open()) {
    out_ << entry.dump() << '\n';
    out_.flush();
  }
  entries_.push_back(std::move(entry));
}

std::vector<json> read_runlog(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open run log " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw RowError(ErrorCode::InvalidArgument, number, "not a JSON object");
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<RunRecord> records_in(const std::vector<json>& entries) {
  std::vector<RunRecord> out;
  for (const auto& e : entries) {
    if (e.value("kind", "") == "run_record") out.push_back(run_record_from_json(e.at("record")));
  }
  return out;
}

const json& config_snapshot(const std::vector<json>& entries) {
  for (const auto& e : entries) {
    if (e.value("kind", "") == "config") return e.at("config");
  }
  throw Error(ErrorCode::EmptyLog, "log has no config snapshot");
}

}  // namespace covacast
