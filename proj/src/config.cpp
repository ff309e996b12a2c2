#include "covacast/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "covacast/error.hpp"

namespace covacast {

using nlohmann::json;

std::string_view to_string(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::Oracle: return "oracle";
    case BackendKind::NoisyOracle: return "noisy_oracle";
    case BackendKind::Scripted: return "scripted";
    case BackendKind::Live: return "live";
  }
  return "unknown";
}

std::optional<BackendKind> parse_backend_kind(std::string_view name) noexcept {
  for (const auto k : {BackendKind::Oracle, BackendKind::NoisyOracle, BackendKind::Scripted, BackendKind::Live}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

Frequency effective_frequency(const DatasetConfig& dataset) noexcept {
  if (dataset.frequency == Frequency::HalfHourly && dataset.aggregate_daily) return Frequency::Daily;
  return dataset.frequency;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

template <typename T>
bool parse_full(std::string_view s, T& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

json plain_scalar(const std::string& s) {
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  std::string_view digits = s;
  if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
  if (std::int64_t i = 0; parse_full(digits, i)) return i;
  if (std::uint64_t u = 0; parse_full(digits, u)) return u;
  if (double d = 0.0; parse_full(digits, d) && std::isfinite(d)) return d;
  return s;
}

json node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return node.Tag() == "!" ? json(node.Scalar()) : plain_scalar(node.Scalar());
    case YAML::NodeType::Sequence: {
      json out = json::array();
      for (const auto& item : node) out.push_back(node_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      json out = json::object();
      for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (out.contains(key)) invalid("duplicate key '" + key + "'");
        out[key] = node_to_json(kv.second);
      }
      return out;
    }
  }
  return nullptr;
}

// Typed access to one JSON object that rejects keys nobody asked about.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) invalid(where() + " must be a mapping");
  }

  [[nodiscard]] const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  [[nodiscard]] const json& require(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) invalid(where(key) + " is required");
    return *v;
  }

  std::string text(const std::string& key, std::string fallback) {
    const json* v = find(key);
    return v ? as_text(*v, where(key)) : fallback;
  }

  std::optional<std::string> optional_text(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return as_text(*v, where(key));
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    const json* v = find(key);
    return v ? as_unsigned(*v, where(key)) : fallback;
  }

  double real(const std::string& key, double fallback) {
    const json* v = find(key);
    return v ? as_real(*v, where(key)) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) invalid(where(key) + " must be true or false");
    return v->get<bool>();
  }

  Section child(const std::string& key) {
    static const json kEmpty = json::object();
    const json* v = find(key);
    return Section(v ? *v : kEmpty, where(key));
  }

  [[nodiscard]] std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  // Call once every key has been read.
  void finish() const {
    for (const auto& [key, _] : node_.items()) {
      if (!seen_.count(key)) invalid("unknown key '" + where(key) + "'");
    }
  }

  static std::string as_text(const json& v, const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    invalid(where + " must be text");
  }

  static std::uint64_t as_unsigned(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    invalid(where + " must be a non-negative integer");
  }

  static double as_real(const json& v, const std::string& where) {
    if (!v.is_number()) invalid(where + " must be a number");
    return v.get<double>();
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

const json& require_array(const json& v, const std::string& where) {
  if (!v.is_array()) invalid(where + " must be a list");
  return v;
}

std::vector<std::string> text_list(const json* v, const std::string& where) {
  std::vector<std::string> out;
  if (!v) return out;
  for (const auto& item : require_array(*v, where)) out.push_back(Section::as_text(item, where));
  return out;
}

Timestamp timestamp_at(Section& s, const std::string& key) {
  const std::string text = Section::as_text(s.require(key), s.where(key));
  try {
    return parse_timestamp(text);
  } catch (const Error& e) {
    invalid(s.where(key) + ": " + e.what());
  }
}

TimeRange range_at(Section& parent, const std::string& key) {
  Section s = parent.child(key);
  TimeRange r{timestamp_at(s, "start"), timestamp_at(s, "end")};
  s.finish();
  return r;
}

PromptFormat format_from(const json& v, const std::string& where) {
  const std::string name = Section::as_text(v, where);
  const auto f = parse_prompt_format(name);
  if (!f) invalid(where + ": unknown prompt format '" + name + "'");
  return *f;
}

Comparator comparator_from(const json& v, const std::string& where) {
  if (v.is_string()) return Comparator{format_from(v, where), std::nullopt};
  Section s(v, where);
  Comparator c{format_from(s.require("format"), s.where("format")), s.optional_text("covariate")};
  s.finish();
  return c;
}

std::chrono::milliseconds millis(Section& s, const std::string& key, std::chrono::milliseconds fallback) {
  return std::chrono::milliseconds{static_cast<long long>(s.unsigned_int(key, static_cast<std::uint64_t>(fallback.count())))};
}

std::optional<std::size_t> default_seasonal_period(Frequency f) {
  switch (f) {
    case Frequency::Monthly: return 12;
    case Frequency::Weekly: return 52;
    case Frequency::Daily: return 7;
    case Frequency::HalfHourly: return 48;
  }
  return std::nullopt;
}

}  // namespace

json yaml_to_json(std::string_view text) {
  try {
    return node_to_json(YAML::Load(std::string(text)));
  } catch (const YAML::Exception& e) {
    invalid(std::string("malformed config: ") + e.what());
  }
}

void apply_override(json& tree, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) invalid("override '" + std::string(assignment) + "' is not key=value");
  const std::string path(assignment.substr(0, eq));
  const json value = yaml_to_json(assignment.substr(eq + 1));
  json* node = &tree;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (key.empty()) invalid("override path '" + path + "' has an empty segment");
    if (!node->is_object()) {
      if (!node->is_null()) invalid("override path '" + path + "' descends into a non-mapping");
      *node = json::object();
    }
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  *node = value;
}

ExperimentConfig config_from_json(const json& tree, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  Section root(tree, "");

  {
    Section d = root.child("dataset");
    c.dataset.path = Section::as_text(d.require("path"), d.where("path"));
    if (c.dataset.path.is_relative() && !base_dir.empty()) {
      c.dataset.path = std::filesystem::absolute(base_dir / c.dataset.path).lexically_normal();
    }
    c.dataset.id = d.text("id", c.dataset.path.stem().string());
    c.dataset.timestamp_column = d.text("timestamp_column", c.dataset.timestamp_column);
    c.dataset.value_column = d.text("value_column", c.dataset.value_column);
    const std::string freq = Section::as_text(d.require("frequency"), d.where("frequency"));
    const auto f = parse_frequency(freq);
    if (!f) invalid(d.where("frequency") + ": unknown frequency '" + freq + "'");
    c.dataset.frequency = *f;
    c.dataset.extra_covariate_columns = text_list(d.find("extra_covariate_columns"), d.where("extra_covariate_columns"));
    const std::string aggregate = d.text("aggregate", "daily");
    if (aggregate != "daily" && aggregate != "none") invalid(d.where("aggregate") + " must be 'daily' or 'none'");
    c.dataset.aggregate_daily = aggregate == "daily";
    d.finish();
  }

  {
    Section s = root.child("splits");
    c.splits.validation = range_at(s, "validation");
    c.splits.test = range_at(s, "test");
    s.finish();
  }

  if (const json* h = root.find("horizons")) {
    for (const auto& v : require_array(*h, "horizons")) c.horizons.push_back(Section::as_unsigned(v, "horizons"));
  }
  if (const json* f = root.find("formats")) {
    for (const auto& v : require_array(*f, "formats")) c.formats.push_back(format_from(v, "formats"));
  }
  c.covariates = text_list(root.find("covariates"), "covariates");
  c.knowledge_text = root.optional_text("knowledge_text");
  {
    const std::string crit = root.text("selection_criterion", "rmse");
    const auto parsed = [&]() -> std::optional<Criterion> {
      if (crit == "rmse") return Criterion::Rmse;
      if (crit == "mae") return Criterion::Mae;
      if (crit == "mape") return Criterion::Mape;
      return std::nullopt;
    }();
    if (!parsed) invalid("selection_criterion must be rmse, mae or mape");
    c.selection_criterion = *parsed;
  }
  if (const json* cs = root.find("comparators")) {
    for (const auto& v : require_array(*cs, "comparators")) c.comparators.push_back(comparator_from(v, "comparators"));
  }

  {
    Section b = root.child("baselines");
    const Frequency freq = effective_frequency(c.dataset);
    if (const json* sn = b.find("seasonal_naive")) {
      if (sn->is_boolean()) {
        if (sn->get<bool>()) c.baselines.seasonal_period = default_seasonal_period(freq);
      } else {
        Section s(*sn, b.where("seasonal_naive"));
        c.baselines.seasonal_period = s.unsigned_int("period", *default_seasonal_period(freq));
        s.finish();
      }
    }
    c.baselines.ar_order = freq == Frequency::Monthly ? 12 : 2;
    if (const json* ar = b.find("arima")) {
      if (ar->is_boolean()) {
        c.baselines.arima = ar->get<bool>();
      } else {
        Section s(*ar, b.where("arima"));
        c.baselines.arima = true;
        c.baselines.ar_order = s.unsigned_int("p", c.baselines.ar_order);
        c.baselines.ar_differencing = static_cast<int>(s.unsigned_int("d", 1));
        s.finish();
      }
    }
    b.finish();
  }

  c.replications = root.unsigned_int("replications", 1);

  {
    Section s = root.child("censoring");
    if (const json* levels = s.find("levels")) {
      for (const auto& v : require_array(*levels, s.where("levels"))) {
        c.censoring.levels.push_back(Section::as_real(v, s.where("levels")));
      }
    }
    c.censoring.seeds = s.unsigned_int("seeds", 1);
    const std::string scope = s.text("scope", "both");
    const auto parsed = parse_censor_scope(scope);
    if (!parsed) invalid(s.where("scope") + " must be both, history_only or horizon_only");
    c.censoring.scope = *parsed;
    s.finish();
  }

  {
    Section e = root.child("evaluation");
    c.rolling.stride = e.unsigned_int("stride", 0);
    if (const json* mh = e.find("max_history")) c.rolling.max_history = Section::as_unsigned(*mh, e.where("max_history"));
    e.finish();
  }

  {
    Section b = root.child("backend");
    const std::string type = b.text("type", "oracle");
    const auto kind = parse_backend_kind(type);
    if (!kind) invalid("backend.type \"" + type + "\" must be oracle, noisy_oracle, scripted or live");
    c.backend.kind = *kind;
    BackendConfig& live = c.backend.live;
    live.endpoint_url = b.text("endpoint_url", live.endpoint_url);
    live.model_name = b.text("model_name", live.model_name);
    live.temperature = b.real("temperature", live.temperature);
    live.max_output_tokens = b.unsigned_int("max_output_tokens", live.max_output_tokens);
    live.timeout = millis(b, "timeout_ms", live.timeout);
    live.max_retries = b.unsigned_int("max_retries", live.max_retries);
    live.parallelism_limit = b.unsigned_int("parallelism_limit", live.parallelism_limit);
    live.backoff_base = millis(b, "backoff_base_ms", live.backoff_base);
    c.backend.noise_sd = b.real("noise_sd", c.backend.noise_sd);
    c.backend.replies = text_list(b.find("replies"), b.where("replies"));
    c.backend.replication_temperature = b.real("replication_temperature", c.backend.replication_temperature);
    b.finish();
  }

  c.seed = root.unsigned_int("seed", 0);
  c.output_dir = root.text("output_dir", "out");
  root.finish();

  validate(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json out;
  out["dataset"] = {
      {"id", c.dataset.id},
      {"path", c.dataset.path.string()},
      {"timestamp_column", c.dataset.timestamp_column},
      {"value_column", c.dataset.value_column},
      {"frequency", std::string(to_string(c.dataset.frequency))},
      {"extra_covariate_columns", c.dataset.extra_covariate_columns},
      {"aggregate", c.dataset.aggregate_daily ? "daily" : "none"},
  };
  out["splits"] = {
      {"validation", {{"start", format_iso(c.splits.validation.start)}, {"end", format_iso(c.splits.validation.end)}}},
      {"test", {{"start", format_iso(c.splits.test.start)}, {"end", format_iso(c.splits.test.end)}}},
  };
  out["horizons"] = c.horizons;
  out["formats"] = json::array();
  for (const auto f : c.formats) out["formats"].push_back(std::string(to_string(f)));
  out["covariates"] = c.covariates;
  out["knowledge_text"] = c.knowledge_text ? json(*c.knowledge_text) : json(nullptr);
  out["selection_criterion"] = c.selection_criterion == Criterion::Rmse  ? "rmse"
                               : c.selection_criterion == Criterion::Mae ? "mae"
                                                                         : "mape";
  out["comparators"] = json::array();
  for (const auto& cmp : c.comparators) {
    json j = {{"format", std::string(to_string(cmp.format))}};
    if (cmp.covariate) j["covariate"] = *cmp.covariate;
    out["comparators"].push_back(j);
  }
  json baselines = json::object();
  if (c.baselines.seasonal_period) baselines["seasonal_naive"] = {{"period", *c.baselines.seasonal_period}};
  if (c.baselines.arima) baselines["arima"] = {{"p", c.baselines.ar_order}, {"d", c.baselines.ar_differencing}};
  out["baselines"] = baselines;
  out["replications"] = c.replications;
  out["censoring"] = {
      {"levels", c.censoring.levels},
      {"seeds", c.censoring.seeds},
      {"scope", std::string(to_string(c.censoring.scope))},
  };
  out["evaluation"] = {{"stride", c.rolling.stride}};
  if (c.rolling.max_history) out["evaluation"]["max_history"] = *c.rolling.max_history;
  const BackendConfig& live = c.backend.live;
  out["backend"] = {
      {"type", std::string(to_string(c.backend.kind))},
      {"endpoint_url", live.endpoint_url},
      {"model_name", live.model_name},
      {"temperature", live.temperature},
      {"max_output_tokens", live.max_output_tokens},
      {"timeout_ms", live.timeout.count()},
      {"max_retries", live.max_retries},
      {"parallelism_limit", live.parallelism_limit},
      {"backoff_base_ms", live.backoff_base.count()},
      {"noise_sd", c.backend.noise_sd},
      {"replies", c.backend.replies},
      {"replication_temperature", c.backend.replication_temperature},
  };
  out["seed"] = c.seed;
  out["output_dir"] = c.output_dir.string();
  return out;
}

void validate(const ExperimentConfig& c) {
  if (c.dataset.path.empty()) invalid("dataset.path is empty");
  if (c.dataset.id.empty()) invalid("dataset.id is empty");
  if (c.horizons.empty()) invalid("horizons must not be empty");
  for (const auto h : c.horizons) {
    if (h == 0) invalid("horizons must be positive");
  }
  if (c.formats.empty()) invalid("formats must not be empty");
  if (c.replications < 1) invalid("replications must be at least 1");
  if (c.censoring.seeds < 1) invalid("censoring.seeds must be at least 1");
  for (const double level : c.censoring.levels) {
    if (!(level >= 0.0 && level <= 1.0)) invalid("censoring.levels must lie in [0, 1]");
  }
  if (!(c.splits.validation.start <= c.splits.validation.end)) invalid("splits.validation ends before it starts");
  if (!(c.splits.test.start <= c.splits.test.end)) invalid("splits.test ends before it starts");
  if (c.splits.test.start <= c.splits.validation.end) invalid("splits.validation must precede splits.test");

  const auto known_covariate = [&](const std::string& name) {
    return parse_covariate_kind(name).has_value() ||
           std::find(c.dataset.extra_covariate_columns.begin(), c.dataset.extra_covariate_columns.end(), name) !=
               c.dataset.extra_covariate_columns.end();
  };
  for (const auto& name : c.covariates) {
    if (!known_covariate(name)) {
      invalid("covariate '" + name + "' is neither a calendar kind nor an extra_covariate_columns entry");
    }
  }
  const bool needs_covariate = std::any_of(c.formats.begin(), c.formats.end(), requires_covariate);
  if (needs_covariate && c.covariates.empty()) invalid("the configured formats need at least one covariate");
  const bool knowledge = std::find(c.formats.begin(), c.formats.end(), PromptFormat::KnowledgeGuided) != c.formats.end();
  for (const auto& cmp : c.comparators) {
    if (cmp.covariate && !accepts_covariate(cmp.format)) {
      invalid("comparator " + std::string(to_string(cmp.format)) + " takes no covariate");
    }
    if (!cmp.covariate && requires_covariate(cmp.format)) {
      invalid("comparator " + std::string(to_string(cmp.format)) + " needs a covariate");
    }
    if (cmp.covariate && !known_covariate(*cmp.covariate)) invalid("comparator covariate '" + *cmp.covariate + "' is unknown");
  }
  const bool knowledge_comparator = std::any_of(c.comparators.begin(), c.comparators.end(), [](const Comparator& cmp) {
    return cmp.format == PromptFormat::KnowledgeGuided;
  });
  if ((knowledge || knowledge_comparator) && (!c.knowledge_text || c.knowledge_text->empty())) {
    invalid("knowledge_guided needs knowledge_text");
  }
  if (c.baselines.seasonal_period && *c.baselines.seasonal_period == 0) invalid("baselines.seasonal_naive.period must be positive");
  if (c.baselines.ar_differencing != 0 && c.baselines.ar_differencing != 1) invalid("baselines.arima.d must be 0 or 1");
  if (c.baselines.arima && c.baselines.ar_order == 0) invalid("baselines.arima.p must be positive");
  if (c.backend.kind == BackendKind::NoisyOracle && !(c.backend.noise_sd >= 0.0 && std::isfinite(c.backend.noise_sd))) {
    invalid("backend.noise_sd must be finite and non-negative");
  }
  if (!(c.backend.replication_temperature >= 0.0)) invalid("backend.replication_temperature must be non-negative");
  try {
    c.backend.live.validate();
  } catch (const Error& e) {
    invalid(std::string("backend: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  json tree = yaml_to_json(buffer.str());
  if (tree.is_null()) tree = json::object();
  for (const auto& o : overrides) apply_override(tree, o);
  return config_from_json(tree, path.parent_path());
}

}  // namespace covacast
