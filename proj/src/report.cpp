#include "covacast/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "covacast/dataset.hpp"
#include "covacast/error.hpp"
#include "covacast/runlog.hpp"

namespace covacast {

using nlohmann::json;

std::optional<ReportStyle> parse_report_style(std::string_view name) noexcept {
  if (name == "markdown" || name == "md") return ReportStyle::Markdown;
  if (name == "csv") return ReportStyle::Csv;
  return std::nullopt;
}

std::string format_metric(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string format_p_value(double p) {
  if (p < 1e-4) return "≤ 10^-4";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2E", p);
  return buf;
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string model_name(const CellKey& k) {
  switch (k.method) {
    case Method::SeasonalNaive: return "Seasonal Naive";
    case Method::Autoregressive: return "ARIMA";
    case Method::Llm: break;
  }
  return std::string(display_name(k.format));
}

std::string covariate_name(const std::optional<std::string>& cov) {
  if (!cov) return "-";
  if (const auto kind = parse_covariate_kind(*cov)) return std::string(display_name(*kind));
  return *cov;
}

std::string mape_text(const MetricReport& r) { return r.mape_percent ? format_metric(*r.mape_percent) : "n/a"; }

std::string file_safe(std::string s) {
  for (auto& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return s;
}

// Key with split and replication cleared: one table row.
CellKey row_key(CellKey k) {
  k.split = Split::Validation;
  k.replication = 0;
  return k;
}

struct Group {
  std::string dataset;
  std::size_t horizon;
  bool operator<(const Group& o) const { return std::tie(dataset, horizon) < std::tie(o.dataset, o.horizon); }
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  if (xs.empty()) return out;
  for (const double x : xs) out.mean += x;
  out.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

std::string choice_text(const json& c) {
  const auto f = parse_prompt_format(c.at("format").get<std::string>());
  std::string out = f ? std::string(display_name(*f)) : c.at("format").get<std::string>();
  if (!c.at("covariate").is_null()) out += " / " + covariate_name(c.at("covariate").get<std::string>());
  return out;
}

std::string table_header(const std::vector<std::string>& cols, std::size_t left_aligned) {
  std::string head = "|";
  std::string rule = "|";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    head += " " + cols[i] + " |";
    rule += i < left_aligned ? "---|" : "---:|";
  }
  return head + "\n" + rule + "\n";
}

std::string row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

std::vector<RunRecord> sorted_records(const std::vector<json>& log) {
  std::map<std::pair<CellKey, int>, RunRecord> by_key;
  for (auto& r : records_in(log)) {
    const CellKey k = r.key;
    by_key.insert_or_assign({k, 0}, std::move(r));
  }
  std::vector<RunRecord> out;
  for (auto& [_, r] : by_key) out.push_back(std::move(r));
  return out;
}

std::string markdown(const std::vector<RunRecord>& records, const std::vector<json>& log) {
  std::map<Group, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) groups[{r.key.dataset_id, r.key.horizon}].push_back(&r);
  std::map<Group, std::vector<const json*>> selections;
  std::map<Group, std::vector<const json*>> tests;
  for (const auto& e : log) {
    const std::string kind = e.value("kind", "");
    if (kind == "selection") selections[{e.at("dataset").get<std::string>(), e.at("horizon").get<std::size_t>()}].push_back(&e);
    if (kind == "t_test") tests[{e.at("dataset").get<std::string>(), e.at("horizon").get<std::size_t>()}].push_back(&e);
  }

  std::ostringstream out;
  out << "# Results\n";
  for (const auto& [group, recs] : groups) {
    out << "\n## " << group.dataset << ", horizon " << group.horizon << "\n";

    // Main stage: one row per key ignoring split and replication.
    std::vector<const RunRecord*> main;
    for (const auto* r : recs) {
      if (r->key.stage == Stage::Main && r->key.replication == 0) main.push_back(r);
    }
    if (!main.empty()) {
      std::set<Split> splits;
      for (const auto* r : main) splits.insert(r->key.split);
      std::vector<std::string> cols{"Model", "Covariate"};
      for (const auto s : splits) {
        const std::string prefix = s == Split::Validation ? "Validation " : "Test ";
        cols.insert(cols.end(), {prefix + "RMSE", prefix + "MAE", prefix + "MAPE (%)"});
      }
      out << "\n" << table_header(cols, 2);
      std::map<CellKey, std::map<Split, const RunRecord*>> rows;
      for (const auto* r : main) rows[row_key(r->key)][r->key.split] = r;
      std::vector<std::string> notes;
      for (const auto& [key, by_split] : rows) {
        std::vector<std::string> cells{model_name(key), covariate_name(key.covariate)};
        for (const auto s : splits) {
          const auto it = by_split.find(s);
          if (it == by_split.end()) {
            cells.insert(cells.end(), {"-", "-", "-"});
            continue;
          }
          const RunRecord& r = *it->second;
          cells.insert(cells.end(), {format_metric(r.report.rmse), format_metric(r.report.mae), mape_text(r.report)});
          const std::string who = model_name(key) + " / " + covariate_name(key.covariate) + " (" +
                                  std::string(to_string(s)) + ")";
          if (r.parse_failures > 0) {
            notes.push_back(who + ": " + std::to_string(r.parse_failures) + " task(s) excluded after unparseable replies");
          }
          if (r.report.n_skipped_zero_truth > 0) {
            notes.push_back(who + ": MAPE skips " + std::to_string(r.report.n_skipped_zero_truth) +
                            " zero-truth point(s)");
          }
        }
        out << row(cells);
      }
      for (const auto* sel : selections[group]) {
        out << "\nSelected on validation (" << sel->at("criterion").get<std::string>()
            << "): " << choice_text(sel->at("choice")) << "\n";
      }
      if (!notes.empty()) {
        out << "\n";
        for (const auto& n : notes) out << "- " << n << "\n";
      }
    }

    // Replications: mean and sample sd over replications.
    std::map<std::pair<CellKey, Split>, std::vector<const RunRecord*>> reps;
    for (const auto* r : recs) {
      if (r->key.stage == Stage::Replication) reps[{row_key(r->key), r->key.split}].push_back(r);
    }
    if (!reps.empty()) {
      out << "\n### Replications\n\n"
          << table_header({"Model", "Covariate", "Split", "n", "RMSE mean", "RMSE sd", "MAE mean", "MAE sd",
                           "MAPE (%) mean", "MAPE (%) sd"},
                          3);
      for (const auto& [k, rs] : reps) {
        std::vector<double> rmse, mae, mape;
        for (const auto* r : rs) {
          rmse.push_back(r->report.rmse);
          mae.push_back(r->report.mae);
          if (r->report.mape_percent) mape.push_back(*r->report.mape_percent);
        }
        const MeanSd a = mean_sd(rmse), b = mean_sd(mae), c = mean_sd(mape);
        out << row({model_name(k.first), covariate_name(k.first.covariate), std::string(to_string(k.second)),
                    std::to_string(rs.size()), format_metric(a.mean), format_metric(a.sd), format_metric(b.mean),
                    format_metric(b.sd), mape.empty() ? "n/a" : format_metric(c.mean),
                    mape.empty() ? "n/a" : format_metric(c.sd)});
      }
    }

    // Welch p-values of the selected prompt against each comparator.
    if (!tests[group].empty()) {
      std::set<std::string> splits;
      std::map<std::string, std::map<std::string, const json*>> by_other;
      std::string best;
      for (const auto* t : tests[group]) {
        const std::string split = t->at("split").get<std::string>();
        splits.insert(split);
        by_other[choice_text(t->at("other"))][split] = t;
        best = choice_text(t->at("best"));
      }
      std::vector<std::string> cols{"Prompt"};
      // Validation before test.
      std::vector<std::string> ordered;
      for (const char* s : {"validation", "test"}) {
        if (splits.count(s)) ordered.emplace_back(s);
      }
      for (const auto& s : ordered) {
        const std::string prefix = s == "validation" ? "Validation " : "Test ";
        cols.insert(cols.end(), {prefix + "P-value (RMSE)", prefix + "P-value (MAE)", prefix + "P-value (MAPE)"});
      }
      out << "\n### Pairwise Welch t-tests against " << best << "\n\n" << table_header(cols, 1);
      for (const auto& [other, per_split] : by_other) {
        std::vector<std::string> cells{other};
        for (const auto& s : ordered) {
          const auto it = per_split.find(s);
          if (it == per_split.end()) {
            cells.insert(cells.end(), {"-", "-", "-"});
            continue;
          }
          const json& t = *it->second;
          cells.push_back(format_p_value(t.at("rmse").at("p").get<double>()));
          cells.push_back(format_p_value(t.at("mae").at("p").get<double>()));
          cells.push_back(t.at("mape").is_null() ? "n/a" : format_p_value(t.at("mape").at("p").get<double>()));
        }
        out << row(cells);
      }
    }

    // Censoring sweep: mean over seeds per level.
    std::map<CellKey, std::map<double, std::vector<const RunRecord*>>> sweeps;
    for (const auto* r : recs) {
      if (r->key.stage != Stage::Censoring) continue;
      CellKey k = row_key(r->key);
      k.censoring_level = 0.0;
      sweeps[k][r->key.censoring_level].push_back(r);
    }
    for (const auto& [k, levels] : sweeps) {
      out << "\n### Censoring, " << model_name(k) << " / " << covariate_name(k.covariate) << " (test)\n\n"
          << table_header({"Censoring Level", "n", "RMSE", "MAE", "MAPE (%)"}, 1);
      for (const auto& [level, rs] : levels) {
        std::vector<double> rmse, mae, mape;
        for (const auto* r : rs) {
          rmse.push_back(r->report.rmse);
          mae.push_back(r->report.mae);
          if (r->report.mape_percent) mape.push_back(*r->report.mape_percent);
        }
        out << row({shortest(level), std::to_string(rs.size()), format_metric(mean_sd(rmse).mean),
                    format_metric(mean_sd(mae).mean), mape.empty() ? "n/a" : format_metric(mean_sd(mape).mean)});
      }
    }
  }
  return out.str();
}

constexpr std::string_view kCsvHeader =
    "dataset,horizon,stage,method,format,covariate,censoring_level,split,replication,rmse,mae,mape_percent,"
    "n_points,n_skipped_zero_truth,parse_failures";

std::string csv(const std::vector<RunRecord>& records) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    const CellKey& k = r.key;
    out += csv_field(k.dataset_id) + ',' + std::to_string(k.horizon) + ',' + std::string(to_string(k.stage)) + ',' +
           std::string(to_string(k.method)) + ',' + std::string(to_string(k.format)) + ',' +
           csv_field(k.covariate.value_or("")) + ',' + shortest(k.censoring_level) + ',' +
           std::string(to_string(k.split)) + ',' + std::to_string(k.replication) + ',' + shortest(r.report.rmse) +
           ',' + shortest(r.report.mae) + ',' + (r.report.mape_percent ? shortest(*r.report.mape_percent) : "") +
           ',' + std::to_string(r.report.n_points) + ',' + std::to_string(r.report.n_skipped_zero_truth) + ',' +
           std::to_string(r.parse_failures) + '\n';
  }
  return out;
}

std::string t_test_csv(const std::vector<json>& log) {
  std::string out =
      "dataset,horizon,split,best_format,best_covariate,other_format,other_covariate,n_best,n_other,"
      "t_rmse,df_rmse,p_rmse,p_mae,p_mape\n";
  for (const auto& e : log) {
    if (e.value("kind", "") != "t_test") continue;
    const auto cov = [](const json& c) {
      return c.at("covariate").is_null() ? std::string() : csv_field(c.at("covariate").get<std::string>());
    };
    const auto num = [](const json& v) { return v.is_number() ? shortest(v.get<double>()) : v.get<std::string>(); };
    out += csv_field(e.at("dataset").get<std::string>()) + ',' + std::to_string(e.at("horizon").get<std::size_t>()) +
           ',' + e.at("split").get<std::string>() + ',' + e.at("best").at("format").get<std::string>() + ',' +
           cov(e.at("best")) + ',' + e.at("other").at("format").get<std::string>() + ',' + cov(e.at("other")) + ',' +
           std::to_string(e.at("n_best").get<std::size_t>()) + ',' +
           std::to_string(e.at("n_other").get<std::size_t>()) + ',' + num(e.at("rmse").at("t")) + ',' +
           num(e.at("rmse").at("df")) + ',' + num(e.at("rmse").at("p")) + ',' + num(e.at("mae").at("p")) + ',' +
           (e.at("mape").is_null() ? std::string() : num(e.at("mape").at("p"))) + '\n';
  }
  return out;
}

std::vector<ReportFile> plot_files(const std::vector<RunRecord>& records) {
  std::vector<ReportFile> files;
  for (const auto& r : records) {
    const CellKey& k = r.key;
    if (k.stage != Stage::Main || k.replication != 0 || r.points.empty()) continue;
    std::string name = "plots/" + k.dataset_id + "_h" + std::to_string(k.horizon) + "_" +
                       std::string(to_string(k.split)) + "_" +
                       (k.method == Method::Llm ? std::string(to_string(k.format)) : std::string(to_string(k.method)));
    if (k.covariate) name += "_" + *k.covariate;
    std::string content = "task,timestamp,truth,forecast\n";
    for (const auto& p : r.points) {
      content += std::to_string(p.task) + ',' + format_iso(p.timestamp) + ',' + shortest(p.truth) + ',' +
                 shortest(p.forecast) + '\n';
    }
    files.push_back({file_safe(name.substr(6)).insert(0, "plots/") + ".csv", std::move(content)});
  }
  return files;
}

}  // namespace

Report render_report(const std::vector<json>& log, ReportStyle style) {
  const std::vector<RunRecord> records = sorted_records(log);
  if (records.empty()) throw Error(ErrorCode::EmptyLog, "the log holds no run record");
  Report report;
  report.files = plot_files(records);
  if (style == ReportStyle::Markdown) {
    report.text = markdown(records, log);
  } else {
    report.text = csv(records);
    report.files.push_back({"t_tests.csv", t_test_csv(log)});
  }
  return report;
}

std::vector<CsvRecordRow> parse_report_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "empty report");
  std::string header;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) header += (i ? "," : "") + rows[0].fields[i];
  if (header != kCsvHeader) throw Error(ErrorCode::InvalidArgument, "unexpected report header");

  const auto number = [](const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw RowError(ErrorCode::InvalidArgument, line, "'" + s + "' is not a number");
    }
    return v;
  };
  const auto count = [&](const std::string& s, std::size_t line) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw RowError(ErrorCode::InvalidArgument, line, "'" + s + "' is not a count");
    }
    return v;
  };
  const auto require = [](auto parsed, const std::string& s, std::size_t line) {
    if (!parsed) throw RowError(ErrorCode::InvalidArgument, line, "unknown value '" + s + "'");
    return *parsed;
  };

  std::vector<CsvRecordRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const std::size_t line = rows[i].line;
    if (f.size() != 15) throw RowError(ErrorCode::InvalidArgument, line, "expected 15 fields");
    CsvRecordRow r;
    r.key.dataset_id = f[0];
    r.key.horizon = count(f[1], line);
    r.key.stage = require(parse_stage(f[2]), f[2], line);
    r.key.method = require(parse_method(f[3]), f[3], line);
    r.key.format = require(parse_prompt_format(f[4]), f[4], line);
    if (!f[5].empty()) r.key.covariate = f[5];
    r.key.censoring_level = number(f[6], line);
    r.key.split = require(parse_split(f[7]), f[7], line);
    r.key.replication = count(f[8], line);
    r.report.rmse = number(f[9], line);
    r.report.mae = number(f[10], line);
    if (!f[11].empty()) r.report.mape_percent = number(f[11], line);
    r.report.n_points = count(f[12], line);
    r.report.n_skipped_zero_truth = count(f[13], line);
    r.parse_failures = count(f[14], line);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace covacast
