#include "xtalbench/report.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

namespace xtalbench {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::span<const Field> loss_fields(Protocol protocol) {
  if (protocol == Protocol::SpatialExclusion) return kSeLossFields;
  return kCeLossFields;
}

InstanceScore score_record(const RunRecord& record, const AnnotationRecord& reference) {
  InstanceScore s;
  s.instance_id = record.instance_id;
  s.protocol = record.protocol;
  s.target = record.target;
  s.endpoint = record.endpoint;
  s.latency_s = record.latency_s;
  const auto& pred = record.parsed;
  s.parse_ok = pred.parse_ok;
  s.errors = property_errors(pred, reference);
  s.angle_errors = angle_errors(pred, reference);
  std::map<Field, double> loss_terms;
  for (auto f : loss_fields(record.protocol)) {
    if (const auto it = s.errors.find(f); it != s.errors.end()) loss_terms.insert(*it);
  }
  if (!loss_terms.empty()) s.loss = per_example_mean(loss_terms);
  s.sg_match = space_group_match(pred.space_group, reference.space_group);
  s.s_phys = physics_compliance(pred, reference);
  s.s_hall = hallucination_score(pred, reference);
  s.format = format_faithfulness(pred, reference);
  return s;
}

void check_same_corpus(std::span<const RunLog> logs, const Dataset& dataset) {
  const auto& want = dataset.manifest().corpus_hash;
  for (const auto& log : logs) {
    if (log.header.corpus_hash != want) {
      throw ConfigError(fmt::format(
          "refusing to mix corpora: '{}' was produced against corpus {} but the dataset at '{}' is {}",
          log.path.string(), log.header.corpus_hash, dataset.root().string(), want));
    }
  }
}

namespace {

auto score_key(const InstanceScore& s) {
  return std::make_tuple(s.endpoint, static_cast<int>(s.protocol), s.target.material, s.target.radius_nm, s.target.pose,
                         s.instance_id);
}

}  // namespace

std::vector<InstanceScore> score_logs(std::span<const RunLog> logs, const Dataset& dataset) {
  check_same_corpus(logs, dataset);
  std::vector<InstanceScore> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& log : logs) {
    for (const auto& r : log.records) {
      // A resumed log can hold a record twice only if edited by hand; keep the first.
      if (!seen.emplace(r.endpoint, r.instance_id).second) continue;
      out.push_back(score_record(r, dataset.annotation(r.target.material, r.target.radius_nm)));
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return score_key(a) < score_key(b); });
  return out;
}

std::string score_to_json_line(const InstanceScore& s) {
  ordered_json j;
  j["instance_id"] = s.instance_id;
  j["endpoint"] = s.endpoint;
  j["protocol"] = std::string(to_string(s.protocol));
  j["parse_ok"] = s.parse_ok;
  ordered_json errors = ordered_json::object();
  for (const auto& [f, e] : s.errors) errors[std::string(field_name(f))] = e;
  j["percent_errors"] = std::move(errors);
  ordered_json angles = ordered_json::object();
  for (const auto& [f, e] : s.angle_errors) angles[std::string(field_name(f))] = e;
  j["angle_abs_errors"] = std::move(angles);
  j["loss"] = s.loss ? ordered_json(*s.loss) : ordered_json(nullptr);
  j["sg_match"] = s.sg_match;
  j["s_phys"] = s.s_phys;
  j["s_hall"] = s.s_hall;
  j["s_presence"] = s.format.presence;
  j["s_type"] = s.format.type;
  j["s_format"] = s.format.format;
  j["latency_s"] = s.latency_s;
  return j.dump();
}

std::vector<TransferRow> transfer_rows(std::span<const InstanceScore> scores) {
  std::map<std::string, TransferRow> rows;
  std::map<std::string, std::array<std::vector<InstanceLoss>, 2>> losses;
  std::map<std::string, std::array<std::vector<double>, 2>> latencies;
  for (const auto& s : scores) {
    auto& row = rows[s.endpoint];
    row.endpoint = s.endpoint;
    const int p = s.protocol == Protocol::SpatialExclusion ? 0 : 1;
    losses[s.endpoint][p].push_back({s.instance_id, s.loss});
    latencies[s.endpoint][p].push_back(s.latency_s);
    for (const auto& [f, e] : s.errors) row.g_max = std::max(row.g_max, std::abs(e));
  }
  std::vector<TransferRow> out;
  for (auto& [name, row] : rows) {
    const auto& l = losses[name];
    if (!l[0].empty()) {
      const auto agg = aggregate(l[0], Protocol::SpatialExclusion);
      row.se = agg.mean;
      row.failure_se = agg.failure_rate();
      row.t_se = group_stats(latencies[name][0]).mean;
    }
    if (!l[1].empty()) {
      const auto agg = aggregate(l[1], Protocol::CompositionalExclusion);
      row.ce = agg.mean;
      row.failure_ce = agg.failure_rate();
      row.t_ce = group_stats(latencies[name][1]).mean;
    }
    if (row.se && row.ce) row.transfer = transfer_ratio(*row.se, *row.ce);
    out.push_back(row);
  }
  return out;
}

ErrorTable error_table(std::span<const InstanceScore> scores, Protocol protocol) {
  ErrorTable t;
  std::vector<Field> columns;
  for (auto f : kAllFields) {
    if (is_numeric(f)) {
      columns.push_back(f);
      t.properties.emplace_back(field_name(f));
    }
  }
  for (const auto& s : scores) {
    if (s.protocol != protocol || !s.parse_ok) continue;
    std::vector<std::optional<double>> row;
    for (auto f : columns) {
      const auto& source = std::find(kAngleFields.begin(), kAngleFields.end(), f) != kAngleFields.end()
                               ? s.angle_errors
                               : s.errors;
      const auto it = source.find(f);
      row.push_back(it == source.end() ? std::nullopt : std::optional<double>(it->second));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

struct Table {
  std::string title;
  std::vector<std::string> headers;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footnotes;
};

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(cells[i]);
    }
    out += '\n';
  };
  line(t.headers);
  for (const auto& r : t.rows) line(r);
  return out;
}

// Display width in code points, so "±" pads like one character.
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string to_text(const Table& t) {
  std::vector<std::size_t> width(t.headers.size(), 0);
  for (std::size_t i = 0; i < t.headers.size(); ++i) width[i] = display_width(t.headers[i]);
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], display_width(r[i]));
  }
  std::string out = t.title + "\n\n";
  auto line = [&](const std::vector<std::string>& cells) {
    std::string l;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) l += "  ";
      const auto pad = width[i] - display_width(cells[i]);
      // First column left-aligned, numbers right-aligned.
      if (i == 0) {
        l += cells[i] + std::string(pad, ' ');
      } else {
        l += std::string(pad, ' ') + cells[i];
      }
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l + '\n';
  };
  line(t.headers);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + '\n';
  for (const auto& r : t.rows) line(r);
  if (!t.footnotes.empty()) {
    out += '\n';
    for (const auto& f : t.footnotes) out += f + '\n';
  }
  return out;
}

std::string num(std::optional<double> v, int precision = 2) {
  if (!v) return "n/a";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  // Avoid "-0.00".
  const double rounded = std::abs(*v) < 0.5 * std::pow(10.0, -precision) ? 0.0 : *v;
  return fmt::format("{:.{}f}", rounded, precision);
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return group_stats(v).mean;
}

std::string symbol(Field f) {
  switch (f) {
    case Field::NAtoms: return "N_A";
    case Field::CellVolume: return "V";
    case Field::Density: return "rho";
    default: return std::string(field_name(f));
  }
}

template <typename Pred>
std::vector<const InstanceScore*> select(std::span<const InstanceScore> scores, Pred pred) {
  std::vector<const InstanceScore*> out;
  for (const auto& s : scores) {
    if (pred(s)) out.push_back(&s);
  }
  return out;
}

std::vector<std::string> materials_of(std::span<const InstanceScore> scores) {
  std::set<std::string> m;
  for (const auto& s : scores) m.insert(s.target.material);
  return {m.begin(), m.end()};
}

std::vector<std::string> endpoints_of(std::span<const InstanceScore> scores) {
  std::set<std::string> e;
  for (const auto& s : scores) e.insert(s.endpoint);
  return {e.begin(), e.end()};
}

std::vector<InstanceScore> only_endpoint(std::span<const InstanceScore> scores, const std::string& endpoint) {
  std::vector<InstanceScore> out;
  for (const auto& s : scores) {
    if (s.endpoint == endpoint) out.push_back(s);
  }
  return out;
}

std::vector<double> radii_of(std::span<const InstanceScore> scores) {
  std::set<double> r;
  for (const auto& s : scores) r.insert(s.target.radius_nm);
  return {r.begin(), r.end()};
}

Table error_by_material(std::span<const InstanceScore> scores, Protocol protocol) {
  const bool se = protocol == Protocol::SpatialExclusion;
  std::vector<std::pair<Field, bool>> columns;  // (field, is angle)
  if (se) {
    for (auto f : kSeLossFields) columns.emplace_back(f, false);
  } else {
    for (auto f : kCeLossFields) columns.emplace_back(f, false);
    for (auto f : kAngleFields) columns.emplace_back(f, true);
  }
  Table t;
  t.title = se ? "Mean percent errors, spatial exclusion (SE)"
               : "Mean percent errors, compositional exclusion (CE); |d angle| in degrees";
  t.headers.push_back("material");
  const auto radii = radii_of(scores);
  for (double r : radii) {
    for (const auto& [f, angle] : columns) {
      t.headers.push_back(fmt::format("R{} {}{}", radius_label(r), angle ? "|d" : "%d", symbol(f) + (angle ? "|" : "")));
    }
  }
  for (const auto& m : materials_of(scores)) {
    std::vector<std::string> row{m};
    for (double r : radii) {
      const auto sel = select(scores, [&](const InstanceScore& s) {
        return s.protocol == protocol && s.target.material == m && s.target.radius_nm == r;
      });
      for (const auto& [f, angle] : columns) {
        std::vector<double> values;
        for (const auto* s : sel) {
          const auto& src = angle ? s->angle_errors : s->errors;
          if (const auto it = src.find(f); it != src.end()) values.push_back(it->second);
        }
        row.push_back(num(mean_of(values)));
      }
    }
    t.rows.push_back(std::move(row));
  }
  t.footnotes.push_back("Averaged over poses and endpoints; n/a where no prediction was scored.");
  return t;
}

Table transfer_table(std::span<const InstanceScore> scores) {
  Table t;
  t.title = "Transfer degradation: T = CE/SE; G_max = largest absolute percent error in any single prediction";
  t.headers = {"endpoint", "SE", "CE", "T", "G_max", "t_SE", "t_CE", "fail_SE", "fail_CE"};
  for (const auto& r : transfer_rows(scores)) {
    t.rows.push_back({r.endpoint, num(r.se), num(r.ce), num(r.transfer), num(r.g_max), num(r.t_se), num(r.t_ce),
                      num(r.failure_se), num(r.failure_ce)});
    if (r.transfer && std::isinf(*r.transfer)) {
      t.footnotes.push_back(fmt::format("{}: T = inf (SE error is 0 while CE is not)", r.endpoint));
    }
    if (r.se && r.ce && !r.transfer) t.footnotes.push_back(fmt::format("{}: T undefined (SE = CE = 0)", r.endpoint));
  }
  return t;
}

Table shift_table(const CorrelationShift& shift, std::string_view from, std::string_view to) {
  Table t;
  t.title = fmt::format(
      "Correlation shift {} -> {} (delta = rho_{} - rho_{}), top {} pairs by |delta|, coefficients averaged over "
      "endpoints",
      from, to, to, from, kCorrelationShiftPairs);
  t.headers = {"pair", fmt::format("rho_{}", from), fmt::format("rho_{}", to), "delta"};
  for (const auto& p : shift.pairs) {
    t.rows.push_back({p.first + "-" + p.second, num(p.rho_source, 3), num(p.rho_target, 3), num(p.delta, 3)});
  }
  if (!shift.notes.empty()) t.footnotes.push_back(fmt::format("{} pairs skipped:", shift.notes.size()));
  for (const auto& n : shift.notes) t.footnotes.push_back("  " + n);
  return t;
}

Table compliance_table(std::span<const InstanceScore> scores) {
  Table t;
  t.title = "Physical-law compliance and hallucination score, mean ± std over both protocols";
  t.headers = {"material", "n", "compliance", "compliance_std", "hallucination", "hallucination_std"};
  for (const auto& m : materials_of(scores)) {
    std::vector<double> phys, hall;
    for (const auto& s : scores) {
      if (s.target.material != m) continue;
      phys.push_back(s.s_phys);
      hall.push_back(s.s_hall);
    }
    const auto p = group_stats(phys);
    const auto h = group_stats(hall);
    t.rows.push_back({m, std::to_string(p.n), num(p.mean), num(p.stddev), num(h.mean), num(h.stddev)});
  }
  return t;
}

std::string compliance_text(const Table& t) {
  // The text form folds mean and std into one "0.90 ± 0.03" cell.
  Table folded;
  folded.title = t.title;
  folded.headers = {"material", "n", "compliance", "hallucination"};
  for (const auto& r : t.rows) folded.rows.push_back({r[0], r[1], r[2] + " ± " + r[3], r[4] + " ± " + r[5]});
  return to_text(folded);
}

Table consistency_table(std::span<const InstanceScore> scores) {
  Table t;
  t.title = "Prediction consistency across poses, C_pred = 1 - min(sd/mean, 1) of per-example errors";
  t.headers = {"endpoint", "protocol", "material", "R_nm", "n", "C_pred"};
  std::map<std::tuple<std::string, int, std::string, double>, std::vector<double>> groups;
  for (const auto& s : scores) {
    auto& g = groups[{s.endpoint, static_cast<int>(s.protocol), s.target.material, s.target.radius_nm}];
    if (s.loss) g.push_back(*s.loss);
  }
  for (const auto& [key, values] : groups) {
    const auto& [endpoint, protocol, material, radius] = key;
    t.rows.push_back({endpoint, std::string(to_string(static_cast<Protocol>(protocol))), material, radius_label(radius),
                      std::to_string(values.size()),
                      values.empty() ? "n/a" : num(prediction_consistency(values), 4)});
  }
  return t;
}

Table group_stats_table(std::span<const InstanceScore> scores) {
  Table t;
  t.title = "Group statistics per endpoint, protocol and property (percent; angles in degrees)";
  t.headers = {"endpoint", "protocol", "property", "n", "mean", "std", "ci95_low", "ci95_high"};
  std::map<std::tuple<std::string, int, int>, std::vector<double>> groups;
  for (const auto& s : scores) {
    for (const auto& [f, e] : s.errors) groups[{s.endpoint, static_cast<int>(s.protocol), static_cast<int>(f)}].push_back(e);
    for (const auto& [f, e] : s.angle_errors) {
      groups[{s.endpoint, static_cast<int>(s.protocol), static_cast<int>(f)}].push_back(e);
    }
  }
  for (const auto& [key, values] : groups) {
    const auto& [endpoint, protocol, field] = key;
    const auto g = group_stats(values);
    std::optional<double> lo, hi;
    if (g.ci95_half_width) {
      lo = g.mean - *g.ci95_half_width;
      hi = g.mean + *g.ci95_half_width;
    }
    t.rows.push_back({endpoint, std::string(to_string(static_cast<Protocol>(protocol))),
                      std::string(field_name(static_cast<Field>(field))), std::to_string(g.n), num(g.mean, 4),
                      num(g.stddev, 4), num(lo, 4), num(hi, 4)});
  }
  return t;
}

Table summary_table(std::span<const InstanceScore> scores) {
  Table t;
  t.title = "Run summary";
  t.headers = {"endpoint", "protocol", "instances", "failed", "failure_rate", "E",
               "S_phys", "S_hall", "S_format", "I_SG"};
  std::map<std::pair<std::string, int>, std::vector<const InstanceScore*>> groups;
  for (const auto& s : scores) groups[{s.endpoint, static_cast<int>(s.protocol)}].push_back(&s);
  for (const auto& [key, sel] : groups) {
    std::vector<InstanceLoss> losses;
    std::vector<double> phys, hall, format, sg;
    for (const auto* s : sel) {
      losses.push_back({s->instance_id, s->loss});
      phys.push_back(s->s_phys);
      hall.push_back(s->s_hall);
      format.push_back(s->format.format);
      sg.push_back(s->sg_match);
    }
    const auto protocol = static_cast<Protocol>(key.second);
    const auto agg = aggregate(losses, protocol);
    t.rows.push_back({key.first, std::string(to_string(protocol)), std::to_string(agg.n_instances),
                      std::to_string(agg.n_failed), num(agg.failure_rate(), 4), num(agg.mean, 4),
                      num(mean_of(phys), 4), num(mean_of(hall), 4), num(mean_of(format), 4), num(mean_of(sg), 4)});
  }
  return t;
}

}  // namespace

std::map<std::string, std::string> build_reports(std::span<const InstanceScore> scores, const std::string& corpus_hash) {
  if (scores.empty()) throw ArgumentError("no scored results to report");
  std::map<std::string, std::string> files;
  auto add = [&](const std::string& stem, const Table& t) {
    files[stem + ".csv"] = to_csv(t);
    files[stem + ".txt"] = to_text(t);
  };
  add("table1a_se", error_by_material(scores, Protocol::SpatialExclusion));
  add("table1b_ce", error_by_material(scores, Protocol::CompositionalExclusion));
  add("table2_transfer", transfer_table(scores));

  // One table pair per endpoint; coefficients are averaged across endpoints.
  std::vector<ErrorTable> se, ce;
  for (const auto& endpoint : endpoints_of(scores)) {
    const auto sel = only_endpoint(scores, endpoint);
    se.push_back(error_table(sel, Protocol::SpatialExclusion));
    ce.push_back(error_table(sel, Protocol::CompositionalExclusion));
  }
  const auto forward = shift_table(correlation_shift(se, ce), "SE", "CE");
  const auto reverse = shift_table(correlation_shift(ce, se), "CE", "SE");
  files["table3_correlation_shift_se_to_ce.csv"] = to_csv(forward);
  files["table3_correlation_shift_ce_to_se.csv"] = to_csv(reverse);
  files["table3_correlation_shift.txt"] = to_text(forward) + "\n" + to_text(reverse);

  const auto compliance = compliance_table(scores);
  files["table4_compliance.csv"] = to_csv(compliance);
  files["table4_compliance.txt"] = compliance_text(compliance);

  add("consistency", consistency_table(scores));
  add("group_stats", group_stats_table(scores));
  auto summary = summary_table(scores);
  summary.footnotes.push_back("corpus " + corpus_hash);
  add("summary", summary);

  std::string jsonl;
  for (const auto& s : scores) jsonl += score_to_json_line(s) + '\n';
  files["scores.jsonl"] = std::move(jsonl);
  return files;
}

void write_reports(const std::map<std::string, std::string>& files, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  for (const auto& [name, content] : files) {
    std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", (out_dir / name).string()));
    out << content;
  }
}

}  // namespace xtalbench
