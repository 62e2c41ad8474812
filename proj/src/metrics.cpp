#include "xtalbench/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

namespace xtalbench {

double percent_error(double gen, double ref) {
  if (ref == 0) throw ArgumentError("percent error against a zero reference is undefined");
  return 100.0 * std::abs(gen - ref) / std::abs(ref);
}

double angle_abs_error(double gen, double ref) { return std::abs(gen - ref); }

std::string normalize_space_group(std::string_view symbol) {
  std::string out;
  std::size_t i = 0;
  while (i < symbol.size()) {
    if (symbol.substr(i, 5) == "\\bar{") {
      const auto close = symbol.find('}', i);
      if (close != std::string_view::npos) {
        out += '-';
        out.append(symbol.substr(i + 5, close - i - 5));
        i = close + 1;
        continue;
      }
    }
    // U+0304 / U+0305 combining overline after a digit.
    if (i + 1 < symbol.size() && static_cast<unsigned char>(symbol[i]) == 0xCC &&
        (static_cast<unsigned char>(symbol[i + 1]) == 0x84 || static_cast<unsigned char>(symbol[i + 1]) == 0x85)) {
      if (!out.empty() && std::isdigit(static_cast<unsigned char>(out.back()))) {
        out.insert(out.end() - 1, '-');
      }
      i += 2;
      continue;
    }
    const char ch = symbol[i];
    if (ch != ' ' && ch != '\t' && ch != '_' && ch != '\n' && ch != '\r') out += ch;
    ++i;
  }
  return out;
}

namespace {

std::optional<int> as_it_number(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 1 || v > 230) return std::nullopt;
  return v;
}

}  // namespace

int space_group_match(const std::optional<std::string>& gen, const std::string& ref) {
  if (!gen) return 0;
  const auto g = normalize_space_group(*gen);
  const auto r = normalize_space_group(ref);
  if (g.empty()) return 0;
  if (const auto gn = as_it_number(g), rn = as_it_number(r); gn && rn) return *gn == *rn ? 1 : 0;
  return g == r ? 1 : 0;
}

GroupStats group_stats(std::span<const double> values) {
  if (values.empty()) throw ArgumentError("group statistics need at least one value");
  GroupStats s;
  s.n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n >= 2) {
    double ss = 0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    s.ci95_half_width = 1.96 * *s.stddev / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

double prediction_consistency(std::span<const double> errors) {
  if (errors.size() < 2) return 1.0;
  const auto s = group_stats(errors);
  if (s.mean == 0) return 1.0;
  return 1.0 - std::min(*s.stddev / s.mean, 1.0);
}

std::map<Field, double> property_errors(const PredictionRecord& pred, const AnnotationRecord& ref) {
  std::map<Field, double> out;
  for (auto f : kAllFields) {
    if (!is_numeric(f) || std::find(kAngleFields.begin(), kAngleFields.end(), f) != kAngleFields.end()) continue;
    const auto g = pred.number(f);
    const double r = numeric_value(ref, f);
    if (g && r != 0) out[f] = percent_error(*g, r);
  }
  return out;
}

std::map<Field, double> angle_errors(const PredictionRecord& pred, const AnnotationRecord& ref) {
  std::map<Field, double> out;
  for (auto f : kAngleFields) {
    if (const auto g = pred.number(f)) out[f] = angle_abs_error(*g, numeric_value(ref, f));
  }
  return out;
}

double per_example_mean(const std::map<Field, double>& errors) {
  if (errors.empty()) throw ArgumentError("per-example mean needs at least one property");
  double sum = 0;
  for (const auto& [f, e] : errors) sum += e;
  return sum / static_cast<double>(errors.size());
}

double compliance_tier(double delta) {
  if (delta <= 0.10) return 1.0;
  if (delta <= 0.25) return 0.5;
  return 0.0;
}

double hallucination_tier(double delta) {
  if (delta > 0.25) return 1.0;
  if (delta > 0.10) return 0.5;
  return 0.0;
}

namespace {

std::optional<double> ratio(std::optional<double> num, std::optional<double> den) {
  if (!num || !den) return std::nullopt;
  return *num / *den;
}

}  // namespace

std::array<std::optional<double>, 5> compliance_values(const PredictionRecord& p) {
  return {p.number(Field::Density),
          ratio(p.number(Field::B), p.number(Field::A)),
          ratio(p.number(Field::C), p.number(Field::A)),
          ratio(p.number(Field::BPrim), p.number(Field::APrim)),
          ratio(p.number(Field::CPrim), p.number(Field::APrim))};
}

std::array<double, 5> compliance_values(const AnnotationRecord& r) {
  return {r.density, r.b / r.a, r.c / r.a, r.b_p / r.a_p, r.c_p / r.a_p};
}

double physics_compliance(const PredictionRecord& pred, const AnnotationRecord& ref) {
  if (!pred.parse_ok) return 0.0;
  const auto gen = compliance_values(pred);
  const auto want = compliance_values(ref);
  double sum = 0;
  int n = 0;
  for (std::size_t i = 0; i < gen.size(); ++i) {
    if (!gen[i]) continue;
    ++n;
    const double delta = std::abs(*gen[i] - want[i]) / want[i];
    // Division by a zero predicted edge and similar land here as errors.
    if (std::isfinite(delta)) sum += compliance_tier(delta);
  }
  return n == 0 ? 0.0 : sum / n;
}

double physics_compliance(const std::optional<PredictionRecord>& pred, const AnnotationRecord& ref) {
  return pred ? physics_compliance(*pred, ref) : 0.0;
}

double hallucination_score(const PredictionRecord& pred, const AnnotationRecord& ref) {
  if (!pred.parse_ok) return 1.0;
  double sum = 0;
  int m = 0;
  for (auto f : kPercentErrorFields) {
    const auto g = pred.number(f);
    if (!g) continue;
    const double r = numeric_value(ref, f);
    if (r == 0) continue;
    ++m;
    sum += *g <= 0 ? 1.0 : hallucination_tier(std::abs(*g - r) / std::abs(r));
  }
  return m == 0 ? 0.0 : sum / m;
}

double hallucination_score(const std::optional<PredictionRecord>& pred, const AnnotationRecord& ref) {
  return pred ? hallucination_score(*pred, ref) : 1.0;
}

FormatScore format_faithfulness(const std::map<std::string, ValueKind>& gen,
                                const std::map<std::string, ValueKind>& ref) {
  FormatScore s;
  if (ref.empty()) return s;
  int intersect = 0;
  int type_match = 0;
  for (const auto& [name, kind] : ref) {
    const auto it = gen.find(name);
    if (it == gen.end()) continue;
    ++intersect;
    if (it->second == kind) ++type_match;
  }
  s.presence = static_cast<double>(intersect) / static_cast<double>(ref.size());
  s.type = intersect == 0 ? 0.0 : static_cast<double>(type_match) / intersect;
  s.format = 0.7 * s.presence + 0.3 * s.type;
  return s;
}

FormatScore format_faithfulness(const PredictionRecord& pred, const AnnotationRecord& ref) {
  // Every reference field is populated, so F_ref is the whole schema.
  (void)ref;
  std::map<std::string, ValueKind> want, got;
  for (auto f : kAllFields) {
    want.emplace(field_name(f), is_numeric(f) ? ValueKind::Number : ValueKind::String);
  }
  for (const auto& [f, kind] : pred.kinds) got.emplace(field_name(f), kind);
  return format_faithfulness(got, want);
}

std::optional<double> transfer_ratio(double se, double ce) {
  if (se == 0) {
    if (ce == 0) return std::nullopt;
    return std::numeric_limits<double>::infinity();
  }
  return ce / se;
}

double max_abs_error(std::span<const double> errors) {
  double best = 0;
  for (double e : errors) best = std::max(best, std::abs(e));
  return best;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("pearson: columns differ in length");
  const auto n = x.size();
  if (n < 3) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  // A column whose spread is at rounding level is constant for this purpose;
  // correlating floating-point dust gives arbitrary coefficients.
  auto flat = [n](double ss, double mean) {
    return std::sqrt(ss / static_cast<double>(n)) <= kPearsonFlatTolerance * std::max(1.0, std::abs(mean));
  };
  if (flat(sxx, mx) || flat(syy, my)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

struct PairColumns {
  std::vector<double> x, y;
};

PairColumns paired(const ErrorTable& t, std::size_t i, std::size_t j) {
  PairColumns out;
  for (const auto& row : t.rows) {
    if (i < row.size() && j < row.size() && row[i] && row[j]) {
      out.x.push_back(*row[i]);
      out.y.push_back(*row[j]);
    }
  }
  return out;
}

}  // namespace

CorrelationShift correlation_shift(const ErrorTable& source, const ErrorTable& target, std::size_t top) {
  return correlation_shift(std::span<const ErrorTable>(&source, 1), std::span<const ErrorTable>(&target, 1), top);
}

CorrelationShift correlation_shift(std::span<const ErrorTable> source, std::span<const ErrorTable> target,
                                   std::size_t top) {
  if (source.size() != target.size() || source.empty()) {
    throw ArgumentError("correlation shift: need one source and one target table per group");
  }
  const auto& props = source.front().properties;
  for (std::size_t g = 0; g < source.size(); ++g) {
    if (source[g].properties != props || target[g].properties != props) {
      throw ArgumentError("correlation shift: tables have different property columns");
    }
  }
  CorrelationShift out;
  std::vector<PairShift> all;
  for (std::size_t i = 0; i < props.size(); ++i) {
    for (std::size_t j = i + 1; j < props.size(); ++j) {
      auto [first, second] = std::minmax(props[i], props[j]);
      double sum_s = 0, sum_t = 0;
      int groups = 0;
      for (std::size_t g = 0; g < source.size(); ++g) {
        const auto s = paired(source[g], i, j);
        const auto t = paired(target[g], i, j);
        const auto rs = pearson(s.x, s.y);
        const auto rt = pearson(t.x, t.y);
        if (!rs || !rt) continue;
        sum_s += *rs;
        sum_t += *rt;
        ++groups;
      }
      if (groups == 0) {
        out.notes.push_back(fmt::format("{}-{}: skipped (fewer than 3 paired samples or zero variance)", first, second));
        continue;
      }
      const double rho_s = sum_s / groups, rho_t = sum_t / groups;
      all.push_back({first, second, rho_s, rho_t, rho_t - rho_s});
    }
  }
  auto by_name = [](const PairShift& a, const PairShift& b) {
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  };
  std::sort(all.begin(), all.end(), [&](const PairShift& a, const PairShift& b) {
    const double da = std::abs(a.delta), db = std::abs(b.delta);
    if (da != db) return da > db;
    return by_name(a, b);
  });
  if (all.size() > top) all.resize(top);
  std::sort(all.begin(), all.end(), by_name);
  std::sort(out.notes.begin(), out.notes.end());
  out.pairs = std::move(all);
  return out;
}

}  // namespace xtalbench
