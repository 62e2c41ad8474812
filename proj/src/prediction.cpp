#include "xtalbench/prediction.hpp"

#include <fmt/format.h>
#include <json.hpp>

namespace xtalbench {

using ordered_json = nlohmann::ordered_json;

std::optional<double> PredictionRecord::number(Field field) const {
  const auto it = numbers.find(field);
  if (it == numbers.end()) return std::nullopt;
  return it->second;
}

void PredictionRecord::set_number(Field field, double value, ValueKind kind) {
  numbers[field] = value;
  kinds[field] = kind;
}

void PredictionRecord::set_text(Field field, std::string value) {
  if (field == Field::SpaceGroup) {
    space_group = std::move(value);
  } else if (field == Field::Description) {
    description = std::move(value);
  }
  kinds[field] = ValueKind::String;
}

PredictionRecord prediction_from_annotation(const AnnotationRecord& reference) {
  PredictionRecord out;
  for (auto f : kAllFields) {
    if (is_numeric(f)) out.set_number(f, numeric_value(reference, f));
  }
  out.set_text(Field::SpaceGroup, reference.space_group);
  out.set_text(Field::Description, reference.description);
  out.parse_ok = true;
  return out;
}

std::string prediction_to_json(const PredictionRecord& r) {
  ordered_json j;
  j["parse_ok"] = r.parse_ok;
  ordered_json fields = ordered_json::object();
  ordered_json kinds = ordered_json::object();
  for (auto f : kAllFields) {
    const auto key = std::string(field_name(f));
    if (const auto v = r.number(f)) fields[key] = *v;
    if (f == Field::SpaceGroup && r.space_group) fields[key] = *r.space_group;
    if (f == Field::Description && r.description) fields[key] = *r.description;
    if (const auto it = r.kinds.find(f); it != r.kinds.end()) {
      kinds[key] = it->second == ValueKind::Number ? "number" : "string";
    }
  }
  j["fields"] = std::move(fields);
  j["field_kinds"] = std::move(kinds);
  return j.dump();
}

PredictionRecord prediction_from_json(std::string_view text) {
  const auto j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("prediction record: malformed JSON");
  PredictionRecord r;
  try {
    r.parse_ok = j.at("parse_ok").get<bool>();
    for (const auto& [key, value] : j.at("fields").items()) {
      const auto f = field_from_name(key);
      if (!f) throw ParseError(fmt::format("prediction record: unknown field '{}'", key));
      if (value.is_number()) {
        r.numbers[*f] = value.get<double>();
      } else if (*f == Field::SpaceGroup) {
        r.space_group = value.get<std::string>();
      } else if (*f == Field::Description) {
        r.description = value.get<std::string>();
      }
    }
    for (const auto& [key, value] : j.at("field_kinds").items()) {
      const auto f = field_from_name(key);
      if (!f) throw ParseError(fmt::format("prediction record: unknown field '{}'", key));
      r.kinds[*f] = value.get<std::string>() == "number" ? ValueKind::Number : ValueKind::String;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("prediction record: {}", e.what()));
  }
  return r;
}

}  // namespace xtalbench
