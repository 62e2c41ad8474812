#pragma once

#include "xtalbench/annotation.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace xtalbench {

enum class ValueKind { Number, String };

/// A parsed model answer. Every schema field is optional; `kinds` records the
/// type each present field had in the response, so a numeric field written as
/// a quoted string still counts as present but mistyped.
struct PredictionRecord {
  std::map<Field, double> numbers;
  std::optional<std::string> space_group;
  std::optional<std::string> description;
  std::map<Field, ValueKind> kinds;
  std::string raw_response;
  bool parse_ok = false;

  std::optional<double> number(Field field) const;
  bool has(Field field) const { return kinds.count(field) > 0; }
  void set_number(Field field, double value, ValueKind kind = ValueKind::Number);
  void set_text(Field field, std::string value);

  bool operator==(const PredictionRecord&) const = default;
};

/// The record a perfect model would return for `reference`.
PredictionRecord prediction_from_annotation(const AnnotationRecord& reference);

/// Extracts a record from free model output. Prefers a JSON object (fenced or
/// bare); falls back to "label: value unit" lines. Never throws.
PredictionRecord parse_response(std::string_view raw);

/// Numeric value + unit suffix, converted to repo units for `field`.
/// "4.08 nm" -> 40.8 for a length field.
std::optional<double> parse_quantity(std::string_view text, Field field);

/// Canonical field for an alias such as "lattice constant a" or "rho".
std::optional<Field> field_from_alias(std::string_view label);

/// Compact JSON used in run logs; field_kinds preserved.
std::string prediction_to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(std::string_view text);

}  // namespace xtalbench
