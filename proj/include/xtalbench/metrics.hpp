#pragma once

#include "xtalbench/annotation.hpp"
#include "xtalbench/prediction.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xtalbench {

/// 100 |gen - ref| / |ref|. Throws ArgumentError when ref == 0.
double percent_error(double gen, double ref);

/// |gen - ref| in degrees, no wrapping.
double angle_abs_error(double gen, double ref);

/// Whitespace and underscores removed; a combining overline after a digit
/// ("3̄") and "\bar{3}" become "-3".
std::string normalize_space_group(std::string_view symbol);

/// 1 when the normalized symbols agree (or both are the same IT number).
int space_group_match(const std::optional<std::string>& gen, const std::string& ref);

struct GroupStats {
  std::size_t n = 0;
  double mean = 0;
  std::optional<double> stddev;          // n - 1 divisor; absent for n < 2
  std::optional<double> ci95_half_width;  // 1.96 sd / sqrt(n)
};

/// Throws ArgumentError on an empty list.
GroupStats group_stats(std::span<const double> values);

/// 1 - min(sd / mean, 1) over one (material, radius)'s errors across poses.
/// Returns 1 when the mean is 0 or fewer than two values are given.
double prediction_consistency(std::span<const double> errors);

/// Properties scored by percent error, in report order.
inline constexpr std::array<Field, 9> kPercentErrorFields{
    Field::NAtoms, Field::CellVolume, Field::A,     Field::B,    Field::C,
    Field::Density, Field::APrim,     Field::BPrim, Field::CPrim};

inline constexpr std::array<Field, 3> kAngleFields{Field::AlphaPrim, Field::BetaPrim, Field::GammaPrim};

/// Percent error per numeric property present in both records (angles excluded).
std::map<Field, double> property_errors(const PredictionRecord& pred, const AnnotationRecord& ref);

/// Absolute angle errors for the primitive angles present in `pred`.
std::map<Field, double> angle_errors(const PredictionRecord& pred, const AnnotationRecord& ref);

/// Mean over the given properties that are present. Throws ArgumentError on an empty map.
double per_example_mean(const std::map<Field, double>& errors);

/// s_p for a relative deviation.
double compliance_tier(double delta);

/// h_p for a relative deviation of a physical (g > 0) value.
double hallucination_tier(double delta);

/// Properties of the compliance check.
enum class ComplianceProperty { Density, BOverA, COverA, BOverAPrim, COverAPrim };

/// The five compliance scalars derived from a record; absent where an input is missing.
std::array<std::optional<double>, 5> compliance_values(const PredictionRecord& pred);
std::array<double, 5> compliance_values(const AnnotationRecord& ref);

double physics_compliance(const PredictionRecord& pred, const AnnotationRecord& ref);
double physics_compliance(const std::optional<PredictionRecord>& pred, const AnnotationRecord& ref);

double hallucination_score(const PredictionRecord& pred, const AnnotationRecord& ref);
double hallucination_score(const std::optional<PredictionRecord>& pred, const AnnotationRecord& ref);

struct FormatScore {
  double presence = 0;
  double type = 0;
  double format = 0;
};

FormatScore format_faithfulness(const PredictionRecord& pred, const AnnotationRecord& ref);

/// Same score over arbitrary non-null field sets keyed by name.
FormatScore format_faithfulness(const std::map<std::string, ValueKind>& gen,
                                const std::map<std::string, ValueKind>& ref);

/// CE / SE: +inf when SE = 0 < CE; absent when both are 0.
std::optional<double> transfer_ratio(double se, double ce);

/// Largest value in a list of absolute per-property errors; 0 when empty.
double max_abs_error(std::span<const double> errors);

/// Relative population standard deviation below which a column counts as constant.
inline constexpr double kPearsonFlatTolerance = 1e-9;

/// Two-pass Pearson coefficient; absent for n < 3 or a (numerically) constant column.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Rows are instances, columns properties; a missing value is nullopt.
struct ErrorTable {
  std::vector<std::string> properties;
  std::vector<std::vector<std::optional<double>>> rows;
};

struct PairShift {
  std::string first;
  std::string second;
  double rho_source = 0;
  double rho_target = 0;
  double delta = 0;  // rho_target - rho_source
};

struct CorrelationShift {
  std::vector<PairShift> pairs;   // selected pairs, alphabetical
  std::vector<std::string> notes;  // skipped pairs and why
};

inline constexpr std::size_t kCorrelationShiftPairs = 14;

/// Pearson per property pair under each table, then the `top` pairs by |delta|
/// (ties by name), presented alphabetically. Both tables must share columns.
CorrelationShift correlation_shift(const ErrorTable& source, const ErrorTable& target,
                                   std::size_t top = kCorrelationShiftPairs);

/// Grouped form: source[i] and target[i] belong to one group (one model).
/// Coefficients are averaged over the groups where the pair is defined under
/// both protocols.
CorrelationShift correlation_shift(std::span<const ErrorTable> source, std::span<const ErrorTable> target,
                                   std::size_t top = kCorrelationShiftPairs);

}  // namespace xtalbench
