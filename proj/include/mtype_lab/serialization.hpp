#pragma once

#include "mtype_lab/factorization.hpp"
#include "mtype_lab/haar.hpp"
#include "mtype_lab/ideal_norms.hpp"
#include "mtype_lab/martingale.hpp"
#include "mtype_lab/operator_spec.hpp"
#include "mtype_lab/step_function.hpp"

#include <json.hpp>

#include <string>

namespace mtype {

// All writers use ordered_json with a fixed insertion order, so equal inputs
// serialize to identical bytes. Scalars are ["a/b", "c/d"] pairs meaning
// a + b*sqrt2; rationals are canonical "p/q" strings.
using ojson = nlohmann::ordered_json;

ojson to_json(const QuadRational& x);
QuadRational quad_rational_from_json(const ojson& j);

ojson to_json(const IntervalPartition& p);
IntervalPartition partition_from_json(const ojson& j);

ojson to_json(const StepFunction& f);
StepFunction step_function_from_json(const ojson& j);

ojson to_json(const OperatorSpec& T);
OperatorSpec operator_from_json(const ojson& j);

ojson to_json(const HaarCoefficients& c);
HaarCoefficients haar_coefficients_from_json(const ojson& j);

ojson to_json(const MDS& m);
MDS mds_from_json(const ojson& j);

/// {"mds": ..., "g": ...}; g may be null (factorize then derives the default).
ojson witness_bundle_to_json(const MDS& m, const StepFunction* g);
std::pair<MDS, std::optional<StepFunction>> witness_bundle_from_json(const ojson& j);

ojson to_json(const IdealNormEstimate& est);
ojson to_json(const FactorizationResult& res);
ojson to_json(const RelationReport& report);

/// Parses a JSON document, wrapping syntax errors in ParseError.
ojson parse_json_text(const std::string& text);

std::string estimate_csv_header();
std::string estimate_csv_row(const std::string& operator_label, const IdealNormEstimate& est);

/// 12 significant digits, for human-readable table output.
std::string format_double(double x);

} // namespace mtype
