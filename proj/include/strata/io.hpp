#pragma once

#include <string>

#include "json.hpp"
#include "strata/covering.hpp"

namespace strata {

using Json = nlohmann::ordered_json;

// Field documents: power_law, zero, affine_bump, or a grid (recognised by
// its "values" array). power_law without "c0" takes the solution constant.
Json field_to_json(const Field& u);
Field field_from_json(const Json& j);

Json measure_to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const Json& j);

Json quad_to_json(const QuadOptions& q);
Json subspace_to_json(const AffineSubspace& s);
Json density_scan_to_json(const DensityScan& scan);
Json strata_report_to_json(const StrataReport& report, int n);
// One row per point and scale: x..., r, gap, gap_tol, deficit_1..deficit_n.
std::string strata_report_csv(const StrataReport& report, int n);
Json packing_report_to_json(const PackingReport& rep);
Json cover_tree_to_json(const CoverTree& tree);
Json tail_to_json(const TailResult& tail, int j);
std::string tail_csv(const TailResult& tail);

Json error_to_json(const Error& e);

// Text and file helpers; failures throw InvalidArgument.
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
Json read_json(const std::string& path);

// Shortest round-trip form, "nan"/"inf" for non-finite values.
std::string format_double(double v);

}  // namespace strata
