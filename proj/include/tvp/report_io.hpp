#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tvp/pipeline.hpp"
#include "tvp/regress.hpp"
#include "tvp/simlab.hpp"
#include "tvp/sspace.hpp"
#include "tvp/unitroot.hpp"

namespace tvp {

using Json = nlohmann::ordered_json;

/// 64-bit FNV-1a as 16 lowercase hex digits.
[[nodiscard]] std::string fnv1a_hex(std::string_view bytes);

// Non-finite numbers are written as null.
[[nodiscard]] Json to_json(const unitroot::AdfResult& r);
[[nodiscard]] Json to_json(const regress::OlsResult& r);
[[nodiscard]] Json to_json(const regress::CusumResult& r);
[[nodiscard]] Json to_json(const regress::RecursivePath& r);
[[nodiscard]] Json to_json(const sspace::MleResult& r);
[[nodiscard]] Json to_json(const pipeline::SubSampleRow& r);
[[nodiscard]] Json to_json(const simlab::McSummary& s);

/// Whole report; `with_timestamp = false` gives the byte-stable form.
[[nodiscard]] Json report_to_json(const pipeline::Report& report, bool with_timestamp = true);

[[nodiscard]] Json config_to_json(const pipeline::PipelineConfig& cfg);
/// Overlays the keys present in `j` on `base`; unknown keys are InvalidArgument.
[[nodiscard]] pipeline::PipelineConfig config_from_json(const Json& j, pipeline::PipelineConfig base = {});
[[nodiscard]] pipeline::PipelineConfig read_config_file(const std::string& path,
                                                        pipeline::PipelineConfig base = {});

// Plain-text tables in the layout of the published output.
[[nodiscard]] std::string adf_text(const std::vector<pipeline::AdfRow>& rows);
[[nodiscard]] std::string ols_text(const regress::OlsResult& r, const std::string& dep, const std::string& reg,
                                   MonthDate first, MonthDate last);
[[nodiscard]] std::string mle_text(const sspace::MleResult& r, MonthDate first, MonthDate last);
[[nodiscard]] std::string subsample_text(const std::vector<pipeline::SubSampleRow>& rows);
[[nodiscard]] std::string report_text(const pipeline::Report& report);

void write_tabular_csv(std::ostream& out, const pipeline::Tabular& t);

/// report.json plus every table and figure CSV that the report can produce.
/// Returns the written file names.
std::vector<std::string> write_outputs(const pipeline::Report& report, const std::filesystem::path& dir,
                                       bool with_timestamp = true);

void write_mc_reps_csv(std::ostream& out, const simlab::McSummary& s);

}  // namespace tvp
