#pragma once

#include "homflow/flow.hpp"
#include "homflow/opflow.hpp"
#include "homflow/verify.hpp"

#include <json.hpp>

#include <filesystem>

namespace homflow::cli {

/// Trace CSV with the fixed header t,norm,energy,rayleigh,tau.
void write_trace_csv(const std::filesystem::path& path, const FlowTrace& trace);

/// Surrogate CSV in the same layout with the added columns h,g,residual.
void write_surrogate_csv(const std::filesystem::path& path, const SurrogateTrace& trace);

/// Pretty-printed JSON document, written atomically (tmp + rename).
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

nlohmann::json suite_to_json(const SuiteResult& result);

/// Full-precision, locale-independent double formatting for the CSV columns.
std::string format_double(double value);

}  // namespace homflow::cli
