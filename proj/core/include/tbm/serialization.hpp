#pragma once

// JSON forms of the library types. Membership labels are one-based in every
// file format and zero-based in memory.

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "tbm/algorithms.hpp"
#include "tbm/experiments.hpp"
#include "tbm/model.hpp"

namespace tbm {

using Json = nlohmann::json;

/// Malformed or inconsistent configuration document.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json tensorToJson(const DenseTensor& t);
DenseTensor tensorFromJson(const Json& j);

/// Accepts {"dims", "data"} or one of the names "uninformative",
/// "informative", "embedding-study".
DenseTensor coreFromJson(const Json& j);

/// {"rho", "core", "memberships", "noise"}. When reading, "memberships" may
/// be replaced by "n" for the symmetric balanced setting.
Json specToJson(const TbmSpec& spec);
TbmSpec specFromJson(const Json& j);

Json labelsToJson(const Labels& labels);
Labels labelsFromJson(const Json& j);

Json assignmentToJson(const ClusterAssignment& a);

/// "n" and "rho" are either explicit lists or {"min", "max", "count"}
/// log-spaced ranges.
SweepGrid gridFromJson(const Json& j);
Json gridToJson(const SweepGrid& grid);

Json boundaryFitToJson(const BoundaryFit& fit);

HscInitializer parseHscInitializer(const std::string& name);
std::string hscInitializerName(HscInitializer init);

/// Applies "a.b.c=value" to a JSON document. The value is parsed as JSON
/// when possible and taken as a string otherwise.
void applyOverride(Json& doc, const std::string& assignment);

}  // namespace tbm
