#include "tbm/serialization.hpp"

#include <cmath>
#include <set>

namespace tbm {

namespace {

void checkKeys(const Json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + what);
  }
}

const Json& require(const Json& j, const std::string& key, const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(what + " is missing '" + key + "'");
  return *it;
}

template <typename T>
T as(const Json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("field '" + key + "': " + e.what());
  }
}

std::size_t asCount(const Json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError("field '" + key + "' must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

template <typename T, typename Range>
std::vector<T> rangeFromJson(const Json& j, const std::string& key, Range&& spaced) {
  if (j.is_array()) {
    std::vector<T> out;
    for (const auto& v : j) out.push_back(as<T>(v, key));
    return out;
  }
  checkKeys(j, {"min", "max", "count"}, "'" + key + "' range");
  return spaced(as<T>(require(j, "min", key), key), as<T>(require(j, "max", key), key),
                asCount(require(j, "count", key), key + ".count"));
}

}  // namespace

Json tensorToJson(const DenseTensor& t) { return Json{{"dims", t.dims()}, {"data", t.values()}}; }

DenseTensor tensorFromJson(const Json& j) {
  if (!j.is_object()) throw ConfigError("tensor must be an object with 'dims' and 'data'");
  auto dims = as<std::vector<std::size_t>>(require(j, "dims", "tensor"), "dims");
  auto data = as<std::vector<double>>(require(j, "data", "tensor"), "data");
  try {
    return DenseTensor(std::move(dims), std::move(data));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("tensor: ") + e.what());
  }
}

DenseTensor coreFromJson(const Json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "uninformative") return cores::uninformative();
    if (name == "informative") return cores::informative();
    if (name == "embedding-study") return cores::embeddingStudy();
    throw ConfigError("unknown core '" + name + "'; valid names: uninformative, informative, embedding-study");
  }
  return tensorFromJson(j);
}

Json labelsToJson(const Labels& labels) {
  Json out = Json::array();
  for (std::size_t v : labels) out.push_back(v + 1);
  return out;
}

Labels labelsFromJson(const Json& j) {
  if (!j.is_array()) throw ConfigError("labels must be an array");
  Labels out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError("labels are one-based positive integers");
    out.push_back(v.get<std::size_t>() - 1);
  }
  return out;
}

Json specToJson(const TbmSpec& spec) {
  Json memberships = Json::array();
  for (const auto& z : spec.memberships) memberships.push_back(labelsToJson(z));
  return Json{{"rho", spec.rho},
              {"core", tensorToJson(spec.core)},
              {"memberships", memberships},
              {"noise", std::string(toString(spec.noise))}};
}

TbmSpec specFromJson(const Json& j) {
  checkKeys(j, {"rho", "core", "memberships", "n", "noise"}, "model spec");
  TbmSpec spec;
  spec.rho = as<double>(require(j, "rho", "model spec"), "rho");
  spec.core = coreFromJson(require(j, "core", "model spec"));
  try {
    spec.noise = parseNoiseFamily(as<std::string>(j.value("noise", Json("bernoulli")), "noise"));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const bool has_z = j.contains("memberships");
  const bool has_n = j.contains("n");
  if (has_z == has_n) throw ConfigError("model spec needs exactly one of 'memberships' or 'n'");
  try {
    if (has_n) {
      spec = symmetricSpec(spec.rho, std::move(spec.core), asCount(j.at("n"), "n"), spec.noise);
    } else {
      for (const auto& z : j.at("memberships")) spec.memberships.push_back(labelsFromJson(z));
      spec.validate();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model spec: ") + e.what());
  }
  return spec;
}

Json assignmentToJson(const ClusterAssignment& a) {
  Json centroids = Json::array();
  for (std::size_t c = 0; c < a.centroids.rows(); ++c) {
    const auto row = a.centroids.row(c);
    centroids.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return Json{{"labels", labelsToJson(a.labels)}, {"centroids", centroids}, {"cost", a.cost}};
}

HscInitializer parseHscInitializer(const std::string& name) {
  if (name == "vanilla-svd") return HscInitializer::VanillaSvd;
  if (name == "hollow-svd") return HscInitializer::HollowSvd;
  throw ConfigError("unknown HSC initializer '" + name + "'; valid names: vanilla-svd, hollow-svd");
}

std::string hscInitializerName(HscInitializer init) {
  return init == HscInitializer::HollowSvd ? "hollow-svd" : "vanilla-svd";
}

SweepGrid gridFromJson(const Json& j) {
  checkKeys(j,
            {"n", "rho", "replicates", "algorithms", "core", "noise", "master_seed", "threshold", "c_trim",
             "hsc_initializer", "kmeans_restarts", "record_wall_time"},
            "sweep grid");
  SweepGrid g;
  try {
    g.nValues = rangeFromJson<std::size_t>(require(j, "n", "sweep grid"), "n", logSpacedIntegers);
    g.rhoValues = rangeFromJson<double>(require(j, "rho", "sweep grid"), "rho", logSpaced);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  g.algorithms = as<std::vector<std::string>>(require(j, "algorithms", "sweep grid"), "algorithms");
  g.core = coreFromJson(require(j, "core", "sweep grid"));
  if (j.contains("replicates")) g.replicates = asCount(j["replicates"], "replicates");
  if (j.contains("noise")) {
    try {
      g.noise = parseNoiseFamily(as<std::string>(j["noise"], "noise"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (j.contains("master_seed")) g.masterSeed = as<std::uint64_t>(j["master_seed"], "master_seed");
  if (j.contains("threshold")) g.accuracyThreshold = as<double>(j["threshold"], "threshold");
  if (j.contains("c_trim")) g.cTrim = as<double>(j["c_trim"], "c_trim");
  if (j.contains("hsc_initializer")) {
    g.hscInitializer = parseHscInitializer(as<std::string>(j["hsc_initializer"], "hsc_initializer"));
  }
  if (j.contains("kmeans_restarts")) g.kmeansRestarts = asCount(j["kmeans_restarts"], "kmeans_restarts");
  if (j.contains("record_wall_time")) g.recordWallTime = as<bool>(j["record_wall_time"], "record_wall_time");
  return g;
}

Json gridToJson(const SweepGrid& g) {
  return Json{{"n", g.nValues},
              {"rho", g.rhoValues},
              {"replicates", g.replicates},
              {"algorithms", g.algorithms},
              {"core", tensorToJson(g.core)},
              {"noise", std::string(toString(g.noise))},
              {"master_seed", g.masterSeed},
              {"threshold", g.accuracyThreshold},
              {"c_trim", g.cTrim},
              {"hsc_initializer", hscInitializerName(g.hscInitializer)},
              {"kmeans_restarts", g.kmeansRestarts},
              {"record_wall_time", g.recordWallTime}};
}

Json boundaryFitToJson(const BoundaryFit& fit) {
  return Json{{"algorithm", fit.algorithm},
              {"gamma_hat", fit.gammaHat},
              {"intercept", fit.intercept},
              {"weights", fit.weights},
              {"n_cells", fit.nCells},
              {"n_excluded", fit.nExcluded},
              {"n_positive", fit.nPositive},
              {"threshold", fit.threshold},
              {"converged", fit.converged},
              {"iterations", fit.iterations},
              {"gradient_norm", fit.gradientNorm},
              {"wald_statistic", fit.waldStatistic},
              {"reliable", fit.reliable}};
}

void applyOverride(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("override '" + assignment + "' has an empty key");
    if (!node->is_object()) throw ConfigError("override '" + path + "' descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

}  // namespace tbm
