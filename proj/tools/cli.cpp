#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include "tbm/algorithms.hpp"
#include "tbm/experiments.hpp"
#include "tbm/serialization.hpp"

namespace tbm::cli {

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string readText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

void writeText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

Json readJson(const std::string& path) {
  const std::string text = readText(path);
  Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("'" + path + "' is not valid JSON");
  return doc;
}

Json loadConfig(const std::string& path, const std::vector<std::string>& overrides) {
  Json doc = path.empty() ? Json::object() : readJson(path);
  for (const auto& o : overrides) applyOverride(doc, o);
  return doc;
}

std::string dumpJson(const Json& j) { return j.dump(2) + "\n"; }

struct ClusterOptions {
  std::string tensorPath;
  std::string configPath;
  std::string algorithm;
  std::string truthPath;
  std::string outPath;
  std::vector<std::string> overrides;
};

PipelineParams paramsFromJson(const Json& j, std::string& algorithm) {
  const std::set<std::string> allowed{"algorithm", "mode",           "clusters", "tau",     "rho",
                                      "c_trim",    "hsc_initializer", "seed",     "restarts"};
  if (!j.is_object()) throw ConfigError("cluster parameters must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in cluster parameters");
  }
  PipelineParams p;
  try {
    if (j.contains("algorithm") && algorithm.empty()) algorithm = j["algorithm"].get<std::string>();
    if (j.contains("mode")) {
      const auto mode = j["mode"].get<long long>();
      if (mode < 1) throw ConfigError("mode is one-based and must be >= 1");
      p.mode = static_cast<std::size_t>(mode - 1);
    }
    if (j.contains("clusters")) p.clusters = j["clusters"].get<std::size_t>();
    if (j.contains("tau")) {
      const Json& tau = j["tau"];
      if (tau.is_string() && (tau == "inf" || tau == "infinity")) {
        p.trim.tau = std::numeric_limits<double>::infinity();
      } else {
        p.trim.tau = tau.get<double>();
      }
    }
    if (j.contains("rho")) p.trim.rho = j["rho"].get<double>();
    if (j.contains("c_trim")) p.trim.cTrim = j["c_trim"].get<double>();
    if (j.contains("hsc_initializer")) p.hscInitializer = parseHscInitializer(j["hsc_initializer"].get<std::string>());
    if (j.contains("seed")) p.kmeans.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("restarts")) p.kmeans.restarts = j["restarts"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("cluster parameters: ") + e.what());
  }
  return p;
}

Labels truthFromJson(const Json& doc, std::size_t mode) {
  if (doc.is_array()) return labelsFromJson(doc);
  if (doc.is_object() && doc.contains("labels")) return labelsFromJson(doc["labels"]);
  if (doc.is_object() && doc.contains("spec")) {
    const TbmSpec spec = specFromJson(doc["spec"]);
    if (mode >= spec.memberships.size()) throw ConfigError("truth spec has no mode " + std::to_string(mode + 1));
    return spec.memberships[mode];
  }
  throw ConfigError("truth must be a label array, an object with 'labels', or a sampled tensor file with 'spec'");
}

int cmdSample(const std::string& configPath, const std::string& outPath, const std::vector<std::string>& overrides,
              std::ostream& out) {
  const Json cfg = loadConfig(configPath, overrides);
  if (!cfg.is_object()) throw ConfigError("sample config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    if (key != "model" && key != "seed") throw ConfigError("unknown key '" + key + "' in sample config");
  }
  if (!cfg.contains("model")) throw ConfigError("sample config is missing 'model'");
  const TbmSpec spec = specFromJson(cfg["model"]);
  std::uint64_t seed = 0;
  if (cfg.contains("seed")) {
    if (!cfg["seed"].is_number_unsigned()) throw ConfigError("seed must be a nonnegative integer");
    seed = cfg["seed"].get<std::uint64_t>();
  }
  const DenseTensor y = sample(spec, seed);
  Json doc = tensorToJson(y);
  doc["spec"] = specToJson(spec);
  doc["seed"] = seed;
  writeText(outPath, dumpJson(doc));
  out << "wrote " << formatDims(y.dims()) << " tensor to " << outPath << "\n";
  return kOk;
}

int cmdCluster(const ClusterOptions& o, std::ostream& out) {
  const Json cfg = loadConfig(o.configPath, o.overrides);
  std::string algorithm = o.algorithm;
  const PipelineParams params = paramsFromJson(cfg, algorithm);
  if (algorithm.empty()) throw ConfigError("no algorithm given (use --algorithm or the 'algorithm' key)");
  const Pipeline pipeline = parsePipeline(algorithm);

  const DenseTensor y = tensorFromJson(readJson(o.tensorPath));
  const ClusterAssignment a = runPipeline(pipeline, y, params);

  Json doc = assignmentToJson(a);
  doc["algorithm"] = algorithm;
  if (!o.truthPath.empty()) {
    const Labels truth = truthFromJson(readJson(o.truthPath), params.mode);
    doc["loss"] = misclassification(truth, a.labels, params.clusters);
  }
  const std::string text = dumpJson(doc);
  if (o.outPath.empty()) {
    out << text;
  } else {
    writeText(o.outPath, text);
    out << "wrote assignment to " << o.outPath << "\n";
  }
  return kOk;
}

int cmdSweep(const std::string& configPath, const std::string& outPath, std::size_t jobs,
             const std::vector<std::string>& overrides, std::ostream& out) {
  if (jobs == 0) throw ConfigError("--jobs must be >= 1");
  const SweepGrid grid = gridFromJson(loadConfig(configPath, overrides));
  for (const auto& name : grid.algorithms) parsePipeline(name);
  grid.validate();
  const auto results = runSweep(grid, jobs);
  std::ostringstream csv;
  writeCsv(csv, results);
  writeText(outPath, csv.str());
  const auto failed = std::count_if(results.begin(), results.end(), [](const CellResult& c) {
    return std::isnan(c.accuracy);
  });
  out << "wrote " << results.size() << " cells to " << outPath << " (" << failed << " failed)\n";
  return kOk;
}

int cmdFitBoundary(const std::string& csvPath, const std::string& algorithm, double threshold,
                   const std::string& outPath, std::ostream& out) {
  parsePipeline(algorithm);
  if (!(threshold > 0.5 && threshold < 1.0)) throw ConfigError("threshold must lie in (0.5, 1)");
  std::istringstream in(readText(csvPath));
  const auto results = readCsv(in);
  const BoundaryFit fit = fitBoundary(results, algorithm, threshold);
  const std::string text = dumpJson(boundaryFitToJson(fit));
  if (outPath.empty()) {
    out << text;
  } else {
    writeText(outPath, text);
    out << "gamma_hat(" << algorithm << ") = " << fit.gammaHat << (fit.reliable ? "" : " (unreliable)")
        << "; wrote " << outPath << "\n";
  }
  return kOk;
}

int cmdEmbeddingStudy(const std::string& configPath, const std::string& outDir,
                      const std::vector<std::string>& overrides, std::ostream& out) {
  const Json cfg = loadConfig(configPath, overrides);
  if (!cfg.is_object()) throw ConfigError("embedding-study config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    static const std::set<std::string> allowed{"n", "rho", "core", "noise", "master_seed", "c_trim"};
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in embedding-study config");
  }
  EmbeddingStudyConfig study;
  try {
    if (cfg.contains("n")) study.n = cfg["n"].get<std::size_t>();
    if (!cfg.contains("rho")) throw ConfigError("embedding-study config is missing 'rho'");
    const Json& rho = cfg["rho"];
    if (rho.is_array()) {
      study.rhoValues = rho.get<std::vector<double>>();
    } else {
      study.rhoValues = logSpaced(rho.at("min").get<double>(), rho.at("max").get<double>(),
                                  rho.at("count").get<std::size_t>());
    }
    if (cfg.contains("core")) study.core = coreFromJson(cfg["core"]);
    if (cfg.contains("noise")) study.noise = parseNoiseFamily(cfg["noise"].get<std::string>());
    if (cfg.contains("master_seed")) study.masterSeed = cfg["master_seed"].get<std::uint64_t>();
    if (cfg.contains("c_trim")) study.cTrim = cfg["c_trim"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("embedding-study config: ") + e.what());
  }

  const auto snapshots = embeddingStudy(study);
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (ec) throw IoError("cannot create directory '" + outDir + "': " + ec.message());
  const std::filesystem::path dir(outDir);

  std::ostringstream hollow, hsc;
  writeEmbeddingTsv(hollow, snapshots, false);
  writeEmbeddingTsv(hsc, snapshots, true);
  writeText((dir / "hollow-svd.tsv").string(), hollow.str());
  writeText((dir / "hsc.tsv").string(), hsc.str());

  Json probes = Json::array();
  for (const auto& s : snapshots) {
    probes.push_back(Json{{"rho", s.rho},
                          {"seed", s.seed},
                          {"hollow_svd_probe_accuracy", s.hollowSvdProbe},
                          {"hsc_probe_accuracy", s.hscProbe}});
  }
  writeText((dir / "probes.json").string(), dumpJson(probes));
  out << "wrote embeddings for " << snapshots.size() << " densities to " << outDir << "\n";
  return kOk;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tensor block model clustering experiments", "tbm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tbm 0.1.0");

  std::vector<std::string> overrides;
  std::string config_path, out_path;

  auto* sample_cmd = app.add_subcommand("sample", "Sample a data tensor from a model spec");
  sample_cmd->add_option("-c,--config", config_path, "JSON config {model, seed}")->required();
  sample_cmd->add_option("-o,--out", out_path, "Output tensor JSON")->required();
  sample_cmd->add_option("--set", overrides, "Config override key=value (repeatable)");

  ClusterOptions cluster;
  auto* cluster_cmd = app.add_subcommand("cluster", "Cluster one mode of a tensor file");
  cluster_cmd->add_option("-t,--tensor", cluster.tensorPath, "Tensor JSON {dims, data}")->required();
  cluster_cmd->add_option("-a,--algorithm", cluster.algorithm, "hollow-svd | vanilla-svd | hsc | aggregate-svd");
  cluster_cmd->add_option("-c,--config", cluster.configPath, "JSON parameters");
  cluster_cmd->add_option("--truth", cluster.truthPath, "True labels (array, {labels}, or a sampled tensor file)");
  cluster_cmd->add_option("-o,--out", cluster.outPath, "Output assignment JSON (stdout when omitted)");
  cluster_cmd->add_option("--set", cluster.overrides, "Parameter override key=value (repeatable)");

  std::size_t jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a phase-transition sweep");
  sweep_cmd->add_option("-c,--config", config_path, "Grid JSON")->required();
  sweep_cmd->add_option("-o,--out", out_path, "Output CSV")->required();
  sweep_cmd->add_option("-j,--jobs", jobs, "Worker threads");
  sweep_cmd->add_option("--set", overrides, "Config override key=value (repeatable)");

  std::string csv_path, fit_algorithm;
  double threshold = 0.9;
  auto* fit_cmd = app.add_subcommand("fit-boundary", "Fit the log-log phase boundary from a sweep CSV");
  fit_cmd->add_option("--csv", csv_path, "Sweep CSV")->required();
  fit_cmd->add_option("-a,--algorithm", fit_algorithm, "Algorithm whose cells are fitted")->required();
  fit_cmd->add_option("--threshold", threshold, "Accuracy threshold");
  fit_cmd->add_option("-o,--out", out_path, "Output JSON (stdout when omitted)");

  std::string out_dir;
  auto* embed_cmd = app.add_subcommand("embedding-study", "Write 2-D embeddings of Hollow SVD and HSC");
  embed_cmd->add_option("-c,--config", config_path, "JSON config {n, rho, core, master_seed, ...}")->required();
  embed_cmd->add_option("-o,--out-dir", out_dir, "Output directory")->required();
  embed_cmd->add_option("--set", overrides, "Config override key=value (repeatable)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? e.what() : app.help()) << "\n";
      return kOk;
    }
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (*sample_cmd) return cmdSample(config_path, out_path, overrides, out);
    if (*cluster_cmd) return cmdCluster(cluster, out);
    if (*sweep_cmd) return cmdSweep(config_path, out_path, jobs, overrides, out);
    if (*fit_cmd) return cmdFitBoundary(csv_path, fit_algorithm, threshold, out_path, out);
    if (*embed_cmd) return cmdEmbeddingStudy(config_path, out_dir, overrides, out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const UnknownPipelineError& e) {
    err << "error: " << e.what() << "\n";
    return kUnknownAlgorithm;
  } catch (const DegenerateLabelsError& e) {
    err << "degenerate statistics: " << e.what() << "\n";
    return kDegenerate;
  } catch (const FitConvergenceError& e) {
    err << "degenerate statistics: " << e.what() << "\n";
    return kDegenerate;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::out_of_range& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace tbm::cli
