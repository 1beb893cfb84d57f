#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "seqcode/experiment.hpp"

namespace seqcode {

namespace pt = boost::property_tree;

std::string to_string(MatrixSource source) {
  switch (source) {
    case MatrixSource::RandomUniform: return "random-uniform";
    case MatrixSource::RandomGaussian: return "random-gaussian";
    case MatrixSource::File: return "file";
  }
  return "unknown";
}

MatrixSource parse_matrix_source(const std::string& text) {
  if (text == "random-uniform") return MatrixSource::RandomUniform;
  if (text == "random-gaussian") return MatrixSource::RandomGaussian;
  if (text == "file") return MatrixSource::File;
  throw std::invalid_argument("unknown matrix source '" + text + "'");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<int> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (p.empty()) throw std::invalid_argument("empty entry in integer list '" + text + "'");
    std::size_t used = 0;
    const int v = std::stoi(p, &used);
    if (used != p.size()) throw std::invalid_argument("malformed integer '" + p + "'");
    out.push_back(v);
  }
  return out;
}

namespace {

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<double> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (p.empty()) continue;
    std::size_t used = 0;
    out.push_back(std::stod(p, &used));
    if (used != p.size()) throw std::invalid_argument("malformed number '" + p + "'");
  }
  return out;
}

int parse_int(const std::string& text) {
  std::size_t used = 0;
  const int v = std::stoi(text, &used);
  if (used != text.size()) throw std::invalid_argument("malformed integer '" + text + "'");
  return v;
}

// Collects keys as they are read so leftovers can be reported.
class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) tree_ = *child;
  }

  std::optional<std::string> get(const std::string& key) {
    seen_.insert(key);
    if (auto v = tree_.get_optional<std::string>(key)) {
      std::string s = *v;
      boost::trim(s);
      return s;
    }
    return std::nullopt;
  }

  std::string require(const std::string& key) {
    if (auto v = get(key)) return *v;
    throw std::invalid_argument("missing [" + name_ + "] " + key);
  }

  void reject_unknown() const {
    for (const auto& kv : tree_) {
      if (!seen_.count(kv.first)) throw std::invalid_argument("unknown key [" + name_ + "] " + kv.first);
    }
  }

 private:
  std::string name_;
  pt::ptree tree_;
  std::set<std::string> seen_;
};

}  // namespace

std::vector<PhasePlan> parse_phase_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<PhasePlan> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (p.empty()) continue;
    PhasePlan plan;
    std::string body = p;
    if (const auto at = body.find('@'); at != std::string::npos) {
      plan.responders = parse_int(body.substr(at + 1));
      body = body.substr(0, at);
    }
    const auto colon = body.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("phase '" + p + "' is not rank:iterations");
    plan.rank = parse_int(body.substr(0, colon));
    plan.iterations = parse_int(body.substr(colon + 1));
    out.push_back(plan);
  }
  if (out.empty()) throw std::invalid_argument("phase list is empty");
  return out;
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  const std::set<std::string> known{"cluster", "latency", "problem", "schedule", "run"};
  for (const auto& kv : root) {
    if (!known.count(kv.first)) throw std::invalid_argument("unknown config section [" + kv.first + "]");
  }

  ExperimentConfig cfg;
  Section cluster(root, "cluster");
  cfg.workers = parse_int(cluster.require("L"));
  cfg.rows_per_worker = parse_int(cluster.require("n"));
  cluster.reject_unknown();

  Section latency(root, "latency");
  const std::string kind = latency.get("kind").value_or("exponential");
  const auto rate = latency.get("rate");
  const auto value = latency.get("value");
  const auto shift = latency.get("shift");
  if (kind == "exponential") {
    cfg.latency = ExponentialLatency{std::stod(rate.value_or("1"))};
  } else if (kind == "deterministic") {
    if (!value) throw std::invalid_argument("missing [latency] value");
    cfg.latency = DeterministicLatency{std::stod(*value)};
  } else if (kind == "shifted-exponential") {
    if (!shift) throw std::invalid_argument("missing [latency] shift");
    cfg.latency = ShiftedExponentialLatency{std::stod(*shift), std::stod(rate.value_or("1"))};
  } else {
    throw std::invalid_argument("unknown latency kind '" + kind + "'");
  }
  cfg.latency_seed = std::stoull(latency.get("seed").value_or("1"));
  latency.reject_unknown();

  Section problem(root, "problem");
  cfg.problem.rows = parse_int(problem.require("w"));
  cfg.problem.cols = parse_int(problem.require("m"));
  cfg.problem.rank = parse_int(problem.get("rank").value_or(std::to_string(std::min(cfg.problem.rows, cfg.problem.cols))));
  cfg.problem.gamma = std::stod(problem.require("gamma"));
  cfg.problem.source = parse_matrix_source(problem.get("source").value_or("random-uniform"));
  cfg.problem.seed = std::stoull(problem.get("seed").value_or("1"));
  cfg.problem.file = problem.get("file").value_or("");
  problem.reject_unknown();

  Section schedule(root, "schedule");
  cfg.phases = parse_phase_list(schedule.require("phases"));
  const std::string config_text = schedule.get("configuration").value_or("auto");
  if (config_text != "auto") cfg.configuration = Configuration{cfg.workers, cfg.rows_per_worker, parse_int_list(config_text)};
  cfg.baseline_iterations = parse_int(schedule.require("baseline_iterations"));
  if (auto s = schedule.get("stop_below")) cfg.stop_below = std::stod(*s);
  if (auto t = schedule.get("thresholds")) cfg.thresholds = parse_double_list(*t);
  schedule.reject_unknown();

  Section run(root, "run");
  cfg.label = run.get("label").value_or("custom");
  cfg.replications = parse_int(run.get("replications").value_or("1"));
  const std::string second = run.get("charge_second_round").value_or("false");
  if (second != "true" && second != "false") throw std::invalid_argument("charge_second_round must be true or false");
  cfg.charge_second_round = second == "true";
  run.reject_unknown();

  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path.string());
  return parse_experiment_config(in);
}

}  // namespace seqcode
