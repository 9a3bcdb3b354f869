#include "tworate/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace tworate {
namespace {

using nlohmann::json;

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(fmt::format("'{}': {}", path.string(), what));
}

DistortionMeasure parse_distortion(const std::filesystem::path& path, const json& j,
                                   const std::string& source, int source_card) {
  if (!j.is_object() || !j.contains("matrix"))
    fail(path, fmt::format("distortion for '{}' needs a matrix", source));
  const auto& rows = j.at("matrix");
  if (!rows.is_array() || rows.empty())
    fail(path, fmt::format("distortion matrix for '{}' must be a nonempty array", source));
  int recon_card = j.value("recon_cardinality", 0);
  if (recon_card == 0) recon_card = static_cast<int>(rows.at(0).size());
  DistortionMeasure d{source, Variable{source + "_hat", recon_card}, {}};
  for (const auto& row : rows) {
    if (!row.is_array() || static_cast<int>(row.size()) != recon_card)
      fail(path, fmt::format("distortion matrix for '{}' has ragged rows", source));
    for (const auto& x : row) {
      if (!x.is_number()) fail(path, fmt::format("distortion matrix for '{}': non-number", source));
      d.cost.push_back(x.get<double>());
    }
  }
  try {
    d.validate(source_card);
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return d;
}

}  // namespace

ModelFile read_model_file(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (!j.is_object()) fail(path, "top level must be an object");
  ModelFile out;

  if (j.contains("gaussian")) {
    const auto& g = j.at("gaussian");
    if (!g.is_object()) fail(path, "gaussian block must be an object");
    GaussianSourceSpec spec;
    spec.var_a = g.value("var_a", -1.0);
    spec.var_b = g.value("var_b", -1.0);
    spec.var_z = g.value("var_z", -1.0);
    try {
      spec.validate();
    } catch (const std::exception& e) {
      fail(path, fmt::format("gaussian block: {}", e.what()));
    }
    out.gaussian = spec;
  }

  if (!j.contains("variables")) {
    if (out.gaussian) return out;   // gaussian-only file
    fail(path, "missing 'variables'");
  }

  std::vector<Variable> vars;
  for (const auto& v : j.at("variables")) {
    if (!v.is_object() || !v.contains("name") || !v.contains("cardinality"))
      fail(path, "each variable needs name and cardinality");
    vars.push_back({v.at("name").get<std::string>(), v.at("cardinality").get<int>()});
  }
  if (!j.contains("pmf")) fail(path, "missing 'pmf'");
  std::vector<double> pmf;
  for (const auto& x : j.at("pmf")) {
    if (!x.is_number()) fail(path, "pmf entries must be numbers");
    pmf.push_back(x.get<double>());
  }

  if (!j.contains("chain")) fail(path, "missing 'chain'");
  const std::string chain = j.at("chain").get<std::string>();
  ChainDirection dir;
  if (chain == "y-x-z") dir = ChainDirection::YXZ;
  else if (chain == "y-z-x") dir = ChainDirection::YZX;
  else fail(path, fmt::format("chain must be 'y-x-z' or 'y-z-x', got '{}'", chain));

  std::optional<DistortionMeasure> dx, dz;
  int card_x = 0, card_z = 0;
  for (const auto& v : vars) {
    if (v.name == "x") card_x = v.cardinality;
    if (v.name == "z") card_z = v.cardinality;
  }
  if (j.contains("distortions")) {
    const auto& ds = j.at("distortions");
    if (!ds.is_object()) fail(path, "'distortions' must be an object");
    if (ds.contains("dx")) dx = parse_distortion(path, ds.at("dx"), "x", card_x);
    if (ds.contains("dz")) dz = parse_distortion(path, ds.at("dz"), "z", card_z);
  }

  try {
    JointPmf joint(std::move(vars), std::move(pmf));
    out.model = SourceModel::create(std::move(joint), dir, std::move(dx), std::move(dz));
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return out;
}

FactorsFile read_factors_file(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (!j.is_object() || !j.contains("variables") || !j.contains("factors"))
    fail(path, "factors file needs 'variables' and 'factors'");
  FactorsFile out;
  for (const auto& v : j.at("variables")) {
    if (v.is_string()) {
      out.spec.variables.push_back(v.get<std::string>());
      out.cardinalities.push_back(2);
    } else if (v.is_object() && v.contains("name")) {
      out.spec.variables.push_back(v.at("name").get<std::string>());
      out.cardinalities.push_back(v.value("cardinality", 2));
    } else {
      fail(path, "variables must be names or {name, cardinality} objects");
    }
  }
  for (const auto& f : j.at("factors")) {
    if (!f.is_array()) fail(path, "each factor must be an array of variable names");
    std::vector<std::string> scope;
    for (const auto& n : f) scope.push_back(n.get<std::string>());
    out.spec.factors.push_back(std::move(scope));
  }
  try {
    out.spec.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return out;
}

SearchBudget RunConfig::budget() const {
  SearchBudget b;
  b.restarts = restarts;
  b.refinement_rounds = refinement_rounds;
  b.grid_levels = grid_levels;
  b.card_u = card_u;
  b.card_v = card_v;
  b.card_w = card_w;
  b.seed = seed;
  return b;
}

std::string frontier_csv(const std::vector<FrontierPoint>& pts) {
  std::string out = "r1,r,dx\n";
  for (const auto& p : pts)
    out += fmt::format("{:.9g},{:.9g},{:.9g}\n", p.r1, p.rate, p.distortion);
  return out;
}

}  // namespace tworate
