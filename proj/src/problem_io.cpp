#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sldp/problem_io.hpp"

namespace sldp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw MalformedProblemFile(path + ": " + what);
}

const json& member(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

const json* member_opt(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i)
    v[i] = as_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

// Bound arrays use null for the missing (infinite) side.
Eigen::VectorXd as_bounds(const json& j, double inf_value, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (j[i].is_null())
      v[i] = inf_value;
    else
      v[i] = as_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

json bounds_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isinf(v[i]))
      out.push_back(nullptr);
    else
      out.push_back(v[i]);
  }
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

RowSense sense_from_string(const std::string& s, const std::string& path) {
  if (s == "<=") return RowSense::LessEqual;
  if (s == "=") return RowSense::Equal;
  if (s == ">=") return RowSense::GreaterEqual;
  fail(path, "sense must be one of \"<=\", \"=\", \">=\"");
}

std::string sense_to_string(RowSense s) {
  switch (s) {
    case RowSense::LessEqual: return "<=";
    case RowSense::Equal: return "=";
    case RowSense::GreaterEqual: return ">=";
  }
  return "?";
}

StageTemplate template_from_json(const json& j, const std::string& path) {
  StageTemplate t;
  if (const json* name = member_opt(j, "name")) t.name = as_string(*name, path + ".name");
  MilpProblem& p = t.base;
  p.num_vars = as_int(member(j, "num_vars", path), path + ".num_vars");
  p.objective = as_vector(member(j, "objective", path), path + ".objective");
  p.lower = as_bounds(member(j, "lower", path), -kInf, path + ".lower");
  p.upper = as_bounds(member(j, "upper", path), kInf, path + ".upper");
  const json& integ = member(j, "integrality", path);
  if (!integ.is_array()) fail(path + ".integrality", "expected an array");
  for (size_t i = 0; i < integ.size(); ++i)
    p.integrality.push_back(
        as_bool(integ[i], path + ".integrality[" + std::to_string(i) + "]"));
  const json& rows = member(j, "rows", path);
  if (!rows.is_array()) fail(path + ".rows", "expected an array");
  p.row_coeffs = Eigen::MatrixXd::Zero(rows.size(), p.num_vars);
  p.rhs.resize(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const std::string rp = path + ".rows[" + std::to_string(i) + "]";
    const Eigen::VectorXd coeffs = as_vector(member(rows[i], "coeffs", rp), rp + ".coeffs");
    if (coeffs.size() != p.num_vars) fail(rp + ".coeffs", "length != num_vars");
    p.row_coeffs.row(i) = coeffs.transpose();
    p.row_sense.push_back(
        sense_from_string(as_string(member(rows[i], "sense", rp), rp + ".sense"), rp + ".sense"));
    p.rhs[i] = as_number(member(rows[i], "rhs", rp), rp + ".rhs");
  }
  const json& sv = member(j, "state_vars", path);
  for (size_t i = 0; i < sv.size(); ++i)
    t.state_vars.push_back(as_int(sv[i], path + ".state_vars[" + std::to_string(i) + "]"));
  const json& cv = member(j, "copy_vars", path);
  for (size_t i = 0; i < cv.size(); ++i)
    t.copy_vars.push_back(as_int(cv[i], path + ".copy_vars[" + std::to_string(i) + "]"));
  const json& box = member(j, "state_box", path);
  if (!box.is_array() || box.size() != t.state_vars.size())
    fail(path + ".state_box", "expected one [lo, hi] pair per state variable");
  t.state_lo.resize(box.size());
  t.state_hi.resize(box.size());
  for (size_t i = 0; i < box.size(); ++i) {
    const std::string bp = path + ".state_box[" + std::to_string(i) + "]";
    if (!box[i].is_array() || box[i].size() != 2) fail(bp, "expected [lo, hi]");
    t.state_lo[i] = as_number(box[i][0], bp + "[0]");
    t.state_hi[i] = as_number(box[i][1], bp + "[1]");
  }
  if (const json* lip = member_opt(j, "lipschitz"))
    t.lipschitz = as_number(*lip, path + ".lipschitz");
  return t;
}

json template_to_json(const StageTemplate& t) {
  json j;
  j["name"] = t.name;
  j["num_vars"] = t.base.num_vars;
  j["objective"] = vector_to_json(t.base.objective);
  j["lower"] = bounds_to_json(t.base.lower);
  j["upper"] = bounds_to_json(t.base.upper);
  j["integrality"] = json::array();
  for (bool b : t.base.integrality) j["integrality"].push_back(b);
  j["rows"] = json::array();
  for (int i = 0; i < t.base.num_rows(); ++i) {
    json row;
    row["coeffs"] = vector_to_json(t.base.row_coeffs.row(i).transpose());
    row["sense"] = sense_to_string(t.base.row_sense[i]);
    row["rhs"] = t.base.rhs[i];
    j["rows"].push_back(std::move(row));
  }
  j["state_vars"] = t.state_vars;
  j["copy_vars"] = t.copy_vars;
  j["state_box"] = json::array();
  for (Eigen::Index i = 0; i < t.state_lo.size(); ++i)
    j["state_box"].push_back(json::array({t.state_lo[i], t.state_hi[i]}));
  j["lipschitz"] = t.lipschitz;
  return j;
}

Scenario scenario_from_json(const json& j, const std::string& path) {
  Scenario s;
  s.prob = as_number(member(j, "prob", path), path + ".prob");
  const auto deltas = [&](const char* key, std::vector<std::pair<int, double>>& out) {
    const json* arr = member_opt(j, key);
    if (arr == nullptr) return;
    if (!arr->is_array()) fail(path + "." + key, "expected an array of [index, delta]");
    for (size_t i = 0; i < arr->size(); ++i) {
      const std::string dp = path + "." + key + "[" + std::to_string(i) + "]";
      const json& pair = (*arr)[i];
      if (!pair.is_array() || pair.size() != 2) fail(dp, "expected [index, delta]");
      out.emplace_back(as_int(pair[0], dp + "[0]"), as_number(pair[1], dp + "[1]"));
    }
  };
  deltas("rhs_delta", s.rhs_delta);
  deltas("obj_delta", s.obj_delta);
  return s;
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["prob"] = s.prob;
  j["rhs_delta"] = json::array();
  for (const auto& [row, d] : s.rhs_delta) j["rhs_delta"].push_back(json::array({row, d}));
  j["obj_delta"] = json::array();
  for (const auto& [var, d] : s.obj_delta) j["obj_delta"].push_back(json::array({var, d}));
  return j;
}

Mode mode_from_string(const std::string& s, const std::string& path) {
  if (s == "full") return Mode::FullTree;
  if (s == "sampled") return Mode::Sampled;
  fail(path, "mode must be \"full\" or \"sampled\"");
}

CutFamily family_from_string(const std::string& s, const std::string& path) {
  if (s == "rn") return CutFamily::ReverseNorm;
  if (s == "sb") return CutFamily::StrengthenedBenders;
  if (s == "sab") return CutFamily::StrengthenedAugBenders;
  fail(path, "cuts must be one of \"rn\", \"sb\", \"sab\"");
}

PoolScope scope_from_string(const std::string& s, const std::string& path) {
  if (s == "auto") return PoolScope::Auto;
  if (s == "node") return PoolScope::PerNode;
  if (s == "stage") return PoolScope::PerStage;
  fail(path, "pool_scope must be one of \"auto\", \"node\", \"stage\"");
}

std::vector<double> as_broadcast(const json& j, const std::string& path) {
  std::vector<double> out;
  if (j.is_number()) {
    out.push_back(j.get<double>());
  } else if (j.is_array()) {
    for (size_t i = 0; i < j.size(); ++i)
      out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  } else {
    fail(path, "expected a number or an array of numbers");
  }
  return out;
}

SldpConfig config_from_json(const json& j, const std::string& path) {
  SldpConfig c;
  if (const json* v = member_opt(j, "mode")) c.mode = mode_from_string(as_string(*v, path + ".mode"), path + ".mode");
  if (const json* v = member_opt(j, "cuts"))
    c.family = family_from_string(as_string(*v, path + ".cuts"), path + ".cuts");
  if (const json* v = member_opt(j, "iters")) c.max_iterations = as_int(*v, path + ".iters");
  if (const json* v = member_opt(j, "rho")) c.rho = as_broadcast(*v, path + ".rho");
  if (const json* v = member_opt(j, "rho0")) c.schedule.rho0 = as_number(*v, path + ".rho0");
  if (const json* v = member_opt(j, "gamma")) c.schedule.gamma = as_number(*v, path + ".gamma");
  if (const json* v = member_opt(j, "rho_period"))
    c.schedule.period = as_int(*v, path + ".rho_period");
  if (const json* v = member_opt(j, "rho_max"))
    c.schedule.rho_max = v->is_null() ? kInf : as_number(*v, path + ".rho_max");
  if (const json* v = member_opt(j, "delta")) c.delta = as_number(*v, path + ".delta");
  if (const json* v = member_opt(j, "floor")) c.floor = as_broadcast(*v, path + ".floor");
  if (const json* v = member_opt(j, "seed"))
    c.seed = static_cast<std::uint64_t>(as_number(*v, path + ".seed"));
  if (const json* v = member_opt(j, "sim_samples"))
    c.sim_samples = as_int(*v, path + ".sim_samples");
  if (const json* v = member_opt(j, "stop_tol")) c.stop_tol = as_number(*v, path + ".stop_tol");
  if (const json* v = member_opt(j, "stop_window"))
    c.stop_window = as_int(*v, path + ".stop_window");
  if (const json* v = member_opt(j, "pool_scope"))
    c.pool_scope = scope_from_string(as_string(*v, path + ".pool_scope"), path + ".pool_scope");
  if (const json* v = member_opt(j, "node_cap"))
    c.solver.node_cap = static_cast<long>(as_number(*v, path + ".node_cap"));
  if (const json* v = member_opt(j, "tree_node_cap"))
    c.tree_node_cap = static_cast<long>(as_number(*v, path + ".tree_node_cap"));
  return c;
}

json config_to_json(const SldpConfig& c) {
  json j;
  j["mode"] = c.mode == Mode::FullTree ? "full" : "sampled";
  switch (c.family) {
    case CutFamily::ReverseNorm: j["cuts"] = "rn"; break;
    case CutFamily::StrengthenedBenders: j["cuts"] = "sb"; break;
    case CutFamily::StrengthenedAugBenders: j["cuts"] = "sab"; break;
  }
  j["iters"] = c.max_iterations;
  j["rho"] = c.rho;
  j["rho0"] = c.schedule.rho0;
  j["gamma"] = c.schedule.gamma;
  j["rho_period"] = c.schedule.period;
  j["rho_max"] = std::isinf(c.schedule.rho_max) ? json(nullptr) : json(c.schedule.rho_max);
  j["delta"] = c.delta;
  j["floor"] = c.floor;
  j["seed"] = c.seed;
  j["sim_samples"] = c.sim_samples;
  j["stop_tol"] = c.stop_tol;
  j["stop_window"] = c.stop_window;
  switch (c.pool_scope) {
    case PoolScope::Auto: j["pool_scope"] = "auto"; break;
    case PoolScope::PerNode: j["pool_scope"] = "node"; break;
    case PoolScope::PerStage: j["pool_scope"] = "stage"; break;
  }
  j["node_cap"] = c.solver.node_cap;
  j["tree_node_cap"] = c.tree_node_cap;
  return j;
}

}  // namespace

ProblemFile parse_problem_file(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw MalformedProblemFile("$: not valid JSON");
  ProblemFile pf;
  pf.version = as_int(member(j, "version", "$"), "$.version");
  if (pf.version != 1) fail("$.version", "unsupported schema version");
  if (const json* name = member_opt(j, "name"))
    pf.data.name = as_string(*name, "$.name");
  pf.data.initial_state =
      as_vector(member(j, "initial_state", "$"), "$.initial_state");
  const json& templates = member(j, "templates", "$");
  if (!templates.is_array() || templates.empty())
    fail("$.templates", "expected a nonempty array");
  for (size_t i = 0; i < templates.size(); ++i)
    pf.data.templates.push_back(
        template_from_json(templates[i], "$.templates[" + std::to_string(i) + "]"));
  const json& scens = member(j, "scenarios", "$");
  if (!scens.is_array() || scens.size() != templates.size())
    fail("$.scenarios", "expected one scenario list per stage");
  for (size_t t = 0; t < scens.size(); ++t) {
    const std::string sp = "$.scenarios[" + std::to_string(t) + "]";
    if (!scens[t].is_array() || scens[t].empty()) fail(sp, "expected a nonempty array");
    std::vector<Scenario> list;
    for (size_t i = 0; i < scens[t].size(); ++i)
      list.push_back(scenario_from_json(scens[t][i], sp + "[" + std::to_string(i) + "]"));
    pf.data.scenarios.push_back(std::move(list));
  }
  pf.config = config_from_json(member(j, "config", "$"), "$.config");
  return pf;
}

std::string serialize_problem_file(const ProblemFile& pf) {
  json j;
  j["version"] = pf.version;
  j["name"] = pf.data.name;
  j["initial_state"] = vector_to_json(pf.data.initial_state);
  j["templates"] = json::array();
  for (const StageTemplate& t : pf.data.templates)
    j["templates"].push_back(template_to_json(t));
  j["scenarios"] = json::array();
  for (const auto& stage : pf.data.scenarios) {
    json list = json::array();
    for (const Scenario& s : stage) list.push_back(scenario_to_json(s));
    j["scenarios"].push_back(std::move(list));
  }
  j["config"] = config_to_json(pf.config);
  return j.dump(2) + "\n";
}

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedProblemFile("$: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problem_file(buf.str());
}

void save_problem_file(const ProblemFile& pf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << serialize_problem_file(pf);
}

}  // namespace sldp
