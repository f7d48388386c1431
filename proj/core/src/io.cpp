#include "gencont/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gencont {

namespace {

const std::vector<std::string>& param_keys() {
  static const std::vector<std::string> keys = {
      "mu_e", "lambda_e", "mu_micro", "lambda_micro", "mu_c", "mu", "L_c",
      "a1",   "a2",       "a3",       "alpha1",       "alpha2", "alpha3"};
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void assign(IsotropicModuli& p, const std::string& key, double v) {
  if (key == "mu_e") p.mu_e = v;
  else if (key == "lambda_e") p.lambda_e = v;
  else if (key == "mu_micro") p.mu_micro = v;
  else if (key == "lambda_micro") p.lambda_micro = v;
  else if (key == "mu_c") p.mu_c = v;
  else if (key == "mu") p.mu = v;
  else if (key == "L_c") p.L_c = v;
  else if (key == "a1") p.a1 = v;
  else if (key == "a2") p.a2 = v;
  else if (key == "a3") p.a3 = v;
  else if (key == "alpha1") p.alpha1 = v;
  else if (key == "alpha2") p.alpha2 = v;
  else if (key == "alpha3") p.alpha3 = v;
}

double fetch(const IsotropicModuli& p, const std::string& key) {
  if (key == "mu_e") return p.mu_e;
  if (key == "lambda_e") return p.lambda_e;
  if (key == "mu_micro") return p.mu_micro;
  if (key == "lambda_micro") return p.lambda_micro;
  if (key == "mu_c") return p.mu_c;
  if (key == "mu") return p.mu;
  if (key == "L_c") return p.L_c;
  if (key == "a1") return p.a1;
  if (key == "a2") return p.a2;
  if (key == "a3") return p.a3;
  if (key == "alpha1") return p.alpha1;
  if (key == "alpha2") return p.alpha2;
  return p.alpha3;
}

nlohmann::ordered_json mode_vector_json(const ModeVector& m) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  const auto v = m.flatten();
  for (int i = 0; i < 21; ++i) j.push_back(v(i));
  return j;
}

}  // namespace

IsotropicModuli parse_params(std::istream& in, const std::string& origin) {
  IsotropicModuli p;
  std::set<std::string> seen;
  const std::set<std::string> known(param_keys().begin(), param_keys().end());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError(origin + ":" + std::to_string(lineno) + ": expected 'name = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!known.count(key)) {
      throw IoError(origin + ":" + std::to_string(lineno) + ": unknown parameter '" + key + "'");
    }
    if (seen.count(key)) {
      throw IoError(origin + ":" + std::to_string(lineno) + ": duplicate parameter '" + key + "'");
    }
    seen.insert(key);
    try {
      size_t used = 0;
      const double v = std::stod(val, &used);
      if (trim(val.substr(used)).size() > 0) throw std::invalid_argument("trailing");
      assign(p, key, v);
    } catch (const std::exception&) {
      throw IoError(origin + ":" + std::to_string(lineno) + ": cannot parse value '" + val +
                    "' for '" + key + "'");
    }
  }
  std::string missing;
  for (const auto& k : param_keys()) {
    if (!seen.count(k)) missing += missing.empty() ? k : ", " + k;
  }
  if (!missing.empty()) {
    throw IoError(origin + ": missing parameter(s): " + missing);
  }
  return p;
}

IsotropicModuli read_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open parameter file '" + path + "'");
  return parse_params(in, path);
}

void write_params(std::ostream& os, const IsotropicModuli& p) {
  for (const auto& k : param_keys()) {
    os << k << " = " << format_full(fetch(p, k)) << "\n";
  }
}

std::string resolve_params_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) return path;
  if (const char* dir = std::getenv("GENCONT_PARAMS_DIR")) {
    const fs::path candidate = fs::path(dir) / path;
    if (fs::exists(candidate)) return candidate.string();
  }
  return path;
}

std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_curve_csv(std::ostream& os, const StiffnessCurve& curve) {
  os << "model,test,bc,L_c,stiffness\n";
  for (size_t i = 0; i < curve.lc.size(); ++i) {
    os << to_string(curve.model) << ',' << to_string(curve.test) << ',' << to_string(curve.bc)
       << ',' << format_full(curve.lc[i]) << ',' << format_full(curve.stiffness[i]) << '\n';
  }
}

void write_profiles_csv(std::ostream& os, const Solution1D& sol) {
  os << "x2";
  for (const auto& n : sol.names) os << ',' << n;
  os << '\n';
  for (size_t i = 0; i < sol.x.size(); ++i) {
    os << format_full(sol.x[i]);
    for (const auto& prof : sol.profiles) os << ',' << format_full(prof[i]);
    os << '\n';
  }
}

std::string mode_report_json(const ModeReport& rep) {
  nlohmann::ordered_json j;
  j["model"] = to_string(rep.model);
  j["mu_c"] = rep.mu_c;
  j["bc"] = to_string(rep.bc);
  j["dim_before"] = rep.dim_before;
  j["dim"] = rep.dim_after;
  j["expected"] = rep.expected;
  j["match"] = rep.match;
  nlohmann::ordered_json basis = nlohmann::ordered_json::array();
  for (const auto& m : rep.basis) basis.push_back(mode_vector_json(m));
  j["basis"] = basis;
  return j.dump(2);
}

std::string redundancy_json(const RedundancyReport& rep) {
  nlohmann::ordered_json j;
  j["model"] = to_string(rep.model);
  j["redundant"] = rep.redundant;
  j["lower_forces_all"] = rep.lower_forces_all;
  j["curvature_forces_all"] = rep.curvature_forces_all;
  if (!rep.redundant) {
    j["witness"] = mode_vector_json(rep.witness);
    j["witness_curvature"] = rep.witness_curvature;
  }
  return j.dump(2);
}

}  // namespace gencont
