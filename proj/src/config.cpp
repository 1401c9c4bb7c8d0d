#include "stabrb/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "stabrb/errors.hpp"
#include "stabrb/parallel.hpp"

namespace stabrb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw InvalidArgument("config: " + key + " expects a number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  long long x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw InvalidArgument("config: " + key + " expects an integer, got '" + v + "'");
  return x;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw InvalidArgument("config: " + key + " expects a non-negative integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("config: " + key + " expects true or false, got '" + v + "'");
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw InvalidArgument("config: " + where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw InvalidArgument("config: " + where + ": empty key or value");
    if (std::count(key.begin(), key.end(), '.') > 1) throw InvalidArgument("config: " + where + ": only one section level allowed in '" + key + "'");
    if (!kv.emplace(key, value).second) throw InvalidArgument("config: " + where + ": duplicate key '" + key + "'");
  }

  RunConfig c;
  c.threads = default_threads();
  const auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  std::set<std::string> used;
  const auto take = [&](const std::string& key, const std::function<void(const std::string&)>& apply) {
    used.insert(key);
    if (const auto* v = get(key)) apply(*v);
  };

  take("problem", [&](const std::string& v) { c.problem.problem = problem_from_string(v); });
  const bool ns = c.problem.problem == Problem::NavierStokes;
  if (ns) {
    c.problem.pair = FePair::P2P2;
    c.problem.stabilization = {Method::SupgFamily, 0, 1.0, true};
    c.problem.box = {100, 200, 1.5, 3};
    c.online = {120, 2};
    c.n_max = 16;
    c.train_size = 64;
  } else {
    c.problem.pair = FePair::P1P1;
    c.problem.stabilization = {Method::ResidualBased, 0, 0.05, true};
    c.problem.box = {0.25, 0.75, 1, 3};
    c.online = {0.6, 2};
  }
  take("fe_pair", [&](const std::string& v) {
    c.problem.pair = fe_pair_from_string(v);
    // Default method follows the pair; explicit stabilization.* keys override.
    if (c.problem.pair == FePair::P2P1) c.problem.stabilization = {Method::None, 0, 0.0, true};
    if (c.problem.pair == FePair::P1P0) c.problem.stabilization = {Method::EdgeJumpP1P0, 0, 0.1, true};
    if (c.problem.pair == FePair::P2P2 && !ns) c.problem.stabilization = {Method::ResidualBased, 0, 0.5, true};
  });
  take("stabilization.method", [&](const std::string& v) { c.problem.stabilization.method = method_from_string(v); });
  take("stabilization.rho", [&](const std::string& v) { c.problem.stabilization.rho = static_cast<int>(to_int("stabilization.rho", v)); });
  take("stabilization.delta", [&](const std::string& v) { c.problem.stabilization.delta = to_double("stabilization.delta", v); });
  take("stabilization.apply_online", [&](const std::string& v) { c.problem.stabilization.apply_online = to_bool("stabilization.apply_online", v); });
  take("option", [&](const std::string& v) { c.option = option_from_string(v); });
  take("parameters.mu1_min", [&](const std::string& v) { c.problem.box.mu1_min = to_double("parameters.mu1_min", v); });
  take("parameters.mu1_max", [&](const std::string& v) { c.problem.box.mu1_max = to_double("parameters.mu1_max", v); });
  take("parameters.mu2_min", [&](const std::string& v) { c.problem.box.mu2_min = to_double("parameters.mu2_min", v); });
  take("parameters.mu2_max", [&](const std::string& v) { c.problem.box.mu2_max = to_double("parameters.mu2_max", v); });
  take("online.mu1", [&](const std::string& v) { c.online.mu1 = to_double("online.mu1", v); });
  take("online.mu2", [&](const std::string& v) { c.online.mu2 = to_double("online.mu2", v); });
  take("mesh.nx", [&](const std::string& v) { c.problem.nx = static_cast<int>(to_int("mesh.nx", v)); });
  take("mesh.ny", [&](const std::string& v) { c.problem.ny = static_cast<int>(to_int("mesh.ny", v)); });
  take("geometry.mu_bar2", [&](const std::string& v) { c.problem.mu_bar2 = to_double("geometry.mu_bar2", v); });
  take("lid_speed", [&](const std::string& v) { c.problem.lid_speed = to_double("lid_speed", v); });
  take("rb.n_max", [&](const std::string& v) { c.n_max = static_cast<int>(to_int("rb.n_max", v)); });
  take("rb.train_size", [&](const std::string& v) { c.train_size = static_cast<int>(to_int("rb.train_size", v)); });
  take("sweep.test_size", [&](const std::string& v) { c.test_size = static_cast<int>(to_int("sweep.test_size", v)); });
  take("sweep.n_values", [&](const std::string& v) {
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) c.n_values.push_back(static_cast<int>(to_int("sweep.n_values", trim(item))));
  });
  take("infsup.grid", [&](const std::string& v) {
    const auto x = v.find('x');
    if (x == std::string::npos) throw InvalidArgument("config: infsup.grid expects N1xN2, got '" + v + "'");
    c.infsup_grid = {static_cast<int>(to_int("infsup.grid", trim(v.substr(0, x)))),
                     static_cast<int>(to_int("infsup.grid", trim(v.substr(x + 1))))};
  });
  bool has_seed = false;
  take("seed", [&](const std::string& v) {
    c.seed = to_seed("seed", v);
    has_seed = true;
  });
  take("output", [&](const std::string& v) { c.output = v; });
  take("threads", [&](const std::string& v) { c.threads = static_cast<int>(to_int("threads", v)); });

  for (const auto& [key, value] : kv) {
    if (!used.count(key)) throw InvalidArgument("config: unknown key '" + key + "'");
  }
  if (!has_seed) throw InvalidArgument("config: 'seed' is mandatory");

  c.problem.validate();
  if (c.n_max < 1) throw InvalidArgument("config: rb.n_max must be >= 1");
  if (c.train_size < 1) throw InvalidArgument("config: rb.train_size must be >= 1");
  if (c.test_size < 1) throw InvalidArgument("config: sweep.test_size must be >= 1");
  if (c.threads < 1) throw InvalidArgument("config: threads must be >= 1");
  if (c.infsup_grid[0] < 1 || c.infsup_grid[1] < 1) throw InvalidArgument("config: infsup.grid counts must be >= 1");
  if (c.n_values.empty()) {
    for (int n = 1; n <= c.n_max; ++n) c.n_values.push_back(n);
  }
  for (int n : c.n_values) {
    if (n < 1 || n > c.n_max) throw InvalidArgument("config: sweep.n_values entries must lie in [1, rb.n_max]");
  }
  if (!c.problem.box.contains(c.online)) throw InvalidArgument("config: the online parameter must lie in the parameter box");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
  return parse_config(in, path);
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  const auto& p = problem;
  std::string nv;
  for (std::size_t i = 0; i < n_values.size(); ++i) nv += (i ? "," : "") + std::to_string(n_values[i]);
  return {
      {"problem", std::string(to_string(p.problem))},
      {"fe_pair", std::string(to_string(p.pair))},
      {"stabilization.method", std::string(to_string(p.stabilization.method))},
      {"stabilization.rho", std::to_string(p.stabilization.rho)},
      {"stabilization.delta", num(p.stabilization.delta)},
      {"stabilization.apply_online", p.stabilization.apply_online ? "true" : "false"},
      {"option", std::string(to_string(option))},
      {"parameters.mu1_min", num(p.box.mu1_min)},
      {"parameters.mu1_max", num(p.box.mu1_max)},
      {"parameters.mu2_min", num(p.box.mu2_min)},
      {"parameters.mu2_max", num(p.box.mu2_max)},
      {"online.mu1", num(online.mu1)},
      {"online.mu2", num(online.mu2)},
      {"mesh.nx", std::to_string(p.nx)},
      {"mesh.ny", std::to_string(p.ny)},
      {"geometry.mu_bar2", num(p.mu_bar2)},
      {"lid_speed", num(p.lid_speed)},
      {"rb.n_max", std::to_string(n_max)},
      {"rb.train_size", std::to_string(train_size)},
      {"sweep.test_size", std::to_string(test_size)},
      {"sweep.n_values", nv},
      {"infsup.grid", std::to_string(infsup_grid[0]) + "x" + std::to_string(infsup_grid[1])},
      {"seed", std::to_string(seed)},
  };
}

}  // namespace stabrb
