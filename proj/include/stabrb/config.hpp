#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stabrb/hifi.hpp"
#include "stabrb/rb.hpp"

namespace stabrb {

/// Parsed run configuration. Text format: one `key = value` per line,
/// `#` starts a comment, keys may carry one `section.` prefix. Unknown keys,
/// duplicates and malformed values are rejected; `seed` is mandatory.
///
///   problem = stokes | navier-stokes
///   fe_pair = P1P1 | P2P2 | P1P0 | P2P1
///   stabilization.method = none | brezzi-pitkaranta | residual | supg | edge-jump
///   stabilization.rho, stabilization.delta, stabilization.apply_online
///   option = i | ii | iii | iv
///   parameters.mu1_min, parameters.mu1_max, parameters.mu2_min, parameters.mu2_max
///   online.mu1, online.mu2
///   mesh.nx, mesh.ny
///   geometry.mu_bar2, lid_speed
///   rb.n_max, rb.train_size
///   sweep.test_size, sweep.n_values (comma list; default 1..n_max)
///   infsup.grid (e.g. 5x5)
///   seed, output, threads
///
/// Problem-dependent defaults: Stokes box [0.25, 0.75] x [1, 3], online
/// (0.6, 2), N_max 20, 100 training points; Navier-Stokes box
/// [100, 200] x [1.5, 3], online (120, 2), N_max 16, 64 training points.
struct RunConfig {
  ProblemConfig problem;
  Option option = Option::I;
  Parameter online;
  int n_max = 20;
  int train_size = 100;
  int test_size = 50;
  std::vector<int> n_values;
  std::array<int, 2> infsup_grid{5, 5};
  std::uint64_t seed = 0;
  std::string output = "out";
  int threads = 1;  // parse_config defaults to the machine parallelism

  /// Every resolved setting except `threads` and `output`, which do not
  /// affect results.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

RunConfig parse_config(std::istream& in, const std::string& source = "config");
RunConfig load_config(const std::string& path);

}  // namespace stabrb
