#ifndef FSO_CLI_HPP
#define FSO_CLI_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fso/ber_core.hpp"
#include "fso/link_model.hpp"
#include "fso/optimizer.hpp"

namespace fso::cli {

enum ExitCode : int {
  kOk = 0,
  kSelftestFailed = 1,
  kUsage = 2,
  kSolver = 3,
  kIo = 4,
};

/// Contents of a configuration file.
///
/// The file is a list of `key = value` lines. `#` starts a comment, blank
/// lines are ignored, keys may appear once. All eleven link-budget keys are
/// required (SI units):
///
///   p_t [W]  eta_t  eta_r  lambda [m]  d [m]  d_t [m]  d_r [m]
///   l_a  rho [A/W]  sigma_n [A]  sigma [rad]
///
/// Optional solver overrides:
///
///   solver.tol  solver.constraint_tol  solver.scan_points
///   solver.z_lo  solver.z_hi  solver.v_lo  solver.v_hi
///   quad.abs_tol  quad.rel_tol  quad.max_subdivisions  quad.fixed_n  quad.x_max
struct ConfigRecord {
  link::LinkBudget budget{};
  std::optional<double> tol;
  std::optional<double> constraint_tol;
  std::optional<std::size_t> scan_points;
  std::optional<double> z_lo;
  std::optional<double> z_hi;
  std::optional<double> v_lo;
  std::optional<double> v_hi;
  ber::QuadratureSpec quad{};

  void apply(opt::Model1Options& o) const;
  void apply(opt::Model2Options& o) const;
};

/// Parses configuration text. `source` names the input in error messages.
/// Throws DomainError on syntax errors, unknown or duplicate keys, missing
/// link-budget keys, or values that fail validation.
ConfigRecord parse_config(const std::string& text, const std::string& source = "<config>");

/// Reads and parses a configuration file; IoError when it cannot be read.
ConfigRecord load_config(const std::string& path);

/// The text that `parse_config` accepts for LinkBudget::defaults().
std::string default_config_text();

struct SelftestCheck {
  std::string name;
  bool passed;
  std::string detail;
};

/// The invariant suite run by the `selftest` command.
std::vector<SelftestCheck> run_selftest();

/// Entry point of the `fsoopt` tool. `args` excludes the program name.
/// Reports go to `out`, diagnostics to `err`; the return value is an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fso::cli

#endif  // FSO_CLI_HPP
