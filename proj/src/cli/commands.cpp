#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fso/cli.hpp"
#include "fso/errors.hpp"

namespace fso::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr double kReferenceAsymptoticBer = 1e-9;
constexpr double kReferenceExactBer = 1e-13;

// --- report emission ---------------------------------------------------------

std::string scalar_text(const json& v) {
  if (v.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_null()) return "nan";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void print_text(const json& obj, std::ostream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  for (const auto& [key, value] : obj.items()) {
    if (value.is_object()) {
      out << pad << key << ":\n";
      print_text(value, out, indent + 2);
    } else if (value.is_array()) {
      out << pad << key << ":" << (value.empty() ? " (none)" : "") << "\n";
      for (const json& elem : value) {
        out << pad << "  -";
        if (elem.is_object()) {
          for (const auto& [k, v] : elem.items()) out << " " << k << "=" << scalar_text(v);
        } else {
          out << " " << scalar_text(elem);
        }
        out << "\n";
      }
    } else {
      out << pad << key << ": " << scalar_text(value) << "\n";
    }
  }
}

void emit(const json& report, bool as_json, std::ostream& out) {
  if (as_json) {
    out << report.dump(2) << "\n";
  } else {
    print_text(report, out, 0);
  }
}

json ber_json(const ber::BerResult& r, std::string_view form) {
  json j;
  j["method"] = std::string(ber::to_string(r.method));
  if (!form.empty()) j["form"] = std::string(form);
  j["value"] = r.value;
  j["log10_value"] = r.log10_value;
  j["error_estimate"] = r.error_estimate;
  j["underflow"] = r.diagnostics.underflow;
  return j;
}

json bracket_json(const opt::Bracket& b) { return json::array({b.lo, b.hi}); }

// --- option structs ----------------------------------------------------------

struct Globals {
  bool json = false;
  bool upper_form = false;
};

struct EvalArgs {
  double v = 0.0;
  double z = 0.0;
  std::string method = "exact";
  std::string form = "finite";
  std::optional<double> x_max;
  std::optional<std::size_t> fixed_n;
};

struct ModelArgs {
  std::optional<double> target_ber;
  std::optional<double> v;
  std::optional<std::string> config;
  std::string method = "closed";
  std::optional<double> tol;
  std::optional<double> z_lo;
  std::optional<double> z_hi;
  std::optional<std::size_t> scan_points;
};

struct SweepArgs {
  double v_min = 0.0;
  double v_max = 0.0;
  std::size_t points = 0;
  std::vector<std::string> modes{"exact", "asymptotic"};
  std::string out;
  std::size_t fixed_n = 200;
};

struct ReportArgs {
  double v = 32.5;
  std::vector<std::size_t> fixed_n{50, 200, 1000, 5000};
};

opt::Method parse_method(const std::string& m) {
  return m == "quadrature" ? opt::Method::quadrature : opt::Method::closed;
}

void reject_upper_form(const Globals& g, const char* command) {
  if (g.upper_form) {
    throw DomainError(std::string(command) +
                      ": --upper-gamma-form applies to eval and report only");
  }
}

// --- commands ----------------------------------------------------------------

json cmd_eval(const EvalArgs& a, const Globals& g) {
  const link::NormalizedPoint p{a.v, a.z};
  p.validate();
  ber::QuadratureSpec q;
  if (a.fixed_n) {
    q.mode = ber::QuadratureMode::fixed_grid;
    q.fixed_n = *a.fixed_n;
  }
  if (a.x_max) q.x_max = *a.x_max;
  q.validate();

  json report;
  report["v"] = a.v;
  report["z"] = a.z;
  json results = json::array();

  std::optional<ber::BerResult> closed;
  std::optional<ber::BerResult> quad;
  const ber::ClosedForm form =
      g.upper_form ? ber::ClosedForm::upper_incomplete : ber::ClosedForm::lower_incomplete;
  const char* form_name = g.upper_form ? "upper_incomplete" : "lower_incomplete";

  if (a.method == "exact" || a.method == "both") {
    if (a.v == 0.0) {
      closed = ber::BerResult{};
      closed->value = 0.5;
      closed->log10_value = std::log10(0.5);
      results.push_back(ber_json(*closed, "analytic_limit"));
    } else {
      closed = ber::ber_closed(p, form);
      results.push_back(ber_json(*closed, form_name));
    }
  }
  if (a.method == "quad" || a.method == "both") {
    if (a.form == "semi-infinite") {
      quad = ber::ber_quadrature_semiinfinite(p, q);
      json j = ber_json(*quad, "");
      j["x_max"] = q.x_max;
      j["truncated"] = quad->diagnostics.truncated;
      results.push_back(j);
    } else {
      quad = ber::ber_quadrature(p, q);
      results.push_back(ber_json(*quad, ""));
    }
  }
  report["results"] = results;
  if (closed && quad) {
    const double denom = std::abs(quad->value);
    report["relative_discrepancy"] =
        denom > 0.0 ? std::abs(closed->value - quad->value) / denom
                    : std::abs(closed->value - quad->value);
  }
  return report;
}

json cmd_model1(const ModelArgs& a, const Globals& g) {
  reject_upper_form(g, "model1");
  opt::Model1Options o;
  std::optional<ConfigRecord> cfg;
  if (a.config) {
    cfg = load_config(*a.config);
    cfg->apply(o);
  }
  o.method = parse_method(a.method);
  if (a.tol) o.tol = *a.tol;
  if (a.z_lo) o.z_bracket.lo = *a.z_lo;
  if (a.z_hi) o.z_bracket.hi = *a.z_hi;
  if (a.scan_points) o.scan_points = *a.scan_points;

  const opt::Model1Solution s =
      opt::solve_model1(*a.target_ber, o, cfg ? std::optional(cfg->budget) : std::nullopt);

  json report;
  report["target_ber"] = s.target_ber;
  report["method"] = std::string(opt::to_string(o.method));
  report["v_star"] = s.v_star;
  report["z_star"] = s.z_star;
  report["constraint_residual"] = s.constraint_residual;
  report["derivative_residual"] = s.derivative_residual;
  report["derivative_scale"] = s.derivative_scale;
  if (s.lambda_opt) report["lambda_opt"] = *s.lambda_opt;
  if (s.pt_min) report["pt_min"] = *s.pt_min;
  report["warnings"] = s.warnings;
  return report;
}

json cmd_model2(const ModelArgs& a, const Globals& g) {
  reject_upper_form(g, "model2");
  if (!a.v && !a.config) throw DomainError("model2: give --v, --config, or both");
  opt::Model2Options o;
  std::optional<ConfigRecord> cfg;
  if (a.config) {
    cfg = load_config(*a.config);
    cfg->apply(o);
  }
  o.method = parse_method(a.method);
  if (a.tol) o.tol = *a.tol;
  if (a.z_lo) o.z_bracket.lo = *a.z_lo;
  if (a.z_hi) o.z_bracket.hi = *a.z_hi;
  if (a.scan_points) o.scan_points = *a.scan_points;

  const double v = a.v ? *a.v : link::normalize(cfg->budget).v;
  const opt::Model2Solution s = opt::solve_model2(v, o);

  json report;
  report["v"] = s.v;
  report["method"] = std::string(opt::to_string(s.method_tag));
  report["z_star"] = s.z_star;
  report["ber_min"] = s.ber_min;
  report["log10_ber_min"] = s.log10_ber_min;
  report["derivative_residual"] = s.derivative_residual;
  report["derivative_scale"] = s.derivative_scale;
  report["bracket"] = bracket_json(s.bracket);
  json others = json::array();
  for (const opt::StationaryPoint& p : s.others) {
    others.push_back({{"z", p.z}, {"log10_ber", p.log10_ber}, {"minimum", p.minimum}});
  }
  report["other_stationary_points"] = others;
  if (cfg) {
    const double lambda = link::lambda_opt(s.z_star, cfg->budget.d_t, cfg->budget.sigma);
    report["lambda_opt"] = lambda;
    report["pt_required"] = link::pt_min(v, cfg->budget, lambda);
  }
  return report;
}

void write_atomically(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp.string() + "' for writing");
    f << content;
    f.flush();
    if (!f) {
      f.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("error writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename output to '" + path + "'");
  }
}

json cmd_sweep(const SweepArgs& a, const Globals& g) {
  reject_upper_form(g, "sweep");
  if (!(a.v_min > 0.0)) throw DomainError("sweep: --v-min must be > 0");
  if (a.points == 0) throw DomainError("sweep: --points must be >= 1");
  if (a.points == 1 ? a.v_max != a.v_min : !(a.v_max > a.v_min)) {
    throw DomainError("sweep: need --v-max > --v-min (or equal with --points 1)");
  }
  if (a.out.empty()) throw DomainError("sweep: --out must name a file");
  const std::filesystem::path parent = std::filesystem::absolute(a.out).parent_path();
  if (!std::filesystem::is_directory(parent)) {
    throw IoError("sweep: output directory '" + parent.string() + "' does not exist");
  }

  std::vector<opt::SweepMode> modes;
  for (const std::string& m : a.modes) {
    const opt::SweepMode mode = m == "exact" ? opt::SweepMode::exact : opt::SweepMode::asymptotic;
    if (std::find(modes.begin(), modes.end(), mode) == modes.end()) modes.push_back(mode);
  }
  ber::QuadratureSpec q = ber::QuadratureSpec::asymptotic_default();
  q.fixed_n = a.fixed_n;
  q.validate();

  const std::vector<double> vs = opt::log_space(a.v_min, a.v_max, a.points);
  const opt::SweepTable table = opt::sweep(vs, modes, q);
  write_atomically(a.out, table.to_csv());

  json report;
  report["out"] = a.out;
  report["rows"] = table.rows.size();
  report["fixed_n"] = a.fixed_n;
  json failed = json::array();
  for (const opt::SweepRow& r : table.rows) {
    if (!r.error.empty()) {
      failed.push_back({{"v", r.v}, {"mode", std::string(opt::to_string(r.mode))}, {"error", r.error}});
    }
  }
  report["failed_rows"] = failed;
  return report;
}

json cmd_report(const ReportArgs& a, const Globals& g) {
  if (!(a.v > 0.0) || !std::isfinite(a.v)) throw DomainError("report: --v must be finite and > 0");
  if (a.fixed_n.empty()) throw DomainError("report: --fixed-n needs at least one value");
  for (std::size_t n : a.fixed_n) {
    if (n < 2) throw DomainError("report: every --fixed-n must be >= 2");
  }

  const opt::ResolutionStudy study = opt::resolution_study(a.v, a.fixed_n);

  json report;
  report["v"] = study.v;
  json exact;
  exact["z_star"] = study.exact.z_star;
  exact["form"] = g.upper_form ? "upper_incomplete" : "lower_incomplete";
  exact["ber"] = g.upper_form ? study.upper_form_value : study.exact.ber_min;
  exact["log10_ber"] = g.upper_form ? study.upper_form_log10_ber : study.exact.log10_ber_min;
  exact["derivative_residual"] = study.exact.derivative_residual;
  report["exact"] = exact;

  json upper;
  upper["value"] = study.upper_form_value;
  upper["log10_abs_value"] = std::log10(std::abs(study.upper_form_value));
  report["upper_incomplete_at_exact_z"] = upper;

  json rows = json::array();
  for (const opt::ResolutionRow& r : study.rows) {
    rows.push_back(
        {{"fixed_n", r.fixed_n}, {"z_star", r.z_star}, {"log10_ber", r.log10_ber}, {"gap", r.gap}});
  }
  report["asymptotic"] = rows;
  report["gap_shrinks_monotonically"] = study.gap_shrinks_monotonically;

  json ref;
  ref["asymptotic_ber"] = kReferenceAsymptoticBer;
  ref["exact_ber"] = kReferenceExactBer;
  report["reported_reference"] = ref;

  char note[768];
  std::snprintf(note, sizeof note,
                "The reported exact value (1e-13) is not reproduced: the lower-incomplete closed "
                "form agrees with direct quadrature and gives log10 BER %.3f at z* = %.6f. "
                "Replacing +gamma(a, c^2) by -Gamma(a, c^2) gives %.3g there, whose magnitude "
                "matches the reported order. The fixed-grid optimum lies below the exact one "
                "by a gap that shrinks as the panel count grows (last gap %.3f decades).",
                study.exact.log10_ber_min, study.exact.z_star, study.upper_form_value,
                study.rows.empty() ? 0.0 : study.rows.back().gap);
  report["note"] = note;
  return report;
}

json cmd_selftest(int& status) {
  const std::vector<SelftestCheck> checks = run_selftest();
  json report;
  json list = json::array();
  json failed = json::array();
  for (const SelftestCheck& c : checks) {
    list.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    if (!c.passed) failed.push_back(c.name);
  }
  report["checks"] = list;
  report["passed"] = failed.empty();
  report["failed"] = failed;
  status = failed.empty() ? kOk : kSelftestFailed;
  return report;
}

void report_error(std::ostream& err, bool as_json, const char* kind, const std::string& what) {
  if (as_json) {
    json j;
    j["error"] = {{"kind", kind}, {"message", what}};
    err << j.dump() << "\n";
  } else {
    err << "fsoopt: " << kind << " error: " << what << "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"BER optimization for free-space optical links under pointing error", "fsoopt"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_flag("--json", g.json, "Print a JSON mirror of the report");
  app.add_flag("--upper-gamma-form", g.upper_form,
               "Use the -Gamma(a, c^2) closed form in eval and report");

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate the BER at one (v, z) point");
  eval->add_option("--v", ea.v, "Normalized transmitter power (>= 0)")->required();
  eval->add_option("--z", ea.z, "Normalized wavelength")->required();
  eval->add_option("--method", ea.method, "exact | quad | both")
      ->check(CLI::IsMember({"exact", "quad", "both"}));
  eval->add_option("--form", ea.form, "Quadrature integral: finite | semi-infinite")
      ->check(CLI::IsMember({"finite", "semi-infinite"}));
  eval->add_option("--x-max", ea.x_max, "Truncation point of the semi-infinite integral");
  eval->add_option("--fixed-n", ea.fixed_n, "Use fixed-grid midpoint quadrature with n panels");

  ModelArgs m1;
  CLI::App* model1 = app.add_subcommand("model1", "Minimum power at a target BER");
  model1->add_option("--ber", m1.target_ber, "Target BER in (0, 0.5)")->required();
  ModelArgs m2;
  CLI::App* model2 = app.add_subcommand("model2", "Minimum BER at a fixed power");
  model2->add_option("--v", m2.v, "Normalized transmitter power");
  for (auto [cmd, ma] : {std::pair{model1, &m1}, std::pair{model2, &m2}}) {
    cmd->add_option("--config", ma->config, "Link budget configuration file");
    cmd->add_option("--method", ma->method, "closed | quadrature")
        ->check(CLI::IsMember({"closed", "quadrature"}));
    cmd->add_option("--tol", ma->tol, "Stationarity tolerance relative to the bracket scale");
    cmd->add_option("--z-lo", ma->z_lo, "Lower end of the z bracket");
    cmd->add_option("--z-hi", ma->z_hi, "Upper end of the z bracket");
    cmd->add_option("--scan-points", ma->scan_points, "Points in the bracket scan");
  }

  SweepArgs sa;
  CLI::App* sweep = app.add_subcommand("sweep", "Optimum BER over a log-spaced range of v, as CSV");
  sweep->add_option("--v-min", sa.v_min, "Smallest v")->required();
  sweep->add_option("--v-max", sa.v_max, "Largest v")->required();
  sweep->add_option("--points", sa.points, "Number of v values")->required();
  sweep->add_option("--modes", sa.modes, "Comma list of exact, asymptotic")
      ->delimiter(',')
      ->check(CLI::IsMember({"exact", "asymptotic"}));
  sweep->add_option("--out", sa.out, "Output CSV path")->required();
  sweep->add_option("--fixed-n", sa.fixed_n, "Midpoint panels of the asymptotic mode");

  ReportArgs ra;
  CLI::App* report = app.add_subcommand(
      "report", "Compare the exact optimum with fixed-grid optima of growing resolution");
  report->add_option("--v", ra.v, "Normalized transmitter power");
  report->add_option("--fixed-n", ra.fixed_n, "Comma list of panel counts")->delimiter(',');

  CLI::App* selftest = app.add_subcommand("selftest", "Run the built-in invariant suite");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, g.json, "usage", e.what());
    return kUsage;
  }

  try {
    int status = kOk;
    json result;
    if (eval->parsed()) {
      result = cmd_eval(ea, g);
    } else if (model1->parsed()) {
      result = cmd_model1(m1, g);
    } else if (model2->parsed()) {
      result = cmd_model2(m2, g);
    } else if (sweep->parsed()) {
      result = cmd_sweep(sa, g);
    } else if (report->parsed()) {
      result = cmd_report(ra, g);
    } else if (selftest->parsed()) {
      result = cmd_selftest(status);
    }
    emit(result, g.json, out);
    if (status == kSelftestFailed) {
      err << "fsoopt: selftest failed:";
      for (const auto& name : result["failed"]) err << " " << name.get<std::string>();
      err << "\n";
    }
    return status;
  } catch (const DomainError& e) {
    report_error(err, g.json, "domain", e.what());
    return kUsage;
  } catch (const IoError& e) {
    report_error(err, g.json, "io", e.what());
    return kIo;
  } catch (const Error& e) {
    report_error(err, g.json, "solver", e.what());
    return kSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(err, g.json, "io", e.what());
    return kIo;
  }
}

}  // namespace fso::cli
