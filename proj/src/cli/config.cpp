#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "fso/cli.hpp"
#include "fso/errors.hpp"

namespace fso::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& text, const std::string& where) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(x)) {
    throw DomainError(where + ": '" + text + "' is not a finite number");
  }
  return x;
}

std::size_t parse_count(const std::string& text, const std::string& where) {
  std::size_t n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DomainError(where + ": '" + text + "' is not a non-negative integer");
  }
  return n;
}

struct BudgetKey {
  const char* name;
  double link::LinkBudget::*field;
};

constexpr BudgetKey kBudgetKeys[] = {
    {"p_t", &link::LinkBudget::p_t},         {"eta_t", &link::LinkBudget::eta_t},
    {"eta_r", &link::LinkBudget::eta_r},     {"lambda", &link::LinkBudget::lambda},
    {"d", &link::LinkBudget::d},             {"d_t", &link::LinkBudget::d_t},
    {"d_r", &link::LinkBudget::d_r},         {"l_a", &link::LinkBudget::l_a},
    {"rho", &link::LinkBudget::rho},         {"sigma_n", &link::LinkBudget::sigma_n},
    {"sigma", &link::LinkBudget::sigma},
};

// Shortest text that parses back to the same double.
std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

void ConfigRecord::apply(opt::Model1Options& o) const {
  if (tol) o.tol = *tol;
  if (constraint_tol) o.constraint_tol = *constraint_tol;
  if (scan_points) o.scan_points = *scan_points;
  if (z_lo) o.z_bracket.lo = *z_lo;
  if (z_hi) o.z_bracket.hi = *z_hi;
  if (v_lo) o.v_bracket.lo = *v_lo;
  if (v_hi) o.v_bracket.hi = *v_hi;
  o.quad = quad;
}

void ConfigRecord::apply(opt::Model2Options& o) const {
  if (tol) o.tol = *tol;
  if (scan_points) o.scan_points = *scan_points;
  if (z_lo) o.z_bracket.lo = *z_lo;
  if (z_hi) o.z_bracket.hi = *z_hi;
  o.quad = quad;
}

ConfigRecord parse_config(const std::string& text, const std::string& source) {
  ConfigRecord rec;
  std::map<std::string, std::string> values;
  std::map<std::string, int> lines;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DomainError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw DomainError(where + ": expected 'key = value'");
    if (values.count(key)) {
      throw DomainError(where + ": duplicate key '" + key + "' (first set on line " +
                        std::to_string(lines[key]) + ")");
    }
    values[key] = value;
    lines[key] = lineno;
  }

  auto where = [&](const std::string& key) { return source + ":" + std::to_string(lines[key]); };
  std::set<std::string> used;

  for (const BudgetKey& k : kBudgetKeys) {
    const auto it = values.find(k.name);
    if (it == values.end()) throw DomainError(source + ": missing required key '" + k.name + "'");
    rec.budget.*k.field = parse_number(it->second, where(k.name));
    used.insert(k.name);
  }

  auto real = [&](const char* key, std::optional<double>& dst) {
    if (const auto it = values.find(key); it != values.end()) {
      dst = parse_number(it->second, where(key));
      used.insert(key);
    }
  };
  auto real_into = [&](const char* key, double& dst) {
    std::optional<double> tmp;
    real(key, tmp);
    if (tmp) dst = *tmp;
  };
  auto count_into = [&](const char* key, std::size_t& dst) {
    if (const auto it = values.find(key); it != values.end()) {
      dst = parse_count(it->second, where(key));
      used.insert(key);
    }
  };

  real("solver.tol", rec.tol);
  real("solver.constraint_tol", rec.constraint_tol);
  if (const auto it = values.find("solver.scan_points"); it != values.end()) {
    rec.scan_points = parse_count(it->second, where("solver.scan_points"));
    used.insert("solver.scan_points");
  }
  real("solver.z_lo", rec.z_lo);
  real("solver.z_hi", rec.z_hi);
  real("solver.v_lo", rec.v_lo);
  real("solver.v_hi", rec.v_hi);
  real_into("quad.abs_tol", rec.quad.abs_tol);
  real_into("quad.rel_tol", rec.quad.rel_tol);
  count_into("quad.max_subdivisions", rec.quad.max_subdivisions);
  count_into("quad.fixed_n", rec.quad.fixed_n);
  real_into("quad.x_max", rec.quad.x_max);

  for (const auto& [key, value] : values) {
    if (!used.count(key)) throw DomainError(where(key) + ": unknown key '" + key + "'");
  }

  try {
    rec.budget.validate();
    rec.quad.validate();
  } catch (const DomainError& e) {
    throw DomainError(source + ": " + e.what());
  }
  return rec;
}

ConfigRecord load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file '" + path + "'");
  return parse_config(buf.str(), path);
}

std::string default_config_text() {
  const link::LinkBudget lb = link::LinkBudget::defaults();
  std::string out;
  for (const BudgetKey& k : kBudgetKeys) {
    out += std::string(k.name) + " = " + format_double(lb.*k.field) + "\n";
  }
  return out;
}

}  // namespace fso::cli
