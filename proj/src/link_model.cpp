#include "fso/link_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fso/errors.hpp"

namespace fso::link {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string("LinkBudget: ") + name + " must be finite and > 0");
  }
}

void require_fraction(double value, const char* name) {
  require_positive(value, name);
  if (value > 1.0) throw DomainError(std::string("LinkBudget: ") + name + " must be <= 1");
}

}  // namespace

void LinkBudget::validate() const {
  require_positive(p_t, "p_t");
  require_fraction(eta_t, "eta_t");
  require_fraction(eta_r, "eta_r");
  require_positive(lambda, "lambda");
  require_positive(d, "d");
  require_positive(d_t, "d_t");
  require_positive(d_r, "d_r");
  require_fraction(l_a, "l_a");
  require_positive(rho, "rho");
  require_positive(sigma_n, "sigma_n");
  require_positive(sigma, "sigma");
  if (!(lambda < d_t)) throw DomainError("LinkBudget: lambda must be smaller than d_t");
  if (!(d >= 1.0)) throw DomainError("LinkBudget: d must be >= 1 m");
}

double LinkBudget::transmitter_gain() const {
  const double g = kPi * d_t / lambda;
  return g * g;
}

double LinkBudget::receiver_gain() const {
  const double g = kPi * d_r / lambda;
  return g * g;
}

double LinkBudget::free_space_loss() const {
  const double l = lambda / (4.0 * kPi * d);
  return l * l;
}

double LinkBudget::pointing_loss(double theta) const {
  return std::exp(-transmitter_gain() * theta * theta);
}

LinkBudget LinkBudget::defaults() {
  LinkBudget lb{};
  lb.p_t = 1e-3;
  lb.eta_t = 0.8;
  lb.eta_r = 0.8;
  lb.lambda = 1550e-9;
  lb.d = 2000.0;
  lb.d_t = 0.05;
  lb.d_r = 0.08;
  lb.l_a = 0.7;
  lb.rho = 0.8;
  lb.sigma_n = 1e-6;
  lb.sigma = 1e-5;
  return lb;
}

void NormalizedPoint::validate() const {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw DomainError("NormalizedPoint: v must be finite and >= 0, got " + std::to_string(v));
  }
  if (!(z >= kZMin && z <= kZMax)) {
    throw DomainError("NormalizedPoint: z must lie in [" + std::to_string(kZMin) + ", " +
                      std::to_string(kZMax) + "], got " + std::to_string(z));
  }
}

double received_power(const LinkBudget& lb, double theta) {
  lb.validate();
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw DomainError("received_power: theta must be finite and >= 0");
  }
  return lb.p_t * lb.eta_t * lb.eta_r * lb.free_space_loss() * lb.transmitter_gain() *
         lb.receiver_gain() * lb.l_a * lb.pointing_loss(theta);
}

double power_coefficient(const LinkBudget& lb, double lambda) {
  const double ratio = lb.d_r / (4.0 * lb.d);
  const double detector = lb.rho / (2.0 * std::numbers::sqrt2 * lambda * lb.sigma_n);
  const double sqrt_gt = kPi * lb.d_t / lambda;
  return detector * lb.eta_t * lb.eta_r * ratio * ratio * lb.l_a * sqrt_gt / lb.sigma;
}

NormalizedPoint normalize(const LinkBudget& lb) {
  lb.validate();
  return {power_coefficient(lb, lb.lambda) * lb.p_t, kPi * lb.d_t * lb.sigma / lb.lambda};
}

double lambda_opt(double z_star, double d_t, double sigma) {
  if (!(z_star > 0.0) || !std::isfinite(z_star)) throw DomainError("lambda_opt: z_star must be > 0");
  if (!(d_t > 0.0) || !(sigma > 0.0)) throw DomainError("lambda_opt: d_t and sigma must be > 0");
  return kPi * d_t * sigma / z_star;
}

double pt_min(double v_star, const LinkBudget& lb, double lambda_opt) {
  if (!(v_star > 0.0) || !std::isfinite(v_star)) throw DomainError("pt_min: v_star must be > 0");
  if (!(lambda_opt > 0.0) || !std::isfinite(lambda_opt)) {
    throw DomainError("pt_min: lambda_opt must be > 0");
  }
  lb.validate();
  return v_star / power_coefficient(lb, lambda_opt);
}

}  // namespace fso::link
