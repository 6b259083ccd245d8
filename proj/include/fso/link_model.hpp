#ifndef FSO_LINK_MODEL_HPP
#define FSO_LINK_MODEL_HPP

namespace fso::link {

/// Admissible band for the normalized wavelength z. Outside it the BER
/// integrand is numerically degenerate and no centimetre-aperture link maps
/// there; every solver bracket is clipped to it.
inline constexpr double kZMin = 0.05;
inline constexpr double kZMax = 50.0;

/// Physical parameters of an IM/DD link with Gaussian-beam pointing loss.
///
/// All quantities are SI. `sigma` is the standard deviation of the radial
/// pointing error in radians.
struct LinkBudget {
  double p_t;      // transmitter power [W]
  double eta_t;    // transmitter optical efficiency (0, 1]
  double eta_r;    // receiver optical efficiency (0, 1]
  double lambda;   // wavelength [m]
  double d;        // link distance [m]
  double d_t;      // transmitter aperture diameter [m]
  double d_r;      // receiver aperture diameter [m]
  double l_a;      // atmospheric loss factor (0, 1]
  double rho;      // detector responsivity [A/W]
  double sigma_n;  // noise standard deviation [A]
  double sigma;    // pointing-error standard deviation [rad]

  /// Throws DomainError naming the first violated invariant.
  void validate() const;

  /// G_T = (pi D_T / lambda)^2.
  double transmitter_gain() const;
  /// G_R = (pi D_R / lambda)^2.
  double receiver_gain() const;
  /// (lambda / (4 pi d))^2.
  double free_space_loss() const;
  /// L_T = exp(-G_T theta^2).
  double pointing_loss(double theta) const;

  /// Implementer-chosen illustrative link: 1550 nm, 2 km, 5 cm / 8 cm
  /// apertures, 10 urad jitter. Not taken from any published parameter set.
  static LinkBudget defaults();
};

/// Coordinates in which both optimization models are posed.
struct NormalizedPoint {
  double v;  // normalized transmitter power
  double z;  // normalized transmitter wavelength, pi D_T sigma / lambda

  /// Incomplete-gamma order a = (2 z^2 + 1) / (4 z^2) of the closed forms.
  double exponent() const { return (2.0 * z * z + 1.0) / (4.0 * z * z); }

  /// v >= 0 (v = 0 is the analytic boundary) and z in [kZMin, kZMax].
  void validate() const;
};

/// Received optical power at pointing angle theta [rad].
double received_power(const LinkBudget& lb, double theta);

/// Maps a link budget to (v, z). The z band is not enforced here so that any
/// valid budget can be normalized; NormalizedPoint::validate() does that.
NormalizedPoint normalize(const LinkBudget& lb);

/// v / P_T for the budget evaluated at `lambda`.
double power_coefficient(const LinkBudget& lb, double lambda);

/// Wavelength that realizes z_star: pi D_T sigma / z_star.
double lambda_opt(double z_star, double d_t, double sigma);

/// Transmitter power that realizes v_star at wavelength lambda_opt, i.e. the
/// exact inverse of the v map with every other budget entry held fixed.
double pt_min(double v_star, const LinkBudget& lb, double lambda_opt);

}  // namespace fso::link

#endif  // FSO_LINK_MODEL_HPP
