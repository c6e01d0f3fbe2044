#pragma once

// Oscillating top boundary g_eps(x) = eps^alpha b(x/eps) over the reference
// rectangle W x (-1, 0), the layer diffeomorphism Phi_eps that flattens it, and
// the checker for the sharp convergence condition on (g_eps, kappa_eps).

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <variant>
#include <vector>

namespace steklov {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// 1-periodic nonnegative profile b on the cell Y = (-1/2, 1/2) with the
/// perturbation exponent alpha.
class BoundaryProfile {
 public:
  enum class Kind { FourierCosine, Sampled };

  /// b(y) = sum_k c_k cos(2 pi k y).
  static BoundaryProfile fourier_cosine(std::vector<double> coefficients, double alpha);

  /// Values on the closed uniform grid y_j = -1/2 + j/n, j = 0..n; the first
  /// and last value must coincide. Interpolated by a periodic cubic spline.
  static BoundaryProfile sampled(std::vector<double> values, double alpha);

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  const std::vector<double>& coefficients() const { return data_; }

  /// (D^order b)(y), order <= 2.
  double eval(double y, int order = 0) const;

  bool nonconstant() const { return max_ - min_ > 0.0; }
  double min() const { return min_; }
  double max() const { return max_; }
  /// sup |D^order b| over one period.
  double sup_norm(int order) const;

  /// Cosine/sine coefficients a_k, s_k with b ~ a_0 + sum a_k cos(2 pi k y) + s_k sin(2 pi k y).
  struct FourierModes {
    std::vector<double> cos;
    std::vector<double> sin;
  };
  FourierModes fourier_modes(int k_max) const;

  /// Same profile with values multiplied by c >= 0.
  BoundaryProfile scaled(double c) const;
  BoundaryProfile with_alpha(double alpha) const;

 private:
  BoundaryProfile() = default;
  void finalize();

  Kind kind_ = Kind::FourierCosine;
  double alpha_ = 2.0;
  std::vector<double> data_;     // Fourier coefficients or closed samples
  std::vector<double> moments_;  // spline second derivatives (Sampled)
  double min_ = 0.0;
  double max_ = 0.0;
  double sup_[3] = {0.0, 0.0, 0.0};
};

/// Omega = (0, w_len) x (-1, 0), perturbed top g_eps.
struct DomainSpec {
  double epsilon = 0.125;
  BoundaryProfile profile = BoundaryProfile::fourier_cosine({1.0, 1.0}, 2.0);
  double w_len = 1.0;

  /// eps^{alpha - order} (D^order b)(x / eps).
  double g(double x, int order = 0) const;
  /// sup |D^order g_eps| over W (one full period is always sampled).
  double g_sup(int order) const;
  /// True iff w_len / eps is an integer number of cells.
  bool periodic_fit(double tol = 1e-12) const;
  /// Throws if g_eps reaches the bounding box top at 1.
  void validate() const;
};

/// Checked evaluation of g_eps or its derivatives at x in closure(W).
double eval_profile(const DomainSpec& spec, double x, int order);

/// Layer below Gamma_eps of constant thickness k_hat * kappa.
struct KappaLayer {
  double kappa = 0.0;
  double k_hat = 8.0;
};

/// Layer between the flat line x_N = -depth and Gamma_eps.
struct FlatLayer {
  double depth = 0.0;
};

using LayerSpec = std::variant<KappaLayer, FlatLayer>;

/// Flat layer of depth eps, requires eps <= 1/2.
FlatLayer epsilon_layer(const DomainSpec& spec);

/// h_eps with its first and second derivatives at one point.
struct HJet {
  double h = 0.0;
  double hx = 0.0;
  double hy = 0.0;
  double hxx = 0.0;
  double hxy = 0.0;
  double hyy = 0.0;
};

/// Phi_eps(x) = (x_1, x_2 - h_eps(x)), mapping closure(Omega_eps) onto closure(Omega).
/// h_eps = g_eps * s^3 with s the normalized depth inside the layer, zero below it.
class DiffeoField {
 public:
  DiffeoField(DomainSpec spec, LayerSpec layer);

  const DomainSpec& spec() const { return spec_; }
  const LayerSpec& layer() const { return layer_; }
  bool is_identity() const { return identity_; }

  /// Lower edge of the layer at abscissa x (Phi is the identity below it).
  double layer_bottom(double x) const;

  HJet h_jet(const Vec2& x) const;
  double h(const Vec2& x) const { return h_jet(x).h; }
  Vec2 map(const Vec2& x) const;
  /// D Phi_eps = [[1, 0], [-h_x, 1 - h_y]].
  Mat2 jacobian(const Vec2& x) const;
  double det(const Vec2& x) const { return 1.0 - h_jet(x).hy; }
  /// Phi_eps^{-1}(xi): solves y - h(xi_1, y) = xi_2 in the layer.
  Vec2 inverse(const Vec2& xi) const;

 private:
  // s = (y - a(x)) / c(x) inside the layer.
  void layer_coefficients(double x, double a[3], double c[3]) const;

  DomainSpec spec_;
  LayerSpec layer_;
  bool identity_ = false;
};

/// Throws ParameterError / LayerTooThinError / GeometryError for invalid layers.
DiffeoField build_diffeo(const DomainSpec& spec, const LayerSpec& layer);

/// kappa_eps as a function of eps.
using KappaRule = std::function<double(double)>;

/// kappa_eps = eps^{2 alpha_tilde / 3}, alpha_tilde = (3/2 + alpha) / 2 for
/// alpha > 3/2 and alpha_tilde = alpha otherwise.
KappaRule default_kappa_rule(double alpha);

struct AssumptionRow {
  double epsilon = 0.0;
  double kappa = 0.0;
  double sup[3] = {0.0, 0.0, 0.0};    // ||D^beta g_eps||_inf, |beta| = 0, 1, 2
  double ratio[3] = {0.0, 0.0, 0.0};  // sup[beta] / kappa^{3/2 - beta}
};

struct AssumptionReport {
  enum class Verdict { Satisfied, Violated };

  std::vector<AssumptionRow> rows;
  bool kappa_vanishes = false;
  bool below_kappa = false;
  bool ratio_decays[3] = {false, false, false};
  Verdict verdict = Verdict::Violated;

  bool satisfied() const { return verdict == Verdict::Satisfied; }
};

/// Relative slack of the monotone-trend test.
inline constexpr double kTrendSlack = 0.10;

/// Ratio test of the sharp condition over a strictly decreasing eps sequence.
AssumptionReport check_assumptions(const BoundaryProfile& profile,
                                   const std::vector<double>& eps_seq,
                                   const KappaRule& kappa_rule = {});

}  // namespace steklov
