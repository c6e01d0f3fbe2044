#include "steklov/profile_geometry.hpp"

#include "steklov/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace steklov {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kSupSamples = 8192;

// Position inside the period measured from the left cell edge, in [0, 1).
double cell_offset(double y) {
  double t = y + 0.5;
  t -= std::floor(t);
  return t >= 1.0 ? 0.0 : t;
}

}  // namespace

BoundaryProfile BoundaryProfile::fourier_cosine(std::vector<double> coefficients, double alpha) {
  if (coefficients.empty()) throw ArgumentError("fourier_cosine: empty coefficient list");
  if (!(alpha > 0.0)) throw ArgumentError("profile exponent alpha must be positive");
  BoundaryProfile p;
  p.kind_ = Kind::FourierCosine;
  p.alpha_ = alpha;
  p.data_ = std::move(coefficients);
  p.finalize();
  return p;
}

BoundaryProfile BoundaryProfile::sampled(std::vector<double> values, double alpha) {
  if (values.size() < 4) throw ArgumentError("sampled profile needs at least 3 cells");
  if (!(alpha > 0.0)) throw ArgumentError("profile exponent alpha must be positive");
  const double scale = std::max(1.0, std::abs(values.front()));
  if (std::abs(values.front() - values.back()) > 1e-12 * scale) {
    throw ArgumentError("sampled profile is not periodic: b(-1/2) != b(1/2)");
  }
  BoundaryProfile p;
  p.kind_ = Kind::Sampled;
  p.alpha_ = alpha;
  values.pop_back();
  p.data_ = std::move(values);

  // Periodic cubic spline moments: M_{j-1} + 4 M_j + M_{j+1} = 6 (v_{j+1} - 2 v_j + v_{j-1}) / h^2.
  const int n = static_cast<int>(p.data_.size());
  const double h = 1.0 / n;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs(n);
  for (int j = 0; j < n; ++j) {
    const int jm = (j + n - 1) % n;
    const int jp = (j + 1) % n;
    system(j, j) += 4.0;
    system(j, jm) += 1.0;
    system(j, jp) += 1.0;
    rhs(j) = 6.0 * (p.data_[jp] - 2.0 * p.data_[j] + p.data_[jm]) / (h * h);
  }
  const Eigen::VectorXd moments = system.ldlt().solve(rhs);
  p.moments_.assign(moments.data(), moments.data() + n);
  p.finalize();
  return p;
}

void BoundaryProfile::finalize() {
  min_ = std::numeric_limits<double>::infinity();
  max_ = -std::numeric_limits<double>::infinity();
  std::fill(std::begin(sup_), std::end(sup_), 0.0);
  // Sampled splines attain extremal second derivatives at knots; include them.
  std::vector<double> ys;
  ys.reserve(kSupSamples + data_.size());
  for (int m = 0; m < kSupSamples; ++m) ys.push_back(-0.5 + static_cast<double>(m) / kSupSamples);
  if (kind_ == Kind::Sampled) {
    for (std::size_t j = 0; j < data_.size(); ++j) {
      ys.push_back(-0.5 + static_cast<double>(j) / data_.size());
    }
  }
  for (const double y : ys) {
    const double v = eval(y, 0);
    min_ = std::min(min_, v);
    max_ = std::max(max_, v);
    for (int order = 0; order <= 2; ++order) {
      sup_[order] = std::max(sup_[order], std::abs(eval(y, order)));
    }
  }
  if (min_ < -1e-12 * std::max(1.0, std::abs(max_))) {
    throw ArgumentError("profile b must be nonnegative (min b = " + std::to_string(min_) + ")");
  }
  // Exactly-constant profiles must report nonconstant() == false.
  if (max_ - min_ < 1e-14 * std::max(1.0, std::abs(max_))) max_ = min_;
}

double BoundaryProfile::eval(double y, int order) const {
  if (order < 0 || order > 2) {
    throw UnsupportedOrderError("profile derivatives are available up to order 2");
  }
  if (kind_ == Kind::FourierCosine) {
    double v = order == 0 ? data_[0] : 0.0;
    for (std::size_t k = 1; k < data_.size(); ++k) {
      const double w = kTwoPi * static_cast<double>(k);
      switch (order) {
        case 0:
          v += data_[k] * std::cos(w * y);
          break;
        case 1:
          v -= data_[k] * w * std::sin(w * y);
          break;
        default:
          v -= data_[k] * w * w * std::cos(w * y);
          break;
      }
    }
    return v;
  }
  const int n = static_cast<int>(data_.size());
  const double h = 1.0 / n;
  const double t = cell_offset(y);
  const int j = std::min(static_cast<int>(t / h), n - 1);
  const int jp = (j + 1) % n;
  const double tau = t - j * h;
  const double mj = moments_[j];
  const double mp = moments_[jp];
  const double cj = data_[j] / h - mj * h / 6.0;
  const double cp = data_[jp] / h - mp * h / 6.0;
  const double r = h - tau;
  switch (order) {
    case 0:
      return mj * r * r * r / (6.0 * h) + mp * tau * tau * tau / (6.0 * h) + cj * r + cp * tau;
    case 1:
      return -mj * r * r / (2.0 * h) + mp * tau * tau / (2.0 * h) - cj + cp;
    default:
      return mj * r / h + mp * tau / h;
  }
}

double BoundaryProfile::sup_norm(int order) const {
  if (order < 0 || order > 2) {
    throw UnsupportedOrderError("profile derivatives are available up to order 2");
  }
  return sup_[order];
}

BoundaryProfile::FourierModes BoundaryProfile::fourier_modes(int k_max) const {
  if (k_max < 0) throw ArgumentError("fourier_modes: k_max must be nonnegative");
  FourierModes modes;
  modes.cos.assign(k_max + 1, 0.0);
  modes.sin.assign(k_max + 1, 0.0);
  if (kind_ == Kind::FourierCosine) {
    for (int k = 0; k <= k_max && k < static_cast<int>(data_.size()); ++k) modes.cos[k] = data_[k];
    return modes;
  }
  // Periodic trapezoid projection of the spline.
  const int samples = std::max(64 * (k_max + 1), 32 * static_cast<int>(data_.size()));
  for (int m = 0; m < samples; ++m) {
    const double y = -0.5 + static_cast<double>(m) / samples;
    const double v = eval(y, 0);
    modes.cos[0] += v / samples;
    for (int k = 1; k <= k_max; ++k) {
      modes.cos[k] += 2.0 * v * std::cos(kTwoPi * k * y) / samples;
      modes.sin[k] += 2.0 * v * std::sin(kTwoPi * k * y) / samples;
    }
  }
  return modes;
}

BoundaryProfile BoundaryProfile::scaled(double c) const {
  if (c < 0.0) throw ArgumentError("profile scale factor must be nonnegative");
  std::vector<double> data = data_;
  for (double& v : data) v *= c;
  if (kind_ == Kind::FourierCosine) return fourier_cosine(std::move(data), alpha_);
  data.push_back(data.front());
  return sampled(std::move(data), alpha_);
}

BoundaryProfile BoundaryProfile::with_alpha(double alpha) const {
  if (!(alpha > 0.0)) throw ArgumentError("profile exponent alpha must be positive");
  BoundaryProfile p = *this;
  p.alpha_ = alpha;
  return p;
}

double DomainSpec::g(double x, int order) const {
  return std::pow(epsilon, profile.alpha() - order) * profile.eval(x / epsilon, order);
}

double DomainSpec::g_sup(int order) const {
  const double scale = std::pow(epsilon, profile.alpha() - order);
  if (w_len >= epsilon) return scale * profile.sup_norm(order);
  double s = 0.0;
  for (int m = 0; m <= kSupSamples; ++m) {
    s = std::max(s, std::abs(profile.eval(w_len * m / (kSupSamples * epsilon), order)));
  }
  return scale * s;
}

bool DomainSpec::periodic_fit(double tol) const {
  const double cells = w_len / epsilon;
  return std::abs(cells - std::round(cells)) <= tol * std::max(1.0, cells);
}

void DomainSpec::validate() const {
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  if (!(w_len > 0.0)) throw ArgumentError("W length must be positive");
  if (!(g_sup(0) < 1.0)) throw GeometryError("g_eps reaches the top of the bounding box");
}

double eval_profile(const DomainSpec& spec, double x, int order) {
  if (order < 0 || order > 2) throw UnsupportedOrderError("eval_profile: order must be 0, 1 or 2");
  const double tol = 1e-12 * spec.w_len;
  if (x < -tol || x > spec.w_len + tol) throw ArgumentError("eval_profile: x outside closure(W)");
  return spec.g(x, order);
}

FlatLayer epsilon_layer(const DomainSpec& spec) {
  if (spec.epsilon > 0.5) throw ParameterError("epsilon layer requires eps <= 1/2");
  return FlatLayer{spec.epsilon};
}

DiffeoField::DiffeoField(DomainSpec spec, LayerSpec layer)
    : spec_(std::move(spec)), layer_(layer), identity_(spec_.g_sup(0) == 0.0) {}

void DiffeoField::layer_coefficients(double x, double a[3], double c[3]) const {
  const double g0 = spec_.g(x, 0);
  const double g1 = spec_.g(x, 1);
  const double g2 = spec_.g(x, 2);
  if (const auto* kl = std::get_if<KappaLayer>(&layer_)) {
    const double thickness = kl->k_hat * kl->kappa;
    a[0] = g0 - thickness;
    a[1] = g1;
    a[2] = g2;
    c[0] = thickness;
    c[1] = 0.0;
    c[2] = 0.0;
  } else {
    const double depth = std::get<FlatLayer>(layer_).depth;
    a[0] = -depth;
    a[1] = 0.0;
    a[2] = 0.0;
    c[0] = g0 + depth;
    c[1] = g1;
    c[2] = g2;
  }
}

double DiffeoField::layer_bottom(double x) const {
  if (const auto* kl = std::get_if<KappaLayer>(&layer_)) {
    return spec_.g(x, 0) - kl->k_hat * kl->kappa;
  }
  return -std::get<FlatLayer>(layer_).depth;
}

HJet DiffeoField::h_jet(const Vec2& x) const {
  HJet jet;
  if (identity_) return jet;
  double a[3];
  double c[3];
  layer_coefficients(x(0), a, c);
  if (x(1) <= a[0]) return jet;
  const double g0 = spec_.g(x(0), 0);
  const double g1 = spec_.g(x(0), 1);
  const double g2 = spec_.g(x(0), 2);
  const double s = (x(1) - a[0]) / c[0];
  const double sx = -(a[1] + s * c[1]) / c[0];
  const double sy = 1.0 / c[0];
  const double sxx = -(a[2] + 2.0 * sx * c[1] + s * c[2]) / c[0];
  const double sxy = -c[1] / (c[0] * c[0]);
  const double s2 = s * s;
  const double s3 = s2 * s;
  jet.h = g0 * s3;
  jet.hx = g1 * s3 + 3.0 * g0 * s2 * sx;
  jet.hy = 3.0 * g0 * s2 * sy;
  jet.hxx = g2 * s3 + 6.0 * g1 * s2 * sx + 6.0 * g0 * s * sx * sx + 3.0 * g0 * s2 * sxx;
  jet.hxy = 3.0 * g1 * s2 * sy + 6.0 * g0 * s * sx * sy + 3.0 * g0 * s2 * sxy;
  jet.hyy = 6.0 * g0 * s * sy * sy;
  return jet;
}

Vec2 DiffeoField::map(const Vec2& x) const { return Vec2(x(0), x(1) - h(x)); }

Mat2 DiffeoField::jacobian(const Vec2& x) const {
  const HJet jet = h_jet(x);
  Mat2 j;
  j << 1.0, 0.0, -jet.hx, 1.0 - jet.hy;
  return j;
}

Vec2 DiffeoField::inverse(const Vec2& xi) const {
  const double bottom = layer_bottom(xi(0));
  if (identity_ || xi(1) <= bottom) return xi;
  const double top = spec_.g(xi(0), 0);
  const double eta = xi(1);
  // F(y) = y - h(xi_1, y) increases from `bottom` at y = bottom to 0 at y = top.
  double lo = bottom;
  double hi = eta > 0.0 ? top + 2.0 * eta : top;
  double y = bottom + (eta - bottom) * (top - bottom) / (0.0 - bottom);
  y = std::clamp(y, lo, hi);
  for (int it = 0; it < 100; ++it) {
    const HJet jet = h_jet(Vec2(xi(0), y));
    const double f = y - jet.h - eta;
    if (std::abs(f) <= 1e-15 * (1.0 + std::abs(eta))) break;
    if (f > 0.0) {
      hi = y;
    } else {
      lo = y;
    }
    const double slope = 1.0 - jet.hy;
    double next = slope > 0.0 ? y - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == y) break;
    y = next;
  }
  return Vec2(xi(0), y);
}

DiffeoField build_diffeo(const DomainSpec& spec, const LayerSpec& layer) {
  spec.validate();
  const double g_max = spec.g_sup(0);
  const double g_min = std::pow(spec.epsilon, spec.profile.alpha()) * spec.profile.min();
  if (const auto* kl = std::get_if<KappaLayer>(&layer)) {
    if (!(kl->k_hat > 6.0)) throw ParameterError("kappa layer requires k_hat > 6");
    if (!(kl->kappa > 0.0)) throw ParameterError("kappa must be positive");
    if (!(kl->kappa > g_max)) {
      throw LayerTooThinError("kappa_eps must exceed ||g_eps||_inf");
    }
    if (!(g_min - kl->k_hat * kl->kappa > -1.0)) {
      throw GeometryError("kappa layer reaches the bottom of the domain");
    }
  } else {
    const double depth = std::get<FlatLayer>(layer).depth;
    if (!(depth > 0.0)) throw ParameterError("flat layer depth must be positive");
    if (!(depth < 1.0)) throw GeometryError("flat layer reaches the bottom of the domain");
    // det D Phi >= 1 - 3 g / (g + depth) > 0.
    if (!(2.0 * g_max < depth)) throw LayerTooThinError("flat layer depth must exceed 2 ||g_eps||_inf");
  }
  return DiffeoField(spec, layer);
}

KappaRule default_kappa_rule(double alpha) {
  const double alpha_tilde = alpha > 1.5 ? 0.5 * (1.5 + alpha) : alpha;
  const double exponent = 2.0 * alpha_tilde / 3.0;
  return [exponent](double eps) { return std::pow(eps, exponent); };
}

namespace {

bool decays(const std::vector<double>& r) {
  if (r.size() < 2) return false;
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (r[i] > (1.0 + kTrendSlack) * r[i - 1]) return false;
  }
  return r.back() <= (1.0 - kTrendSlack) * r.front();
}

}  // namespace

AssumptionReport check_assumptions(const BoundaryProfile& profile,
                                   const std::vector<double>& eps_seq,
                                   const KappaRule& kappa_rule) {
  if (eps_seq.empty()) throw ArgumentError("check_assumptions: empty eps sequence");
  for (std::size_t i = 0; i < eps_seq.size(); ++i) {
    if (!(eps_seq[i] > 0.0)) throw ArgumentError("check_assumptions: eps must be positive");
    if (i > 0 && !(eps_seq[i] < eps_seq[i - 1])) {
      throw ArgumentError("check_assumptions: eps sequence must be strictly decreasing");
    }
  }
  const KappaRule rule = kappa_rule ? kappa_rule : default_kappa_rule(profile.alpha());

  AssumptionReport report;
  std::vector<double> kappas;
  std::vector<double> ratios[3];
  report.below_kappa = true;
  for (const double eps : eps_seq) {
    AssumptionRow row;
    row.epsilon = eps;
    row.kappa = rule(eps);
    for (int beta = 0; beta <= 2; ++beta) {
      row.sup[beta] = std::pow(eps, profile.alpha() - beta) * profile.sup_norm(beta);
      row.ratio[beta] = row.sup[beta] / std::pow(row.kappa, 1.5 - beta);
      ratios[beta].push_back(row.ratio[beta]);
    }
    if (!(row.sup[0] < row.kappa)) report.below_kappa = false;
    kappas.push_back(row.kappa);
    report.rows.push_back(row);
  }
  report.kappa_vanishes = decays(kappas);
  bool all = report.kappa_vanishes && report.below_kappa;
  for (int beta = 0; beta <= 2; ++beta) {
    // A vanishing ratio sequence (flat profile) decays trivially.
    const bool zero = std::all_of(ratios[beta].begin(), ratios[beta].end(),
                                  [](double r) { return r == 0.0; });
    report.ratio_decays[beta] = zero || decays(ratios[beta]);
    all = all && report.ratio_decays[beta];
  }
  report.verdict = all ? AssumptionReport::Verdict::Satisfied : AssumptionReport::Verdict::Violated;
  return report;
}

}  // namespace steklov
