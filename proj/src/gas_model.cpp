#include "laval/gas_model.h"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "laval/errors.h"

namespace laval {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kVacuumGuard = 1e-14;
constexpr int kMaxRootIterations = 100;

using Gauss20 = boost::math::quadrature::gauss<double, 20>;
using Gauss10 = boost::math::quadrature::gauss<double, 10>;

// Knot tables cover this fraction of each branch; the rest near q = 0 and
// q = q_max falls back to the singular quadrature.
constexpr double kTableCoverage = 0.95;
constexpr int kTableKnots = 256;

// Integrates f over [0, x_end] (x_end > 0) where f may be singular at
// x_sing >= x_end. Panels shrink geometrically toward the singularity so each
// one sees it at least half a panel length away.
template <class F>
double integrate_toward(F&& f, double x_end, double x_sing) {
  double total = 0.0;
  double a = 0.0;
  for (int it = 0; it < 400 && a < x_end; ++it) {
    if (x_sing - x_end >= 0.5 * (x_end - a)) {
      total += Gauss20::integrate(f, a, x_end);
      break;
    }
    const double m = (x_sing + 0.5 * a) / 1.5;
    total += Gauss20::integrate(f, a, m);
    if (x_end - m <= 4.0 * kEps * x_end) break;
    a = m;
  }
  return total;
}

// Safeguarded Newton on a monotone function with a sign-change bracket.
template <class F, class DF>
double bracketed_newton(F&& f, DF&& df, double lo, double hi, double guess,
                        const char* what) {
  double f_lo = f(lo);
  const bool increasing = f_lo < 0.0;
  double u = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int it = 0; it < kMaxRootIterations; ++it) {
    const double fu = f(u);
    if (fu == 0.0) return u;
    if ((fu < 0.0) == increasing) {
      lo = u;
    } else {
      hi = u;
    }
    const double d = df(u);
    double next = u - fu / d;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    const double scale = std::max(std::abs(next), 1e-300);
    if (std::abs(next - u) <= 8.0 * kEps * scale || hi - lo <= 4.0 * kEps * scale) {
      return next;
    }
    u = next;
  }
  std::ostringstream msg;
  msg << what << ": root finder did not converge in " << kMaxRootIterations
      << " iterations";
  throw ConvergenceError(msg.str(), {});
}

}  // namespace

GasModel::GasModel(double gamma) : gamma_(gamma) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw DomainError("gamma must be > 1");
  }
  c_star_ = std::sqrt(2.0 / (gamma_ + 1.0));
  q_max_ = std::sqrt(2.0 / (gamma_ - 1.0));
  const double u_end = q_max_ - c_star_;
  auto integrand = [this](double t) { return dB_closed(t); };
  B_max_ = integrate_toward(integrand, u_end, u_end);

  // Filled off to the side so the exact evaluations never consult a
  // partially built table.
  auto fill = [](KnotTable& dst, double lo, double hi, auto&& exact) {
    KnotTable t;
    t.lo = lo;
    t.step = (hi - lo) / kTableKnots;
    t.values.resize(kTableKnots + 1);
    for (int k = 0; k <= kTableKnots; ++k) t.values[k] = exact(lo + k * t.step);
    dst = std::move(t);
  };
  const double lo = -kTableCoverage * c_star_;
  const double hi = kTableCoverage * u_end;
  auto exact_A = [this, u_end](double u) {
    if (u == 0.0) return 0.0;
    if (u > 0.0) return integrate_toward([this](double t) { return dA_closed(t); }, u, u_end);
    return -integrate_toward([this](double x) { return dA_closed(-x); }, -u, c_star_);
  };
  auto exact_B = [this, u_end](double u) {
    if (u == 0.0) return 0.0;
    if (u > 0.0) return integrate_toward([this](double t) { return dB_closed(t); }, u, u_end);
    return -integrate_toward([this](double x) { return dB_closed(-x); }, -u, c_star_);
  };
  fill(A_sub_, lo, 0.0, exact_A);
  fill(A_sup_, 0.0, hi, exact_A);
  fill(B_sub_, lo, 0.0, exact_B);
  fill(B_sup_, 0.0, hi, exact_B);
  fill(H_table_, 0.0, std::sqrt(hi), [this](double tau) { return H_offset(tau * tau); });
}

template <class F>
bool GasModel::lookup(const KnotTable& t, F&& f, double x, double& out) const {
  if (t.values.empty()) return false;
  const double r = (x - t.lo) / t.step;
  if (!(r >= 0.0) || !(r <= kTableKnots)) return false;
  const int k = static_cast<int>(std::lround(r));
  const double xk = t.lo + k * t.step;
  out = t.values[k] + (x == xk ? 0.0 : Gauss10::integrate(f, xk, x));
  return true;
}

double GasModel::density(double q_squared) const {
  const double c2 = 1.0 - 0.5 * (gamma_ - 1.0) * q_squared;
  if (q_squared < 0.0 || c2 < 0.0) {
    throw DomainError("density: speed outside [0, q_max]");
  }
  return std::pow(c2, 1.0 / (gamma_ - 1.0));
}

double GasModel::sound_speed_squared(double q) const {
  return 1.0 - 0.5 * (gamma_ - 1.0) * q * q;
}

double GasModel::mach(double q) const {
  return q / std::sqrt(sound_speed_squared(q));
}

void GasModel::check_speed(double q) const {
  if (!(q > 0.0) || !(q < q_max_ - kVacuumGuard)) {
    std::ostringstream msg;
    msg << "speed " << q << " outside (0, q_max) with q_max = " << q_max_;
    throw DomainError(msg.str());
  }
}

double GasModel::c2_offset(double u) const {
  const double q = c_star_ + u;
  return 0.5 * (gamma_ - 1.0) * (q_max_ - q) * (q_max_ + q);
}

// A'(q) = (c^2 - q^2) / (q rho c^2), with c^2 - q^2 written through the offset.
double GasModel::dA_closed(double u) const {
  const double q = c_star_ + u;
  const double c2 = c2_offset(u);
  const double num = -0.5 * (gamma_ + 1.0) * u * (2.0 * c_star_ + u);
  return num / (q * std::pow(c2, gamma_ / (gamma_ - 1.0)));
}

double GasModel::dB_closed(double u) const {
  const double q = c_star_ + u;
  return std::pow(c2_offset(u), 1.0 / (gamma_ - 1.0)) / q;
}

double GasModel::A_offset(double u) const {
  check_speed(c_star_ + u);
  if (u == 0.0) return 0.0;
  double v;
  if (lookup(u < 0.0 ? A_sub_ : A_sup_, [this](double t) { return dA_closed(t); }, u, v)) return v;
  if (u > 0.0) {
    const double sing = q_max_ - c_star_;
    return integrate_toward([this](double t) { return dA_closed(t); }, u, sing);
  }
  // integrate over t in [u, 0] via t = -x
  return -integrate_toward([this](double x) { return dA_closed(-x); }, -u, c_star_);
}

double GasModel::dA_offset(double u) const {
  check_speed(c_star_ + u);
  return dA_closed(u);
}

double GasModel::B_offset(double u) const {
  check_speed(c_star_ + u);
  if (u == 0.0) return 0.0;
  double v;
  if (lookup(u < 0.0 ? B_sub_ : B_sup_, [this](double t) { return dB_closed(t); }, u, v)) return v;
  if (u > 0.0) {
    const double sing = q_max_ - c_star_;
    return integrate_toward([this](double t) { return dB_closed(t); }, u, sing);
  }
  return -integrate_toward([this](double x) { return dB_closed(-x); }, -u, c_star_);
}

double GasModel::H_offset(double u) const {
  if (u < 0.0) throw DomainError("H is defined for q >= c*");
  check_speed(c_star_ + u);
  if (u == 0.0) return 0.0;
  // t = tau^2 removes the square-root behaviour at the sonic end
  const double k = std::sqrt(0.5 * (gamma_ + 1.0));
  auto integrand = [this, k](double tau) {
    const double t = tau * tau;
    const double q = c_star_ + t;
    const double c = std::sqrt(c2_offset(t));
    return 2.0 * k * tau * tau * std::sqrt(2.0 * c_star_ + t) / (q * c);
  };
  double v;
  if (lookup(H_table_, integrand, std::sqrt(u), v)) return v;
  return integrate_toward(integrand, std::sqrt(u), std::sqrt(q_max_ - c_star_));
}

double GasModel::A(double q) const { return A_offset(q - c_star_); }
double GasModel::B(double q) const { return B_offset(q - c_star_); }
double GasModel::H(double q) const { return H_offset(q - c_star_); }

double GasModel::dA(double q) const {
  check_speed(q);
  return dA_closed(q - c_star_);
}

double GasModel::d2A(double q) const {
  check_speed(q);
  const double u = q - c_star_;
  const double c2 = c2_offset(u);
  const double e = 1.0 / (gamma_ - 1.0);
  const double num = -0.5 * (gamma_ + 1.0) * u * (2.0 * c_star_ + u);
  const double dnum = -(gamma_ + 1.0) * q;
  const double den = q * std::pow(c2, gamma_ * e);
  const double dden = std::pow(c2, e) * (c2 - gamma_ * q * q);
  return (dnum * den - num * dden) / (den * den);
}

double GasModel::dB(double q) const {
  check_speed(q);
  return dB_closed(q - c_star_);
}

double GasModel::d2B(double q) const {
  check_speed(q);
  const double c2 = sound_speed_squared(q);
  const double rho = std::pow(c2, 1.0 / (gamma_ - 1.0));
  return -rho * (1.0 + q * q / c2) / (q * q);
}

double GasModel::A_inv_offset(double s, Branch branch) const {
  if (!(s <= 0.0)) {
    std::ostringstream msg;
    msg << "A_inv: value " << s << " above the branch supremum 0";
    throw DomainError(msg.str());
  }
  if (s == 0.0) return 0.0;
  if (std::isinf(s)) throw DomainError("A_inv: value is -infinity");
  const double a2 = -(gamma_ + 1.0) / std::pow(c_star_ * c_star_, gamma_ / (gamma_ - 1.0));
  const double guess_mag = std::sqrt(2.0 * s / a2);
  auto f = [this, s](double u) { return A_offset(u) - s; };
  auto df = [this](double u) { return dA_closed(u); };
  if (branch == Branch::subsonic) {
    double lo = -std::min(2.0 * guess_mag, 0.5 * c_star_);
    while (f(lo) >= 0.0) {
      lo = -c_star_ + 0.125 * (c_star_ + lo);
      if (c_star_ + lo < 1e-280) throw DomainError("A_inv: value below the subsonic range");
    }
    return bracketed_newton(f, df, lo, 0.0, -guess_mag, "A_inv");
  }
  const double u_top = q_max_ - c_star_ - kVacuumGuard;
  double hi = std::min(2.0 * guess_mag, 0.5 * (q_max_ - c_star_));
  while (f(hi) >= 0.0) {
    hi = u_top - 0.125 * (u_top - hi);
    if (u_top - hi < 1e-13) throw DomainError("A_inv: value beyond the supersonic range");
  }
  return bracketed_newton(f, df, 0.0, hi, guess_mag, "A_inv");
}

double GasModel::A_inv(double s, Branch branch) const {
  return c_star_ + A_inv_offset(s, branch);
}

double GasModel::B_inv_offset(double s) const {
  if (!(s < B_max_)) {
    std::ostringstream msg;
    msg << "B_inv: value " << s << " not below B_max = " << B_max_;
    throw DomainError(msg.str());
  }
  if (s == 0.0) return 0.0;
  if (std::isinf(s)) throw DomainError("B_inv: value is -infinity");
  const double rho_star = std::pow(c_star_ * c_star_, 1.0 / (gamma_ - 1.0));
  const double guess = s * c_star_ / rho_star;
  auto f = [this, s](double u) { return B_offset(u) - s; };
  auto df = [this](double u) { return dB_closed(u); };
  if (s < 0.0) {
    double lo = std::max(2.0 * guess, -0.5 * c_star_);
    while (f(lo) >= 0.0) {
      lo = -c_star_ + 0.125 * (c_star_ + lo);
      if (c_star_ + lo < 1e-280) throw DomainError("B_inv: value below the range");
    }
    return bracketed_newton(f, df, lo, 0.0, guess, "B_inv");
  }
  const double u_top = q_max_ - c_star_ - kVacuumGuard;
  double hi = std::min(2.0 * guess, 0.5 * (q_max_ - c_star_));
  while (f(hi) <= 0.0) {
    hi = u_top - 0.125 * (u_top - hi);
    if (u_top - hi < 1e-13) throw DomainError("B_inv: value beyond the range");
  }
  return bracketed_newton(f, df, 0.0, hi, guess, "B_inv");
}

double GasModel::B_inv(double s) const { return c_star_ + B_inv_offset(s); }

// E-family closed forms, written in q.
double GasModel::E_prime_at(double q) const {
  const double u = q - c_star_;
  const double lead = -0.5 * (gamma_ + 1.0) * u * (2.0 * c_star_ + u);
  return lead * std::pow(c2_offset(u), -2.0 / (gamma_ - 1.0) - 1.0);
}

double GasModel::E_second_at(double q) const {
  const double q2 = q * q;
  return -(gamma_ + 1.0) * q2 * q2 *
         std::pow(c2_offset(q - c_star_), -3.0 / (gamma_ - 1.0) - 2.0);
}

double GasModel::E_third_at(double q) const {
  const double q2 = q * q;
  return -(gamma_ + 1.0) * q2 * q2 * (4.0 + 3.0 * q2) *
         std::pow(c2_offset(q - c_star_), -4.0 / (gamma_ - 1.0) - 3.0);
}

namespace {
void require_nonpositive(double s, const char* what) {
  if (!(s <= 0.0)) {
    std::ostringstream msg;
    msg << what << ": argument " << s << " must be <= 0";
    throw DomainError(msg.str());
  }
}
}  // namespace

double GasModel::E(double s) const {
  require_nonpositive(s, "E");
  return A_offset(B_inv_offset(s));
}

double GasModel::dE(double s) const {
  require_nonpositive(s, "dE");
  return E_prime_at(B_inv(s));
}

double GasModel::d2E(double s) const {
  require_nonpositive(s, "d2E");
  return E_second_at(B_inv(s));
}

double GasModel::d3E(double s) const {
  require_nonpositive(s, "d3E");
  return E_third_at(B_inv(s));
}

double GasModel::E_inv(double s) const {
  require_nonpositive(s, "E_inv");
  return B_offset(A_inv_offset(s, Branch::subsonic));
}

double GasModel::G(double s) const {
  require_nonpositive(s, "G");
  return E_prime_at(A_inv(s, Branch::subsonic));
}

double GasModel::dG(double s) const {
  require_nonpositive(s, "dG");
  const double q = A_inv(s, Branch::subsonic);
  return E_second_at(q) / E_prime_at(q);
}

double GasModel::b_at(double u) const {
  const double d = 0.5 * (gamma_ + 1.0) * u * (2.0 * c_star_ + u);
  return std::pow(c2_offset(u), 2.0 / (gamma_ - 1.0) + 1.0) / d;
}

double GasModel::p_at(double u) const {
  const double q = c_star_ + u;
  const double q2 = q * q;
  const double d = 0.5 * (gamma_ + 1.0) * u * (2.0 * c_star_ + u);
  return (gamma_ + 1.0) * q2 * q2 / (d * d * d) *
         std::pow(c2_offset(u), 3.0 / (gamma_ - 1.0) + 1.0);
}

double GasModel::K(double s) const {
  require_nonpositive(s, "K");
  return B_offset(A_inv_offset(s, Branch::supersonic));
}

double GasModel::dK(double s) const { return -b(s); }
double GasModel::d2K(double s) const { return -p(s); }

double GasModel::b(double s) const {
  if (!(s < 0.0)) throw DomainError("b: argument must be < 0");
  return b_at(A_inv_offset(s, Branch::supersonic));
}

double GasModel::p(double s) const {
  if (!(s < 0.0)) throw DomainError("p: argument must be < 0");
  return p_at(A_inv_offset(s, Branch::supersonic));
}

SupersonicState GasModel::supersonic_state(double s) const {
  if (!(s < 0.0)) throw DomainError("supersonic_state: argument must be < 0");
  SupersonicState st{};
  st.offset = A_inv_offset(s, Branch::supersonic);
  st.q = c_star_ + st.offset;
  st.b = b_at(st.offset);
  st.sqrt_b = std::sqrt(st.b);
  st.p = p_at(st.offset);
  return st;
}

double GasModel::beta(double q) const {
  check_speed(q);
  const double u = q - c_star_;
  if (!(u > 0.0)) throw DomainError("beta is defined for q > c*");
  return 1.0 / std::sqrt(b_at(u));
}

}  // namespace laval
