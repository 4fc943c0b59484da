#pragma once

// Polytropic gas closure in hodograph variables, with the Chaplygin-type
// functions A, B and their compositions used by both flow solvers.
//
// Speeds are normalized so that the stagnation sound speed is 1. Integrals are
// anchored at the critical speed c*, so A(c*) = B(c*) = H(c*) = 0. Internally
// everything is evaluated in the offset u = q - c*, which keeps relative
// accuracy when the state is close to sonic.

#include <vector>

namespace laval {

enum class Branch { subsonic, supersonic };

// Everything the supersonic solver needs at a node, from one inversion.
struct SupersonicState {
  double offset;  // q - c* (> 0)
  double q;
  double b;       // -K'(Q)
  double sqrt_b;
  double p;       // -K''(Q) = db/dQ
};

class GasModel {
 public:
  explicit GasModel(double gamma = 1.4);

  double gamma() const { return gamma_; }
  double c_star() const { return c_star_; }
  double q_max() const { return q_max_; }
  // sup of B over (0, q_max); B is bounded at the vacuum limit
  double B_max() const { return B_max_; }

  double density(double q_squared) const;
  double sound_speed_squared(double q) const;
  double mach(double q) const;

  double A(double q) const;
  double dA(double q) const;
  double d2A(double q) const;
  double B(double q) const;
  double dB(double q) const;
  double d2B(double q) const;
  double H(double q) const;  // characteristic angle function, q >= c*

  // Offset forms: argument u = q - c*.
  double A_offset(double u) const;
  double dA_offset(double u) const;
  double B_offset(double u) const;
  double H_offset(double u) const;

  double A_inv(double s, Branch branch) const;
  // Same as A_inv but returns q - c*, accurate to relative precision.
  double A_inv_offset(double s, Branch branch) const;
  double B_inv(double s) const;
  double B_inv_offset(double s) const;

  // E = A o B^{-1} on s < 0 and its derivatives (closed forms).
  double E(double s) const;
  double dE(double s) const;
  double d2E(double s) const;
  double d3E(double s) const;
  double E_inv(double s) const;
  // G = E' o E^{-1}, G' = E''/E' at E^{-1}(s).
  double G(double s) const;
  double dG(double s) const;

  // K = B o A_+^{-1} on s < 0, b = -K', p = -K''.
  double K(double s) const;
  double dK(double s) const;
  double d2K(double s) const;
  double b(double s) const;
  double p(double s) const;
  SupersonicState supersonic_state(double s) const;

  // Characteristic slope sqrt(-A'/B') = 1/sqrt(b), q > c*.
  double beta(double q) const;

 private:
  // Values of an integral at uniform knots; evaluation adds a short
  // quadrature from the nearest knot.
  struct KnotTable {
    double lo = 0.0;
    double step = 0.0;
    std::vector<double> values;
  };
  template <class F>
  bool lookup(const KnotTable& t, F&& f, double x, double& out) const;

  double c2_offset(double u) const;
  double dA_closed(double u) const;
  double dB_closed(double u) const;
  double E_prime_at(double q) const;
  double E_second_at(double q) const;
  double E_third_at(double q) const;
  double b_at(double u) const;
  double p_at(double u) const;
  void check_speed(double q) const;

  double gamma_;
  double c_star_;
  double q_max_;
  double B_max_;
  // split at the sonic point so small offsets integrate from an exact zero
  KnotTable A_sub_, A_sup_, B_sub_, B_sup_, H_table_;
};

}  // namespace laval
