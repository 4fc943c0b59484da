#pragma once

#include <cmath>
#include <random>

#include "laval/config.h"
#include "laval/gas_model.h"

namespace fixtures {

// Small transonic configuration used by most tests.
inline laval::RunConfig coarse(double delta = 0.1) {
  laval::RunConfig c;
  c.nozzle.delta = delta;
  c.subsonic.n_phi = 32;
  c.subsonic.n_psi = 8;
  c.supersonic.n_psi = 8;
  return c;
}

// Isentropic relations written directly from c^2 = 1 - (gamma - 1) q^2 / 2.
struct Isentropic {
  double gamma;
  double c2(double q) const { return 1.0 - 0.5 * (gamma - 1.0) * q * q; }
  double rho(double q) const { return std::pow(c2(q), 1.0 / (gamma - 1.0)); }
  double dA(double q) const { return (c2(q) - q * q) / (q * rho(q) * c2(q)); }
  double dB(double q) const { return rho(q) / q; }
  double mach(double q) const { return q / std::sqrt(c2(q)); }
  // Prandtl-Meyer angle.
  double nu(double q) const {
    const double M2 = mach(q) * mach(q);
    const double k = std::sqrt((gamma + 1.0) / (gamma - 1.0));
    return k * std::atan(std::sqrt((M2 - 1.0) / (k * k))) - std::atan(std::sqrt(M2 - 1.0));
  }
};

inline std::mt19937_64 rng(unsigned seed) { return std::mt19937_64(seed); }

}  // namespace fixtures
