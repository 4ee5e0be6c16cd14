#pragma once

#include "ecm/error.hpp"

namespace ecm {

/// Conductivities, permittivities and the Faraday volume coefficient of the
/// three phases. SI units throughout.
struct MaterialSet {
  double k_metal = 4.625e6;      // A/(V m)
  double k_electrolyte = 16.0;   // A/(V m)
  double k_cathode = 1.0e12;     // A/(V m), "numerically infinite"
  double eps_r_metal = 1.0;
  double eps_r_electrolyte = 80.0;
  double eps_r_cathode = 1.0;
  double eps0 = 8.854e-12;       // A s/(V m)
  double nu_dis = 1.0e-11;       // m^3/(A s)

  /// Reference parameter set used unless a scenario overrides it.
  static MaterialSet standard() { return {}; }

  void validate() const {
    if (!(k_metal > 0 && k_electrolyte > 0 && k_cathode > 0)) {
      throw InvalidArgument("conductivities must be positive");
    }
    if (!(eps_r_metal >= 1 && eps_r_electrolyte >= 1 && eps_r_cathode >= 1)) {
      throw InvalidArgument("relative permittivities must be >= 1");
    }
    if (!(eps0 >= 0)) throw InvalidArgument("eps0 must be non-negative");
    if (!(nu_dis > 0)) throw InvalidArgument("nu_dis must be positive");
  }

  friend bool operator==(const MaterialSet&, const MaterialSet&) = default;
};

}  // namespace ecm
