#ifndef ROLLING_BUNDLED_HPP
#define ROLLING_BUNDLED_HPP

#include <functional>
#include <string>
#include <vector>

#include "rolling/group.hpp"
#include "rolling/wiener.hpp"

namespace rolling {

// Built-in observables, all smooth with analytic coordinate gradients and
// defined for every model dimension:
//   coord-last: x_{d-1}                  (the "area" coordinate on step-2 models)
//   poly-quad:  x_0 x_1 + x_{d-1}^2 / 2 + x_0   (x_0^2 / 2 + x_0 when d = 1)
//   gauss:      (1 + x_0) exp(-|x|^2 / 2)
const std::vector<std::string>& bundled_observable_labels();
ScalarField make_observable(const std::string& label, int dim);

// Built-in Cameron-Martin directions, given by their slopes (evaluated at
// cell midpoints by make_cm_path):
//   linear: hdot^0 = 1
//   sine:   hdot^0 = cos(pi t), hdot^1 = sin(pi t)
//   bump:   hdot^0 = tent(t), hdot^{k-1} += 6 t (1 - t)
const std::vector<std::string>& bundled_direction_labels();
std::function<double(double, int)> make_direction_slope(
    const std::string& label, int k);
CameronMartinPath make_bundled_direction(const PathGrid& grid, int k,
                                         const std::string& label);

// One integration-by-parts test case: cylinder functionals F and G together
// with a direction, plus the common expected value of both pairings when one
// is known in closed form.
struct IbpTriple {
  std::string label;
  CylinderFunctional f;
  CylinderFunctional g;
  std::string h_label;
  bool has_closed_form = false;
  // Expected value of E[(d_h F) G] = E[F d_h^* G] given the realized h.
  std::function<double(const CameronMartinPath&)> closed_form;
};

// The battery used by the duality checks; all triples are two-component
// (k = 2) with evaluation times on every grid with n_steps >= 4.
std::vector<IbpTriple> bundled_ibp_battery();

}  // namespace rolling

#endif
