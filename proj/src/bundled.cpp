#include "rolling/bundled.hpp"

#include <cmath>

#include "rolling/errors.hpp"

namespace rolling {

const std::vector<std::string>& bundled_observable_labels() {
  static const std::vector<std::string> labels = {"coord-last", "poly-quad",
                                                  "gauss"};
  return labels;
}

ScalarField make_observable(const std::string& label, int dim) {
  if (dim < 1) {
    throw ContractViolation("make_observable: dimension must be positive");
  }
  ScalarField f;
  f.label = label;
  if (label == "coord-last") {
    f.value = [dim](const Eigen::VectorXd& x) { return x[dim - 1]; };
    f.gradient = [dim](const Eigen::VectorXd& x) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
      g[dim - 1] = 1.0;
      return g;
    };
    return f;
  }
  if (label == "poly-quad") {
    if (dim == 1) {
      f.value = [](const Eigen::VectorXd& x) {
        return 0.5 * x[0] * x[0] + x[0];
      };
      f.gradient = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(1);
        g[0] = x[0] + 1.0;
        return g;
      };
      return f;
    }
    f.value = [dim](const Eigen::VectorXd& x) {
      return x[0] * x[1] + 0.5 * x[dim - 1] * x[dim - 1] + x[0];
    };
    f.gradient = [dim](const Eigen::VectorXd& x) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
      g[0] = x[1] + 1.0;
      g[1] = x[0];
      g[dim - 1] += x[dim - 1];
      return g;
    };
    return f;
  }
  if (label == "gauss") {
    f.value = [](const Eigen::VectorXd& x) {
      return (1.0 + x[0]) * std::exp(-0.5 * x.squaredNorm());
    };
    f.gradient = [](const Eigen::VectorXd& x) {
      const double e = std::exp(-0.5 * x.squaredNorm());
      Eigen::VectorXd g = (-(1.0 + x[0]) * e) * x;
      g[0] += e;
      return g;
    };
    return f;
  }
  throw ConfigError("unknown observable '" + label +
                    "' (expected coord-last, poly-quad, or gauss)");
}

const std::vector<std::string>& bundled_direction_labels() {
  static const std::vector<std::string> labels = {"linear", "sine", "bump"};
  return labels;
}

std::function<double(double, int)> make_direction_slope(
    const std::string& label, int k) {
  if (k < 1) {
    throw ContractViolation("make_direction_slope: k must be positive");
  }
  if (label == "linear") {
    return [](double, int c) { return c == 0 ? 1.0 : 0.0; };
  }
  if (label == "sine") {
    return [](double t, int c) {
      if (c == 0) return std::cos(M_PI * t);
      if (c == 1) return std::sin(M_PI * t);
      return 0.0;
    };
  }
  if (label == "bump") {
    return [k](double t, int c) {
      double v = 0.0;
      if (c == 0) v += t < 0.5 ? 2.0 * t : 2.0 * (1.0 - t);
      if (c == k - 1) v += 6.0 * t * (1.0 - t);
      return v;
    };
  }
  throw ConfigError("unknown direction '" + label +
                    "' (expected linear, sine, or bump)");
}

CameronMartinPath make_bundled_direction(const PathGrid& grid, int k,
                                         const std::string& label) {
  return make_cm_path(grid, k, make_direction_slope(label, k));
}

namespace {

Eigen::VectorXd unit2(int slot) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
  e[slot] = 1.0;
  return e;
}

CylinderFunctional constant_one() {
  CylinderFunctional f;
  f.label = "one";
  // Anchored at t = 1 (the value ignores the argument) so the functional
  // evaluates on every grid like the rest of the battery.
  f.times = {1.0};
  f.value = [](const std::vector<Eigen::VectorXd>&) { return 1.0; };
  f.partial = [](const std::vector<Eigen::VectorXd>&, int) {
    return Eigen::VectorXd::Zero(2).eval();
  };
  return f;
}

// h^0 at time 1/2 for the realized direction.
double h0_at_half(const CameronMartinPath& h) {
  return h.values(h.grid.n_steps / 2, 0);
}

}  // namespace

std::vector<IbpTriple> bundled_ibp_battery() {
  std::vector<IbpTriple> battery;

  {
    IbpTriple t;
    t.label = "coordinate-half";
    t.f.label = "w1(1/2)";
    t.f.times = {0.5};
    t.f.value = [](const std::vector<Eigen::VectorXd>& a) { return a[0][0]; };
    t.f.partial = [](const std::vector<Eigen::VectorXd>&, int) {
      return unit2(0);
    };
    t.g = constant_one();
    t.h_label = "linear";
    t.has_closed_form = true;
    t.closed_form = h0_at_half;
    battery.push_back(std::move(t));
  }

  {
    IbpTriple t;
    t.label = "constants";
    t.f = constant_one();
    t.g = constant_one();
    t.h_label = "sine";
    t.has_closed_form = true;
    t.closed_form = [](const CameronMartinPath&) { return 0.0; };
    battery.push_back(std::move(t));
  }

  {
    IbpTriple t;
    t.label = "sin-coordinate";
    t.f.label = "sin(w1(1/2))";
    t.f.times = {0.5};
    t.f.value = [](const std::vector<Eigen::VectorXd>& a) {
      return std::sin(a[0][0]);
    };
    t.f.partial = [](const std::vector<Eigen::VectorXd>& a, int) {
      return (std::cos(a[0][0]) * unit2(0)).eval();
    };
    t.g.label = "w1(1)";
    t.g.times = {1.0};
    t.g.value = [](const std::vector<Eigen::VectorXd>& a) { return a[0][0]; };
    t.g.partial = [](const std::vector<Eigen::VectorXd>&, int) {
      return unit2(0);
    };
    t.h_label = "linear";
    battery.push_back(std::move(t));
  }

  {
    IbpTriple t;
    t.label = "product-mixed";
    t.f.label = "w1(1/2) w2(3/4)";
    t.f.times = {0.5, 0.75};
    t.f.value = [](const std::vector<Eigen::VectorXd>& a) {
      return a[0][0] * a[1][1];
    };
    t.f.partial = [](const std::vector<Eigen::VectorXd>& a, int i) {
      return i == 0 ? (a[1][1] * unit2(0)).eval() : (a[0][0] * unit2(1)).eval();
    };
    t.g.label = "w1(1/4)";
    t.g.times = {0.25};
    t.g.value = [](const std::vector<Eigen::VectorXd>& a) { return a[0][0]; };
    t.g.partial = [](const std::vector<Eigen::VectorXd>&, int) {
      return unit2(0);
    };
    t.h_label = "sine";
    battery.push_back(std::move(t));
  }

  {
    IbpTriple t;
    t.label = "square";
    t.f.label = "w2(1)^2";
    t.f.times = {1.0};
    t.f.value = [](const std::vector<Eigen::VectorXd>& a) {
      return a[0][1] * a[0][1];
    };
    t.f.partial = [](const std::vector<Eigen::VectorXd>& a, int) {
      return (2.0 * a[0][1] * unit2(1)).eval();
    };
    t.g = constant_one();
    t.h_label = "sine";
    t.has_closed_form = true;
    t.closed_form = [](const CameronMartinPath&) { return 0.0; };
    battery.push_back(std::move(t));
  }

  {
    IbpTriple t;
    t.label = "exp-coordinate";
    t.f.label = "exp(-w1(1/2))";
    t.f.times = {0.5};
    t.f.value = [](const std::vector<Eigen::VectorXd>& a) {
      return std::exp(-a[0][0]);
    };
    t.f.partial = [](const std::vector<Eigen::VectorXd>& a, int) {
      return (-std::exp(-a[0][0]) * unit2(0)).eval();
    };
    t.g.label = "w1(1)";
    t.g.times = {1.0};
    t.g.value = [](const std::vector<Eigen::VectorXd>& a) { return a[0][0]; };
    t.g.partial = [](const std::vector<Eigen::VectorXd>&, int) {
      return unit2(0);
    };
    t.h_label = "bump";
    t.has_closed_form = true;
    // E[exp(-X) X] = -(1/2) e^{1/4} for X ~ N(0, 1/2), and the later
    // increment of w1 is independent of X, so both pairings equal
    // (1/2) e^{1/4} h^0(1/2).
    t.closed_form = [](const CameronMartinPath& h) {
      return 0.5 * std::exp(0.25) * h0_at_half(h);
    };
    battery.push_back(std::move(t));
  }

  return battery;
}

}  // namespace rolling
