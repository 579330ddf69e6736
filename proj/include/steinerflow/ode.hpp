#ifndef STEINERFLOW_ODE_HPP_
#define STEINERFLOW_ODE_HPP_

// Small header-only Runge-Kutta toolkit used by the geodesic marchers.
//
// The embedded pair is Dormand-Prince 5(4) ("ode45"): the fifth-order
// solution is propagated with the fourth-order one used for the error
// estimate.  A fixed-step mode propagating the *fourth*-order member is
// provided for convergence-order studies.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>

namespace steinerflow::ode {

template <std::size_t N>
using State = std::array<double, N>;

namespace dp {
// Dormand-Prince tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
// Fifth-order weights (also the last stage row: FSAL).
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// Embedded fourth-order weights.
inline constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695,
                        e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                        e6 = 187.0 / 2100, e7 = 1.0 / 40;
}  // namespace dp

template <std::size_t N>
struct StepResult {
  State<N> y5{};   // fifth-order solution at t + h
  State<N> y4{};   // embedded fourth-order solution
  State<N> k_end{};  // derivative at (t + h, y5); next step's first stage
};

// One Dormand-Prince step from (t, y) with derivative k1 = f(t, y).
template <std::size_t N, class RHS>
StepResult<N> dp_step(const RHS& f, double t, const State<N>& y, double h,
                      const State<N>& k1) {
  using namespace dp;
  State<N> tmp, k2, k3, k4, k5, k6;
  auto axpy = [&](const auto&... terms) {
    for (std::size_t i = 0; i < N; ++i) {
      double acc = y[i];
      ((acc += h * terms.first * terms.second[i]), ...);
      tmp[i] = acc;
    }
  };
  using P = std::pair<double, const State<N>&>;
  axpy(P{a21, k1});
  k2 = f(t + c2 * h, tmp);
  axpy(P{a31, k1}, P{a32, k2});
  k3 = f(t + c3 * h, tmp);
  axpy(P{a41, k1}, P{a42, k2}, P{a43, k3});
  k4 = f(t + c4 * h, tmp);
  axpy(P{a51, k1}, P{a52, k2}, P{a53, k3}, P{a54, k4});
  k5 = f(t + c5 * h, tmp);
  axpy(P{a61, k1}, P{a62, k2}, P{a63, k3}, P{a64, k4}, P{a65, k5});
  k6 = f(t + h, tmp);

  StepResult<N> out;
  for (std::size_t i = 0; i < N; ++i) {
    out.y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                            b5 * k5[i] + b6 * k6[i]);
  }
  out.k_end = f(t + h, out.y5);
  for (std::size_t i = 0; i < N; ++i) {
    out.y4[i] = y[i] + h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                            e5 * k5[i] + e6 * k6[i] + e7 * out.k_end[i]);
  }
  return out;
}

struct StepControl {
  double rtol = 1e-10;
  double atol = 1e-14;
  double h_init = 1e-3;
  double h_min = 1e-14;
  double h_max = 0.25;
  double safety = 0.9;
  long max_steps = 2'000'000;
};

// Scaled RMS error norm of y5 - y4.
template <std::size_t N>
double error_norm(const State<N>& y, const StepResult<N>& s,
                  const StepControl& c) {
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double sc = c.atol + c.rtol * std::max(std::abs(y[i]), std::abs(s.y5[i]));
    double e = (s.y5[i] - s.y4[i]) / sc;
    acc += e * e;
  }
  return std::sqrt(acc / N);
}

// What the per-step observer tells the driver.
enum class Flow { proceed, stop };

// Adaptive driver.  After every accepted step it calls
//   observer(t, y, k)  ->  Flow
// with k = f(t, y).  The observer is also called once with the initial
// state.  Returns the number of accepted steps.
//
// If `stop_fn` is provided, integration stops exactly (to tolerance) at
// the first root of stop_fn(t, y) crossing from negative to positive:
// the driver locates the crossing by a secant/bisection search on the
// partial step length, so the final state lies on the numerical
// trajectory.  The observer receives the final point.
template <std::size_t N, class RHS, class Observer>
long integrate_adaptive(
    const RHS& f, double t, State<N> y, const StepControl& c,
    Observer&& observer,
    const std::function<double(double, const State<N>&)>& stop_fn = nullptr) {
  State<N> k1 = f(t, y);
  if (observer(t, y, k1) == Flow::stop) return 0;
  double g_prev = stop_fn ? stop_fn(t, y) : -1.0;
  if (stop_fn && g_prev >= 0.0) return 0;

  double h = c.h_init;
  long accepted = 0;
  for (long it = 0; it < c.max_steps; ++it) {
    h = std::clamp(h, c.h_min, c.h_max);
    StepResult<N> s = dp_step(f, t, y, h, k1);
    double err = error_norm(y, s, c);
    bool finite = std::isfinite(err);
    if (finite && err <= 1.0) {
      // Accepted.  Check the stop functional first.
      if (stop_fn) {
        double g_new = stop_fn(t + h, s.y5);
        if (g_new >= 0.0) {
          // Root in (t, t+h]: secant on the partial step length, with a
          // bisection forced every other iteration so the bracket shrinks
          // even when one side of the functional is nearly flat (as happens
          // when stop_fn is a max of terms on different scales).
          double lo = 0.0, hi = h, glo = g_prev, ghi = g_new;
          double hs = hi;
          StepResult<N> sub = s;
          for (int k = 0; k < 80 && (hi - lo) > 1e-15 * h; ++k) {
            double mid = 0.5 * (lo + hi);
            if (k % 2 == 0) {
              double sec = hi - ghi * (hi - lo) / (ghi - glo);
              if (sec > lo && sec < hi) mid = sec;
            }
            sub = dp_step(f, t, y, mid, k1);
            double gm = stop_fn(t + mid, sub.y5);
            if (gm >= 0.0) { hi = mid; ghi = gm; } else { lo = mid; glo = gm; }
            hs = hi;
            if (std::abs(gm) < 1e-15) {
              hs = mid;  // land here even if gm is a hair below zero
              break;
            }
          }
          sub = dp_step(f, t, y, hs, k1);
          t += hs;
          y = sub.y5;
          observer(t, y, sub.k_end);
          return accepted + 1;
        }
        g_prev = g_new;
      }
      t += h;
      y = s.y5;
      k1 = s.k_end;  // FSAL
      ++accepted;
      if (observer(t, y, k1) == Flow::stop) return accepted;
      double grow = err > 0.0 ? c.safety * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(grow, 0.2, 5.0);
    } else {
      if (h <= c.h_min * (1.0 + 1e-12)) {
        throw std::runtime_error("integrate_adaptive: step size underflow");
      }
      double shrink = finite ? std::max(0.1, c.safety * std::pow(err, -0.2)) : 0.1;
      h *= shrink;
    }
  }
  throw std::runtime_error("integrate_adaptive: max step count exceeded");
}

// Fixed-step driver propagating the embedded *fourth*-order member, for
// convergence-order studies.  Integrates from t0 to t1 in n equal steps.
template <std::size_t N, class RHS>
State<N> integrate_fixed_order4(const RHS& f, double t0, State<N> y, double t1,
                                long n) {
  if (n <= 0) throw std::invalid_argument("integrate_fixed_order4: n > 0");
  double h = (t1 - t0) / static_cast<double>(n);
  for (long i = 0; i < n; ++i) {
    double t = t0 + static_cast<double>(i) * h;
    State<N> k1 = f(t, y);
    y = dp_step(f, t, y, h, k1).y4;
  }
  return y;
}

}  // namespace steinerflow::ode

#endif  // STEINERFLOW_ODE_HPP_
