// One-dimensional root bracketing and bisection helpers shared by the
// accuracy, mechanism and equilibrium solvers.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

namespace incmech {

inline constexpr double kRootRelTol = 1e-12;
inline constexpr int kRootMaxIter = 200;

// Bisect f on [lo, hi] assuming f(lo) and f(hi) have opposite (or zero) sign.
// Stops when the interval shrinks below rel_tol relative to its midpoint
// (plus a small absolute floor) or after max_iter halvings.
template <class F>
double bisect(F&& f, double lo, double hi, double rel_tol = kRootRelTol,
              int max_iter = kRootMaxIter) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  if (lo > hi) std::swap(lo, hi);
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel_tol * (std::abs(mid) + 1e-300)) return mid;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Expand hi = grow*hi until pred(hi) holds or the cap is reached.
// Returns the first hi satisfying pred, or the cap.
template <class Pred>
double expand_up(double hi, Pred&& pred, double grow = 2.0, double cap = 1e300) {
  while (hi < cap && !pred(hi)) hi = std::min(cap, hi * grow);
  return hi;
}

template <class Pred>
double expand_down(double lo, Pred&& pred, double shrink = 0.5,
                   double floor = 1e-300) {
  while (lo > floor && !pred(lo)) lo = std::max(floor, lo * shrink);
  return lo;
}

}  // namespace incmech
