// Parametric accuracy curves a(m) = max(0, b(m)), where b is continuous,
// non-decreasing and concave on its domain, a(0) = 0 and a has a positive
// limit. Three families are provided:
//
//   SimpleBound  b(m) = a_opt - 2*sqrt(k/m)
//   FullBound    b(m) = a_opt - (sqrt(2k(2 + ln(m/k))) + 4) / sqrt(m)
//   PowerLaw     b(m) = 1 - beta/m^alpha - tau
//
// Dataset sizes are continuous non-negative reals. All operations are pure;
// models are immutable value types and safe to share across threads.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "incmech/roots.hpp"

namespace incmech {

enum class AccuracyKind { SimpleBound, FullBound, PowerLaw };

// Result of inverting the marginal-accuracy curve b'. Either a finite dataset
// size, or NoFiniteRoot when the slope never descends to the requested value
// (the clamps in the two-type schedule rely on distinguishing this case).
struct InverseSlope {
  enum class Root { Finite, NoFiniteRoot };

  Root tag{Root::NoFiniteRoot};
  double m{0.0};  // meaningful only when tag == Finite

  static InverseSlope at(double value) { return {Root::Finite, value}; }
  static InverseSlope no_finite_root() { return {}; }
  bool finite() const { return tag == Root::Finite; }
};

struct AccuracyModel {
  AccuracyKind kind{AccuracyKind::SimpleBound};
  double a_opt{0.95};  // accuracy limit, in (0, 1]         (bound models)
  double k{1.0};       // problem complexity, >= 1           (bound models)
  double beta{1.0};    // scale, > 0                         (power law)
  double alpha{1.0};   // exponent, in (0, 1]                (power law)
  double tau{0.0};     // regulatory threshold, in [0, 1)    (power law)

  static AccuracyModel simple_bound(double a_opt, double k) {
    AccuracyModel m{AccuracyKind::SimpleBound};
    m.a_opt = a_opt;
    m.k = k;
    m.validate();
    return m;
  }
  static AccuracyModel full_bound(double a_opt, double k) {
    AccuracyModel m{AccuracyKind::FullBound};
    m.a_opt = a_opt;
    m.k = k;
    m.validate();
    return m;
  }
  static AccuracyModel power_law(double beta, double alpha, double tau) {
    AccuracyModel m{AccuracyKind::PowerLaw};
    m.beta = beta;
    m.alpha = alpha;
    m.tau = tau;
    m.validate();
    return m;
  }

  void validate() const {
    switch (kind) {
      case AccuracyKind::SimpleBound:
      case AccuracyKind::FullBound:
        if (!(a_opt > 0.0) || !(a_opt <= 1.0))
          throw std::invalid_argument("accuracy: a_opt must be in (0, 1]");
        if (!(k >= 1.0) || !std::isfinite(k))
          throw std::invalid_argument("accuracy: k must be >= 1");
        break;
      case AccuracyKind::PowerLaw:
        if (!(beta > 0.0) || !std::isfinite(beta))
          throw std::invalid_argument("accuracy: beta must be > 0");
        if (!(alpha > 0.0) || !(alpha <= 1.0))
          throw std::invalid_argument("accuracy: alpha must be in (0, 1]");
        if (!(tau >= 0.0) || !(tau < 1.0))
          throw std::invalid_argument("accuracy: tau must be in [0, 1)");
        break;
    }
  }

  // lim_{m -> inf} a(m); positive for every valid model.
  double limit() const {
    return kind == AccuracyKind::PowerLaw ? 1.0 - tau : a_opt;
  }

  // Lower end of the declared concavity domain. FullBound is only concave
  // for m >= 1; evaluation below it clamps to zero.
  double domain_lo() const {
    return kind == AccuracyKind::FullBound ? 1.0 : 0.0;
  }

  // Un-clamped b(m). Throws outside the domain.
  double raw(double m) const {
    if (!(m > 0.0)) throw std::domain_error("accuracy: raw requires m > 0");
    if (kind == AccuracyKind::FullBound && m < 1.0)
      throw std::domain_error("accuracy: FullBound raw requires m >= 1");
    return raw_unchecked(m);
  }

  // a(m) = max(0, b(m)); zero at m = 0 and below the concavity domain.
  double eval(double m) const {
    if (!(m >= 0.0)) throw std::domain_error("accuracy: eval requires m >= 0");
    if (m <= domain_lo()) {
      if (m == 0.0 || kind == AccuracyKind::FullBound) return 0.0;
    }
    const double b = raw_unchecked(m);
    return b > 0.0 ? b : 0.0;
  }

  // Marginal accuracy b'(m).
  double slope(double m) const {
    if (!(m > 0.0)) throw std::domain_error("accuracy: slope requires m > 0");
    switch (kind) {
      case AccuracyKind::SimpleBound:
        return std::sqrt(k) * std::pow(m, -1.5);
      case AccuracyKind::PowerLaw:
        return alpha * beta * std::pow(m, -alpha - 1.0);
      case AccuracyKind::FullBound: {
        if (m < 1.0)
          throw std::domain_error("accuracy: FullBound slope requires m >= 1");
        const double log_term = 2.0 + std::log(m / k);
        if (log_term <= 0.0) return 2.0 * std::pow(m, -1.5);
        const double s = std::sqrt(2.0 * k * log_term);
        return std::pow(m, -1.5) * (0.5 * (s + 4.0) - k / s);
      }
    }
    return 0.0;
  }

  // Largest m with a(m) = 0, i.e. the zero of b. Located by bracketed
  // bisection; the closed forms (where they exist) only seed the bracket.
  double min_viable_dataset() const {
    double lo = 0.0, hi = 0.0;
    switch (kind) {
      case AccuracyKind::SimpleBound: {
        const double root = 4.0 * k / (a_opt * a_opt);
        lo = 0.5 * root;
        hi = 2.0 * root;
        break;
      }
      case AccuracyKind::PowerLaw: {
        const double root = std::pow(beta / (1.0 - tau), 1.0 / alpha);
        lo = 0.5 * root;
        hi = 2.0 * root;
        break;
      }
      case AccuracyKind::FullBound: {
        // b(k) = a_opt - 2 - 4/sqrt(k) < 0, and b is increasing beyond k.
        lo = std::max(1.0, k);
        hi = expand_up(2.0 * lo, [&](double h) { return raw_unchecked(h) > 0.0; });
        break;
      }
    }
    if (raw_unchecked(lo) >= 0.0) return std::max(lo, domain_lo());
    return bisect([&](double m) { return raw_unchecked(m); }, lo, hi);
  }

  // Solve b'(m) = s on the slope-decreasing region. Returns NoFiniteRoot for
  // s <= 0 (the slope is positive everywhere); returns the lower endpoint of
  // the invertible region when s exceeds the slope supremum there.
  InverseSlope inverse_slope(double s) const {
    if (!(s > 0.0)) return InverseSlope::no_finite_root();
    const double m0 = min_viable_dataset();
    double lo = std::max(m0, 1e-12);
    if (slope(lo) < s) {
      // Target below the bracket start. SimpleBound and PowerLaw slopes grow
      // without bound as m -> 0; FullBound is only invertible above its zero.
      if (kind == AccuracyKind::FullBound) return InverseSlope::at(lo);
      double hi = lo;
      while (slope(lo) < s) {
        hi = lo;
        lo *= 0.5;
        if (lo < 1e-280) return InverseSlope::at(lo);
      }
      return InverseSlope::at(
          bisect([&](double m) { return slope(m) - s; }, lo, hi));
    }
    double hi = expand_up(2.0 * lo, [&](double h) { return slope(h) <= s; });
    return InverseSlope::at(
        bisect([&](double m) { return slope(m) - s; }, lo, hi));
  }

 private:
  double raw_unchecked(double m) const {
    switch (kind) {
      case AccuracyKind::SimpleBound:
        return a_opt - 2.0 * std::sqrt(k / m);
      case AccuracyKind::PowerLaw:
        return 1.0 - beta * std::pow(m, -alpha) - tau;
      case AccuracyKind::FullBound: {
        const double log_term = 2.0 + std::log(m / k);
        const double num =
            log_term > 0.0 ? std::sqrt(2.0 * k * log_term) + 4.0 : 4.0;
        return a_opt - num / std::sqrt(m);
      }
    }
    return 0.0;
  }
};

inline const char* to_string(AccuracyKind kind) {
  switch (kind) {
    case AccuracyKind::SimpleBound: return "simple";
    case AccuracyKind::FullBound: return "full";
    case AccuracyKind::PowerLaw: return "powerlaw";
  }
  return "?";
}

}  // namespace incmech
