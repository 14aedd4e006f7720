#pragma once

// Corridor geometry. The moving corridor at time s is
//   [lower(s) + beta W_s, upper(s) + beta W_s]
// where lower/upper are constant (constant band), scaled by horizon^alpha
// (small-deviation band) or given by f(s/T), g(s/T) (functional band).

#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>

#include "qcorr/errors.hpp"
#include "qcorr/format.hpp"
#include "qcorr/kernels.hpp"

namespace qcorr {

enum class CorridorKind { constant_band, scaled_band, functional };

struct Window {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Window&) const = default;
};

class Corridor {
 public:
  using Boundary = std::function<double(double)>;

  /// Constant band [a,b] with start window [a0,b0] and terminal window [a1,b1].
  static Corridor constant(double a, double b, Window start, Window terminal, double beta) {
    require(a < start.lo && start.lo <= start.hi && start.hi < b && a <= terminal.lo && terminal.lo < terminal.hi &&
                terminal.hi <= b,
            "corridor violates the basic relationship a < a0 <= b0 < b, a <= a' < b' <= b");
    Corridor c;
    c.kind_ = CorridorKind::constant_band;
    c.a_ = a;
    c.b_ = b;
    c.start_ = start;
    c.terminal_ = terminal;
    c.beta_ = beta;
    return c;
  }

  /// Constant band with the start window collapsed to the midpoint and terminal window = band.
  static Corridor band(double a, double b, double beta) {
    require(a < b, "corridor band requires a < b");
    const double mid = 0.5 * (a + b);
    return constant(a, b, {mid, mid}, {a, b}, beta);
  }

  /// Band [a T^alpha, b T^alpha] at horizon T; windows scale the same way.
  static Corridor scaled(double alpha, double a, double b, Window start, Window terminal, double beta) {
    require(alpha > 0.0 && alpha < 0.5, "alpha must lie in (0,1/2) for the small-deviation scaling");
    Corridor c = constant(a, b, start, terminal, beta);
    c.kind_ = CorridorKind::scaled_band;
    c.alpha_ = alpha;
    return c;
  }

  /// Band [f(s/T), g(s/T)] at horizon T. f < g is checked on a 1001-point grid of [0,1].
  static Corridor functional(Boundary f, Boundary g, Window start, Window terminal, double beta,
                             std::string label = "f,g") {
    require(static_cast<bool>(f) && static_cast<bool>(g), "functional corridor needs both boundaries");
    for (int i = 0; i <= 1000; ++i) {
      const double s = i / 1000.0;
      require(f(s) < g(s), "functional corridor requires f(s) < g(s) on [0,1]");
    }
    require(f(0.0) < start.lo && start.lo <= start.hi && start.hi < g(0.0),
            "functional corridor requires f(0) < a0 <= b0 < g(0)");
    require(f(1.0) <= terminal.lo && terminal.lo < terminal.hi && terminal.hi <= g(1.0),
            "functional corridor requires f(1) <= a' < b' <= g(1)");
    Corridor c;
    c.kind_ = CorridorKind::functional;
    c.f_ = std::move(f);
    c.g_ = std::move(g);
    c.a_ = c.f_(0.0);
    c.b_ = c.g_(0.0);
    c.start_ = start;
    c.terminal_ = terminal;
    c.beta_ = beta;
    c.label_ = std::move(label);
    return c;
  }

  CorridorKind kind() const noexcept { return kind_; }
  double beta() const noexcept { return beta_; }
  double alpha() const noexcept { return alpha_; }
  Window start_window() const noexcept { return scale_window(start_, 0.0); }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

  /// Whether the static band depends on the time coordinate.
  bool time_varying() const noexcept { return kind_ == CorridorKind::functional; }

  double lower(double s, double horizon) const {
    switch (kind_) {
      case CorridorKind::constant_band: return a_;
      case CorridorKind::scaled_band: return a_ * std::pow(horizon, alpha_);
      case CorridorKind::functional: return f_(s / horizon);
    }
    return a_;
  }
  double upper(double s, double horizon) const {
    switch (kind_) {
      case CorridorKind::constant_band: return b_;
      case CorridorKind::scaled_band: return b_ * std::pow(horizon, alpha_);
      case CorridorKind::functional: return g_(s / horizon);
    }
    return b_;
  }
  double mid(double s, double horizon) const { return 0.5 * (lower(s, horizon) + upper(s, horizon)); }
  double width(double s, double horizon) const { return upper(s, horizon) - lower(s, horizon); }

  Window start_window(double horizon) const { return scale_window(start_, horizon); }
  Window terminal_window(double horizon) const { return scale_window(terminal_, horizon); }

  Corridor with_beta(double beta) const {
    Corridor c = *this;
    c.beta_ = beta;
    return c;
  }
  Corridor with_windows(Window start, Window terminal) const {
    if (kind_ == CorridorKind::functional)
      return functional(f_, g_, start, terminal, beta_, label_);
    if (kind_ == CorridorKind::scaled_band) return scaled(alpha_, a_, b_, start, terminal, beta_);
    return constant(a_, b_, start, terminal, beta_);
  }
  /// Translates every boundary and window by c.
  Corridor shifted(double c) const {
    Window s{start_.lo + c, start_.hi + c};
    Window t{terminal_.lo + c, terminal_.hi + c};
    if (kind_ == CorridorKind::functional) {
      auto f = f_;
      auto g = g_;
      return functional([f, c](double u) { return f(u) + c; }, [g, c](double u) { return g(u) + c; }, s, t, beta_,
                        label_ + "+" + exact(c));
    }
    if (kind_ == CorridorKind::scaled_band) return scaled(alpha_, a_ + c, b_ + c, s, t, beta_);
    return constant(a_ + c, b_ + c, s, t, beta_);
  }

  /// Human-readable description; stable across runs.
  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case CorridorKind::constant_band: os << "constant[" << exact(a_) << "," << exact(b_) << "]"; break;
      case CorridorKind::scaled_band:
        os << "scaled(alpha=" << exact(alpha_) << ")[" << exact(a_) << "," << exact(b_) << "]";
        break;
      case CorridorKind::functional: os << "functional(" << label_ << ")"; break;
    }
    os << " start[" << exact(start_.lo) << "," << exact(start_.hi) << "] terminal[" << exact(terminal_.lo) << ","
       << exact(terminal_.hi) << "] beta=" << exact(beta_);
    return os.str();
  }

  /// FNV-1a hash of describe(), hex encoded.
  std::string id() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : describe()) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
  }

 private:
  Window scale_window(Window w, double horizon) const {
    if (kind_ != CorridorKind::scaled_band || horizon <= 0.0) return w;
    const double s = std::pow(horizon, alpha_);
    return {w.lo * s, w.hi * s};
  }

  CorridorKind kind_ = CorridorKind::constant_band;
  double a_ = 0.0;
  double b_ = 1.0;
  double alpha_ = 0.0;
  Boundary f_;
  Boundary g_;
  Window start_{0.5, 0.5};
  Window terminal_{0.0, 1.0};
  double beta_ = 0.0;
  std::string label_;
};

}  // namespace qcorr
