#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ymh/system.hpp"

namespace ymh {

/// Complexified half-wave variables u_+, u_- for the eleven components
/// A_0..A_3, F_01..F_23, phi, kept in spectral representation.
struct HalfWaveState {
  static constexpr int kComponents = 11;
  static constexpr int A(int a) { return a; }
  static constexpr int F(int k) { return 4 + k; }
  static constexpr int kPhi = 10;

  std::array<Field, kComponents> plus;
  std::array<Field, kComponents> minus;
  double time = 0.0;

  HalfWaveState zeros_like() const;
  HalfWaveState& axpy(cplx a, const HalfWaveState& x);
  HalfWaveState& operator*=(cplx c);
  /// (sum over components and signs of |u_pm|_{H^s}^2)^{1/2}
  double norm(double s = 0.0) const;
  bool finite() const;
};

double halfwave_distance(const HalfWaveState& a, const HalfWaveState& b, double s);

/// u_pm = (u -+ i <grad>^{-1} d_t u) / 2 for every component.
HalfWaveState to_half_wave(const GaugeState& g, double time = 0.0);
/// u = u_+ + u_-, d_t u = i <grad> (u_+ - u_-).
GaugeState from_half_wave(const HalfWaveState& h);

enum class Integrator { ExpEuler, ExpRK4 };
/// Full: Lambda' = -A + Lambda etc. Linear: only the -u shift (massless
/// linear waves). Free: no forcing (Klein-Gordon flow).
enum class Dynamics { Full, Linear, Free };

struct EvolveConfig {
  double dt = 1e-3;
  double T = 0.5;
  Integrator integrator = Integrator::ExpRK4;
  int picard_depth = 0;
  void validate() const;
  /// Number of steps and the uniform step size covering [0, T].
  int steps() const;
  double step_size() const;
};

/// Raised when a step produces non-finite values.
class NanAbort : public std::runtime_error {
 public:
  explicit NanAbort(double last_valid_time);
  double last_valid_time() const { return last_; }

 private:
  double last_;
};

/// Exponential time stepper with the exact free flow e^{+-i t <grad>}.
class Stepper {
 public:
  Stepper(GridPtr grid, double p, Dynamics mode = Dynamics::Full);

  /// d_t u_pm minus the free part: +-i (2<grad>)^{-1} N'.
  HalfWaveState forcing(const HalfWaveState& u) const;
  /// Full derivative d_t u_pm = +-i <grad> u_pm + forcing.
  HalfWaveState rhs(const HalfWaveState& u) const;
  /// Multiplies u_pm by e^{+-i t <grad>}.
  void propagate(HalfWaveState& u, double t) const;

  HalfWaveState step(const HalfWaveState& u, double dt, Integrator integrator) const;

  double p() const { return p_; }
  Dynamics mode() const { return mode_; }

 private:
  GridPtr grid_;
  double p_;
  Dynamics mode_;
  std::vector<double> jap_;
};

/// Steps from h0 to T. The observer sees the initial state and every step.
/// Throws NanAbort on non-finite values.
HalfWaveState evolve(const HalfWaveState& h0, const Stepper& stepper, const EvolveConfig& cfg,
                     const std::function<void(const HalfWaveState&)>& observer = {});

struct PicardResult {
  std::vector<double> times;
  /// distances[k] = C^0_t H^s distance between iterates k+2 and k+1.
  std::vector<double> distances;
  bool diverged = false;
  std::vector<HalfWaveState> last;  ///< final iterate on the time grid
};

/// Duhamel iteration u^{k+1}(t) = E(t)(u0 + int_0^t E(-s) N(u^k(s)) ds) on
/// the uniform grid of `cfg`, cumulative Simpson quadrature. Depth 1 is the
/// free flow. Needs at least three steps.
PicardResult picard_iterate(const HalfWaveState& h0, const Stepper& stepper, const EvolveConfig& cfg,
                            int depth, double s_norm);

}  // namespace ymh
