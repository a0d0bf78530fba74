#include "extruder/observer.hpp"

#include <cmath>
#include <sstream>

#include "extruder/analysis.hpp"
#include "extruder/errors.hpp"

namespace extruder {

double observer_gain(const PlantModel& pm) { return pm.p.b / (2.0 * pm.d.alpha_s); }

std::vector<double> observer_rhs(const ObserverState& obs, const Measurements& meas, double q_f,
                                 double s_dot, const PlantModel& pm) {
  const double len = obs.That.s;
  if (!(len > pm.s_min)) {
    std::ostringstream os;
    os << "observer domain degenerate: Y1=" << len << " <= s_min=" << pm.s_min;
    throw DegenerateDomainError(os.str());
  }
  const double gamma = observer_gain(pm);
  const double inlet = -q_f / pm.m.k_s - gamma * (meas.Y2 - obs.That.T.front());
  std::vector<double> out(obs.That.T.size());
  solid_frame_rhs(obs.That.T, len, s_dot, inlet, pm.d.alpha_s, pm.d.h_s, pm.p.T_b, pm.p.b, out);
  return out;
}

ObserverState default_observer_initial(const PlantState& plant, double offset) {
  ObserverState obs;
  obs.t = plant.t;
  obs.That = plant.Ts;
  const std::size_t n = obs.That.T.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = static_cast<double>(i) / static_cast<double>(n - 1);
    obs.That.T[i] -= offset * (1.0 - xi);
  }
  return obs;
}

ErrorNorms estimation_error_norms(const PlantState& plant, const ObserverState& obs) {
  const std::size_t n = plant.Ts.T.size();
  if (obs.That.T.size() != n) {
    throw GridError("observer and plant solid grids have different node counts");
  }
  const double cell = plant.s / static_cast<double>(n - 1);
  if (std::fabs(obs.That.s - plant.s) > cell * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "observer domain " << obs.That.s << " and plant domain " << plant.s
       << " differ by more than one cell";
    throw GridError(os.str());
  }
  const SolidProfile est =
      obs.That.s == plant.s ? obs.That : resample_profile(obs.That, plant.s);
  std::vector<double> err(n);
  for (std::size_t i = 0; i < n; ++i) err[i] = plant.Ts.T[i] - est.T[i];
  const PiecewiseLinearNorms nr = piecewise_linear_norms(err, plant.s);
  return {nr.L2, nr.H1};
}

}  // namespace extruder
