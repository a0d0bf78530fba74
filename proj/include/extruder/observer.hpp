#pragma once

#include <vector>

#include "extruder/mesh.hpp"
#include "extruder/plant.hpp"

namespace extruder {

// Copy of the solid phase on the measured domain (0, Y1), corrected at the
// inlet by the temperature measurement.
struct ObserverState {
  SolidProfile That;  // That.s is the observer's domain length
  double t = 0.0;
};

/// Nodal time derivative of the estimate. The inlet condition is
///   That_x(0) = -q_f / k_s - gamma (Y2 - That(0)),  gamma = b / (2 alpha_s),
/// and the domain moves with `s_dot`.
std::vector<double> observer_rhs(const ObserverState& obs, const Measurements& meas, double q_f,
                                 double s_dot, const PlantModel& pm);

/// Output injection gain b / (2 alpha_s).
double observer_gain(const PlantModel& pm);

/// Plant initial solid minus offset * (1 - xi): an under-estimate that still
/// meets the interface at T_m.
ObserverState default_observer_initial(const PlantState& plant, double offset);

struct ErrorNorms {
  double L2 = 0.0;
  double H1 = 0.0;
};

/// Norms of T_s - That over the plant solid domain. The estimate is
/// resampled when its domain differs from the plant's; a mismatch of more
/// than one cell is a GridError.
ErrorNorms estimation_error_norms(const PlantState& plant, const ObserverState& obs);

}  // namespace extruder
