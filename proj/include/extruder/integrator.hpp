#pragma once

#include <memory>
#include <span>
#include <vector>

namespace extruder {

struct StepControl {
  double abs_tol = 1e-8;
  double rel_tol = 1e-6;
  double dt_init = 1e-4;
  double dt_min = 1e-12;
  double dt_max = 1.0;

  /// Throws ConfigError unless 0 < dt_min <= dt_init <= dt_max and tolerances > 0.
  void validate() const;
};

/// ODE system y' = f(t, y, u) driven by a scalar boundary input u. When the
/// input is state feedback u = k(t, y), the integrator differentiates through
/// it as a rank-one Jacobian term so the loop is treated implicitly.
class StiffSystem {
 public:
  virtual ~StiffSystem() = default;

  virtual int size() const = 0;
  virtual void rhs(double t, std::span<const double> y, double u,
                   std::span<double> dydt) const = 0;

  virtual double input(double /*t*/, std::span<const double> /*y*/) const { return 0.0; }
  virtual bool input_is_state_feedback() const { return false; }
  virtual bool autonomous() const { return true; }

  /// For each column j, the rows of df/dy (input held) that can be nonzero.
  /// The default is dense.
  virtual std::vector<std::vector<int>> jacobian_pattern() const;

  /// Magnitude below which a component is perturbed absolutely when forming
  /// finite-difference Jacobians. Default 1 for every component.
  virtual std::vector<double> typical_scale() const;
};

struct StepOutcome {
  double t = 0.0;        // time reached
  double dt = 0.0;       // accepted step
  double dt_next = 0.0;  // proposal for the next step
  double err = 0.0;      // scaled error estimate of the accepted step (<= 1)
  int rejections = 0;    // retries before acceptance
};

struct IntegratorStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  long jacobians = 0;
};

/// Two-stage linearly implicit Rosenbrock (W-)method of order 2 with a
/// third-order embedded error estimate (the Shampine-Reichelt pair). L-stable.
class RosenbrockStepper {
 public:
  RosenbrockStepper(const StiffSystem& sys, StepControl ctl);
  ~RosenbrockStepper();
  RosenbrockStepper(const RosenbrockStepper&) = delete;
  RosenbrockStepper& operator=(const RosenbrockStepper&) = delete;

  /// One accepted step from (t, y), never past t_stop. Rejected attempts are
  /// retried with at least halved dt. Throws SolverError when dt would drop
  /// below dt_min.
  StepOutcome step(double t, std::vector<double>& y, double t_stop);

  /// Fixed step without error control (convergence studies).
  void fixed_step(double t, std::vector<double>& y, double dt);

  /// Integrate to t_end with error control; returns the final time.
  double integrate(double t0, std::vector<double>& y, double t_end);

  double proposed_dt() const { return dt_; }
  void set_proposed_dt(double dt) { dt_ = dt; }
  const StepControl& control() const { return ctl_; }
  const IntegratorStats& stats() const { return stats_; }

 private:
  struct Impl;
  const StiffSystem& sys_;
  StepControl ctl_;
  double dt_;
  IntegratorStats stats_;
  std::unique_ptr<Impl> impl_;

  // Returns the scaled error estimate; fills y_new.
  double attempt(double t, const std::vector<double>& y, double h, std::vector<double>& y_new);
};

}  // namespace extruder
