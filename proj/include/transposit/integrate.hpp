#pragma once

#include <string>
#include <vector>

#include "transposit/dynamics.hpp"
#include "transposit/errors.hpp"
#include "transposit/model.hpp"

namespace transposit {

struct IntegratorConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    bool project = true;
    double projection_tol = 1e-12;
    int projection_max_iter = 5;
    SolveOptions solve;
    std::vector<Monitor> monitors;
};

/// Config carrying the model's own monitors.
IntegratorConfig default_config(const MechModel& model);

/// Number of fixed steps covering [t0, t_end].
long step_count(double t0, double t_end, double dt);

struct Sample {
    double t = 0.0;
    Vec x, v;
    Vec mult;       ///< μ / λ̇ / λ̃̇, or λ itself for vakonomic runs
    Vec residuals;  ///< L_1..L_M
    double detW = 0.0;
    double detG = 0.0;
    Vec monitors;
};

struct Event {
    double t = 0.0;
    ErrorKind kind = ErrorKind::DomainError;
    std::string message;
};

struct Trajectory {
    Formulation formulation = Formulation::DAlembert;
    std::vector<std::string> monitor_names;
    std::vector<Sample> samples;
    std::vector<Event> events;
    bool completed = true;
};

Trajectory integrate(const MechModel& model, Formulation f, const DynState& init, const IntegratorConfig& cfg);

/// Minimum-norm Newton correction of v onto L(t, x, v) = 0. Throws ProjectionFailed.
DynState project_velocities(const MechModel& model, const DynState& s, double tol = 1e-12, int max_iter = 5);

struct MonitorDrift {
    std::string name;
    double drift = 0.0;
};

std::vector<MonitorDrift> monitor_first_integrals(const Trajectory& traj);

}  // namespace transposit
