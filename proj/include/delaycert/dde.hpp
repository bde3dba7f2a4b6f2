#pragma once

// Explicit RK4 integration of the delayed network with a constant initial
// history and Hermite interpolation of the stored trajectory.

#include "delaycert/model.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <iosfwd>
#include <vector>

namespace delaycert {

/// h(t) = h0 + amplitude sin(frequency t)
struct DelayFunction {
    double h0 = 1.0;
    double amplitude = 0.0;
    double frequency = 0.0;

    [[nodiscard]] double operator()(double t) const { return h0 + amplitude * std::sin(frequency * t); }
    [[nodiscard]] double max() const { return h0 + std::abs(amplitude); }
    [[nodiscard]] double min() const { return h0 - std::abs(amplitude); }
    [[nodiscard]] double max_rate() const { return std::abs(amplitude * frequency); }

    /// Throws InvalidParams unless h0 >= |amplitude|.
    void validate() const;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Eigen::VectorXd> z;
    NetworkModel model;
    DelayFunction delay;
    Eigen::VectorXd z0;
    double dt = 0.0;

    [[nodiscard]] std::size_t size() const { return t.size(); }
};

/// f_j(s) = L_j tanh(s)
Eigen::VectorXd activation(const NetworkModel& model, const Eigen::VectorXd& z);

/// Throws StepTooLarge if dt > min_t h(t) / 4, NonFinite if the state blows up.
Trajectory simulate(const NetworkModel& model, const DelayFunction& delay, const Eigen::VectorXd& z0, double t_end,
                    double dt);

/// Least-squares slope of -log||z|| over samples with t in [t_start, t_end].
double estimate_decay_rate(const Trajectory& traj, double t_start, double t_end);

struct EnvelopeCheck {
    double H = 1.0;
    double k = 0.0;
    double phi_norm = 0.0;
    std::vector<double> violations; ///< sample times where ||z|| > H ||phi|| e^{-kt}
    double worst_ratio = 0.0;       ///< max ||z|| / (H ||phi|| e^{-kt})

    [[nodiscard]] bool pass() const { return violations.empty(); }
};

EnvelopeCheck check_envelope(const Trajectory& traj, double H, double k);

/// Columns t, z_1..z_n, norm, h.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

} // namespace delaycert
