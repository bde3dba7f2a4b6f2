#include "delaycert/dde.hpp"

#include "delaycert/error.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace delaycert {

void DelayFunction::validate() const
{
    if (!std::isfinite(h0) || !std::isfinite(amplitude) || !std::isfinite(frequency))
        throw Error(ErrorCode::InvalidParams, "delay parameters must be finite");
    if (h0 < std::abs(amplitude)) throw Error(ErrorCode::InvalidParams, "delay would become negative");
}

Eigen::VectorXd activation(const NetworkModel& model, const Eigen::VectorXd& z)
{
    return model.L.cwiseProduct(z.array().tanh().matrix());
}

namespace {

class History {
public:
    History(const Eigen::VectorXd& z0, double dt) : z0_(z0), dt_(dt) {}

    void push(const Eigen::VectorXd& z, const Eigen::VectorXd& dz)
    {
        z_.push_back(z);
        dz_.push_back(dz);
    }

    // z(tau) for tau <= last stored time
    [[nodiscard]] Eigen::VectorXd at(double tau) const
    {
        if (tau <= 0.0) return z0_;
        const double pos = tau / dt_;
        auto i = static_cast<std::size_t>(std::floor(pos));
        if (i + 1 >= z_.size()) {
            if (i + 1 == z_.size() && pos - static_cast<double>(i) < 1e-9) return z_.back();
            throw Error(ErrorCode::StepTooLarge, "delayed lookup beyond the stored history");
        }
        const double s = pos - static_cast<double>(i);
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        return h00 * z_[i] + (h10 * dt_) * dz_[i] + h01 * z_[i + 1] + (h11 * dt_) * dz_[i + 1];
    }

private:
    Eigen::VectorXd z0_;
    double dt_;
    std::vector<Eigen::VectorXd> z_, dz_;
};

} // namespace

Trajectory simulate(const NetworkModel& model, const DelayFunction& delay, const Eigen::VectorXd& z0, double t_end,
                    double dt)
{
    model.validate();
    delay.validate();
    const Eigen::Index n = model.dimension();
    if (z0.size() != n) throw Error(ErrorCode::DimensionMismatch, "initial state has the wrong length");
    if (!(dt > 0.0) || !(t_end > 0.0)) throw Error(ErrorCode::InvalidParams, "dt and t_end must be positive");
    if (dt > delay.min() / 4.0)
        throw Error(ErrorCode::StepTooLarge, "dt exceeds a quarter of the smallest delay");

    Trajectory traj;
    traj.model = model;
    traj.delay = delay;
    traj.z0 = z0;
    traj.dt = dt;

    History hist(z0, dt);
    auto rhs = [&](double t, const Eigen::VectorXd& z) -> Eigen::VectorXd {
        const Eigen::VectorXd zd = hist.at(t - delay(t));
        return -model.C * z + model.A * activation(model, z) + model.B * activation(model, zd);
    };

    const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
    traj.t.reserve(steps + 1);
    traj.z.reserve(steps + 1);

    Eigen::VectorXd z = z0;
    // the derivative at t = 0 only needs the constant history
    Eigen::VectorXd dz = rhs(0.0, z);
    hist.push(z, dz);
    traj.t.push_back(0.0);
    traj.z.push_back(z);

    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) * dt;
        const Eigen::VectorXd k1 = dz;
        const Eigen::VectorXd k2 = rhs(t + 0.5 * dt, z + 0.5 * dt * k1);
        const Eigen::VectorXd k3 = rhs(t + 0.5 * dt, z + 0.5 * dt * k2);
        const Eigen::VectorXd k4 = rhs(t + dt, z + dt * k3);
        z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!z.allFinite()) throw Error(ErrorCode::NonFinite, "state overflow at t = " + std::to_string(t + dt));
        const double t_next = static_cast<double>(s + 1) * dt;
        // t_next - h(t_next) is at least 4 dt back, so the history already covers it
        dz = rhs(t_next, z);
        hist.push(z, dz);
        traj.t.push_back(t_next);
        traj.z.push_back(z);
    }
    return traj;
}

double estimate_decay_rate(const Trajectory& traj, double t_start, double t_end)
{
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.t[i];
        if (t < t_start || t > t_end) continue;
        const double nz = traj.z[i].norm();
        if (!(nz > 0.0)) throw Error(ErrorCode::DegenerateWindow, "zero state inside the window");
        const double y = -std::log(nz);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++count;
    }
    if (count < 10) throw Error(ErrorCode::DegenerateWindow, "fewer than 10 samples in the window");
    const double c = static_cast<double>(count);
    const double denom = c * stt - st * st;
    if (!(denom > 0.0)) throw Error(ErrorCode::DegenerateWindow, "window has no time spread");
    return (c * sty - st * sy) / denom;
}

EnvelopeCheck check_envelope(const Trajectory& traj, double H, double k)
{
    if (!(H >= 1.0) || !(k > 0.0)) throw Error(ErrorCode::InvalidParams, "envelope needs H >= 1 and k > 0");
    EnvelopeCheck check;
    check.H = H;
    check.k = k;
    check.phi_norm = traj.z0.norm(); // constant history
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double nz = traj.z[i].norm();
        const double bound = H * check.phi_norm * std::exp(-k * traj.t[i]);
        if (bound > 0.0) check.worst_ratio = std::max(check.worst_ratio, nz / bound);
        if (nz > bound) check.violations.push_back(traj.t[i]);
    }
    return check;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    const Eigen::Index n = traj.z0.size();
    out << "t";
    for (Eigen::Index j = 0; j < n; ++j) out << ",z_" << (j + 1);
    out << ",norm,h\n";
    char buf[64];
    for (std::size_t i = 0; i < traj.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f", traj.t[i]);
        out << buf;
        for (Eigen::Index j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, ",%.12e", traj.z[i](j));
            out << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.12e,%.9f\n", traj.z[i].norm(), traj.delay(traj.t[i]));
        out << buf;
    }
}

} // namespace delaycert
