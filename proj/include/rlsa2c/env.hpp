#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rlsa2c/core.hpp"
#include "rlsa2c/rng.hpp"

namespace rlsa2c {

enum class EnvId { CartpoleLite, Pointmass, Pixelgrid };

inline EnvId env_id_from_string(const std::string& s) {
    if (s == "cartpole_lite") return EnvId::CartpoleLite;
    if (s == "pointmass") return EnvId::Pointmass;
    if (s == "pixelgrid") return EnvId::Pixelgrid;
    throw std::invalid_argument("unknown env id: " + s);
}

inline std::string env_id_to_string(EnvId id) {
    switch (id) {
        case EnvId::CartpoleLite: return "cartpole_lite";
        case EnvId::Pointmass: return "pointmass";
        default: return "pixelgrid";
    }
}

struct StepResult {
    std::vector<double> next_obs;  // the raw next state, terminal when done
    double reward = 0.0;
    bool done = false;
};

/// Desk-scale environments. Dynamics constants are fixed here and recorded in
/// the trainer config snapshot for reproducibility.
///
///   cartpole_lite: classic cart-pole, Euler dt=0.02, +1 per step, terminal on
///                  |theta| > 12 deg, |x| > 2.4 or 500 steps; two force actions.
///   pointmass:     2-D double integrator, force clipped to [-1,1]^2, dt=0.1,
///                  reward -||pos||^2 (goal at origin), 200-step episodes.
///   pixelgrid:     agent on an 8x8 grid rendered as a 1x16x16 image in [0,1],
///                  4 moves, +1 at goal (terminal), -0.01 per step, cap 100.
class Env {
public:
    // cartpole constants
    static constexpr double kGravity = 9.8, kCartMass = 1.0, kPoleMass = 0.1, kPoleHalfLen = 0.5;
    static constexpr double kForceMag = 10.0, kDt = 0.02;
    static constexpr double kThetaLimit = 12.0 * 2.0 * M_PI / 360.0, kXLimit = 2.4;
    static constexpr std::size_t kCartpoleCap = 500;
    // pointmass constants
    static constexpr double kPmDt = 0.1, kPmStartRange = 0.5, kPmPosLimit = 2.0;
    static constexpr double kPmVelLimit = 1.0;
    static constexpr std::size_t kPointmassCap = 200;
    // pixelgrid constants
    static constexpr std::size_t kGridSize = 8, kImageSize = 16, kPixelgridCap = 100;
    static constexpr double kStepPenalty = -0.01;

    Env(EnvId id, std::uint64_t seed) : id_(id), rng_(seed) { reset(); }

    EnvId id() const { return id_; }
    bool discrete() const { return id_ != EnvId::Pointmass; }
    bool pixel() const { return id_ == EnvId::Pixelgrid; }

    std::size_t obs_dim() const {
        switch (id_) {
            case EnvId::CartpoleLite: return 4;
            case EnvId::Pointmass: return 4;
            default: return kImageSize * kImageSize;
        }
    }
    std::size_t n_actions() const { return id_ == EnvId::CartpoleLite ? 2 : 4; }
    std::size_t action_dim() const { return 2; }  // pointmass only

    const std::vector<double>& obs() const { return obs_; }

    std::vector<double> reset() {
        steps_ = 0;
        switch (id_) {
            case EnvId::CartpoleLite:
                state_.assign(4, 0.0);
                for (double& v : state_) v = rng_.uniform(-0.05, 0.05);
                break;
            case EnvId::Pointmass:
                state_ = {rng_.uniform(-kPmStartRange, kPmStartRange),
                          rng_.uniform(-kPmStartRange, kPmStartRange), 0.0, 0.0};
                break;
            case EnvId::Pixelgrid:
                ax_ = rng_.next_u64() % kGridSize;
                ay_ = rng_.next_u64() % kGridSize;
                do {
                    gx_ = rng_.next_u64() % kGridSize;
                    gy_ = rng_.next_u64() % kGridSize;
                } while (gx_ == ax_ && gy_ == ay_);
                break;
        }
        render();
        return obs_;
    }

    StepResult step_discrete(std::size_t action) {
        check(discrete(), "step_discrete on a continuous env");
        check(action < n_actions(), "invalid discrete action");
        return id_ == EnvId::CartpoleLite ? step_cartpole(action) : step_pixelgrid(action);
    }

    StepResult step_continuous(const std::vector<double>& action) {
        check(id_ == EnvId::Pointmass, "step_continuous on a discrete env");
        check(action.size() == action_dim(), "invalid continuous action size");
        ++steps_;
        const double ax = std::clamp(action[0], -1.0, 1.0);
        const double ay = std::clamp(action[1], -1.0, 1.0);
        state_[2] = std::clamp(state_[2] + ax * kPmDt, -kPmVelLimit, kPmVelLimit);
        state_[3] = std::clamp(state_[3] + ay * kPmDt, -kPmVelLimit, kPmVelLimit);
        // inelastic walls: clamp the position and kill the normal velocity so
        // the mass never stays pinned with a stale outward velocity
        for (int d = 0; d < 2; ++d) {
            const double p = state_[d] + state_[d + 2] * kPmDt;
            if (p <= -kPmPosLimit || p >= kPmPosLimit) {
                state_[d] = std::clamp(p, -kPmPosLimit, kPmPosLimit);
                state_[d + 2] = 0.0;
            } else {
                state_[d] = p;
            }
        }
        StepResult res;
        res.reward = -(state_[0] * state_[0] + state_[1] * state_[1]);
        res.done = steps_ >= kPointmassCap;
        render();
        res.next_obs = obs_;
        if (res.done) reset();
        return res;
    }

    Rng& rng() { return rng_; }
    std::size_t step_count() const { return steps_; }

    // serialization hooks (see checkpoint.hpp)
    std::vector<double>& raw_state() { return state_; }
    std::size_t& raw_steps() { return steps_; }
    std::size_t& raw_ax() { return ax_; }
    std::size_t& raw_ay() { return ay_; }
    std::size_t& raw_gx() { return gx_; }
    std::size_t& raw_gy() { return gy_; }
    void rerender() { render(); }

private:
    StepResult step_cartpole(std::size_t action) {
        ++steps_;
        double x = state_[0], xdot = state_[1], theta = state_[2], thetadot = state_[3];
        const double force = action == 1 ? kForceMag : -kForceMag;
        const double total_mass = kCartMass + kPoleMass;
        const double pole_ml = kPoleMass * kPoleHalfLen;
        const double cos_t = std::cos(theta), sin_t = std::sin(theta);
        const double temp = (force + pole_ml * thetadot * thetadot * sin_t) / total_mass;
        const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                                 (kPoleHalfLen * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total_mass));
        const double x_acc = temp - pole_ml * theta_acc * cos_t / total_mass;
        x += kDt * xdot;
        xdot += kDt * x_acc;
        theta += kDt * thetadot;
        thetadot += kDt * theta_acc;
        state_ = {x, xdot, theta, thetadot};
        StepResult res;
        res.reward = 1.0;
        res.done = std::abs(x) > kXLimit || std::abs(theta) > kThetaLimit || steps_ >= kCartpoleCap;
        render();
        res.next_obs = obs_;
        if (res.done) reset();
        return res;
    }

    StepResult step_pixelgrid(std::size_t action) {
        ++steps_;
        const long dx[4] = {0, 0, -1, 1};
        const long dy[4] = {-1, 1, 0, 0};
        const long nx = std::clamp<long>(long(ax_) + dx[action], 0, long(kGridSize) - 1);
        const long ny = std::clamp<long>(long(ay_) + dy[action], 0, long(kGridSize) - 1);
        ax_ = std::size_t(nx);
        ay_ = std::size_t(ny);
        StepResult res;
        const bool at_goal = ax_ == gx_ && ay_ == gy_;
        res.reward = at_goal ? 1.0 : kStepPenalty;
        res.done = at_goal || steps_ >= kPixelgridCap;
        render();
        res.next_obs = obs_;
        if (res.done) reset();
        return res;
    }

    void render() {
        if (id_ != EnvId::Pixelgrid) {
            obs_ = state_;
            return;
        }
        obs_.assign(kImageSize * kImageSize, 0.0);
        const std::size_t cell = kImageSize / kGridSize;
        auto paint = [&](std::size_t cx, std::size_t cy, double value) {
            for (std::size_t y = 0; y < cell; ++y)
                for (std::size_t x = 0; x < cell; ++x)
                    obs_[(cy * cell + y) * kImageSize + cx * cell + x] = value;
        };
        paint(gx_, gy_, 0.5);
        paint(ax_, ay_, 1.0);
    }

    EnvId id_;
    Rng rng_;
    std::vector<double> state_;
    std::vector<double> obs_;
    std::size_t steps_ = 0;
    std::size_t ax_ = 0, ay_ = 0, gx_ = 0, gy_ = 0;  // pixelgrid cells
};

}  // namespace rlsa2c
