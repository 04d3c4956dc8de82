#pragma once

#include <functional>
#include <vector>

#include "rlsa2c/core.hpp"
#include "rlsa2c/env.hpp"

namespace rlsa2c {

/// One N x T on-policy minibatch. Rows are ordered worker-major:
/// row(i, k) = i * T + k for worker i, timestep k; M = N * T.
struct RolloutBatch {
    std::size_t n_workers = 0;
    std::size_t t_steps = 0;
    bool discrete = true;
    bool pixel = false;

    Mat obs;             // M x obs_dim (vector envs)
    Tensor4 obs_img;     // M x 1 x H x W (pixel envs)
    std::vector<std::size_t> actions_d;
    Mat actions_c;       // M x action_dim
    std::vector<double> rewards;  // M
    std::vector<double> dones;    // M, in {0,1}
    Mat final_obs;       // N x obs_dim
    Tensor4 final_obs_img;

    std::vector<double> values;     // V(S_t), M
    std::vector<double> bootstrap;  // V(s'_T), N
    std::vector<double> logprobs;   // M
    std::vector<double> q;          // M
    std::vector<double> adv;        // M

    std::size_t m() const { return n_workers * t_steps; }
    std::size_t row(std::size_t worker, std::size_t k) const { return worker * t_steps + k; }

    /// Per-worker complete-episode rewards finished inside this batch.
    std::vector<double> finished_episode_rewards;
};

/// Chooses actions for the N current observations. For discrete envs fill
/// `actions_d`, for continuous fill `actions_c` (N x action_dim).
using ActFn = std::function<void(const Mat& obs, const Tensor4& obs_img,
                                 std::vector<std::size_t>& actions_d, Mat& actions_c)>;

namespace detail {
inline void pack_row(Mat& dst, std::size_t row, const std::vector<double>& src) {
    for (std::size_t j = 0; j < src.size(); ++j) dst(row, j) = src[j];
}
inline void pack_img(Tensor4& dst, std::size_t row, const std::vector<double>& src,
                     std::size_t hw) {
    for (std::size_t j = 0; j < hw; ++j) dst.data[row * hw + j] = src[j];
}
}  // namespace detail

/// Advance each worker exactly T steps; workers are stepped in fixed order so
/// the batch is deterministic. Episode-reward accounting carries across
/// batches through `episode_return` (one accumulator per worker).
inline RolloutBatch collect(std::vector<Env>& envs, std::size_t t_steps, const ActFn& act,
                            std::vector<double>& episode_return) {
    check(!envs.empty() && t_steps >= 1, "collect: need N >= 1 and T >= 1");
    const std::size_t n = envs.size();
    check(episode_return.size() == n, "collect: episode_return size mismatch");
    RolloutBatch batch;
    batch.n_workers = n;
    batch.t_steps = t_steps;
    batch.discrete = envs[0].discrete();
    batch.pixel = envs[0].pixel();
    const std::size_t odim = envs[0].obs_dim();
    const std::size_t m = n * t_steps;

    if (batch.pixel) {
        batch.obs_img = Tensor4(m, 1, Env::kImageSize, Env::kImageSize);
        batch.final_obs_img = Tensor4(n, 1, Env::kImageSize, Env::kImageSize);
    } else {
        batch.obs = Mat(m, odim);
        batch.final_obs = Mat(n, odim);
    }
    if (batch.discrete)
        batch.actions_d.resize(m);
    else
        batch.actions_c = Mat(m, envs[0].action_dim());
    batch.rewards.resize(m);
    batch.dones.resize(m);

    Mat cur(n, batch.pixel ? 0 : odim);
    Tensor4 cur_img;
    if (batch.pixel) cur_img = Tensor4(n, 1, Env::kImageSize, Env::kImageSize);

    std::vector<std::size_t> act_d;
    Mat act_c;
    for (std::size_t k = 0; k < t_steps; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (batch.pixel)
                detail::pack_img(cur_img, i, envs[i].obs(), odim);
            else
                detail::pack_row(cur, i, envs[i].obs());
        }
        act(cur, cur_img, act_d, act_c);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = batch.row(i, k);
            if (batch.pixel)
                detail::pack_img(batch.obs_img, r, envs[i].obs(), odim);
            else
                detail::pack_row(batch.obs, r, envs[i].obs());
            StepResult sr;
            if (batch.discrete) {
                batch.actions_d[r] = act_d[i];
                sr = envs[i].step_discrete(act_d[i]);
            } else {
                std::vector<double> a(envs[i].action_dim());
                for (std::size_t d = 0; d < a.size(); ++d) {
                    a[d] = act_c(i, d);
                    batch.actions_c(r, d) = a[d];
                }
                sr = envs[i].step_continuous(a);
            }
            batch.rewards[r] = sr.reward;
            batch.dones[r] = sr.done ? 1.0 : 0.0;
            episode_return[i] += sr.reward;
            if (sr.done) {
                batch.finished_episode_rewards.push_back(episode_return[i]);
                episode_return[i] = 0.0;
            }
            if (k + 1 == t_steps) {
                if (batch.pixel)
                    detail::pack_img(batch.final_obs_img, i, sr.next_obs, odim);
                else
                    detail::pack_row(batch.final_obs, i, sr.next_obs);
            }
        }
    }
    return batch;
}

/// n-step bootstrapped targets, backward recursion over each worker's segment.
inline void compute_q_targets(RolloutBatch& batch, double gamma) {
    check(batch.values.size() == batch.m() && batch.bootstrap.size() == batch.n_workers,
          "compute_q_targets: values/bootstrap missing");
    batch.q.assign(batch.m(), 0.0);
    for (std::size_t i = 0; i < batch.n_workers; ++i) {
        double next = batch.bootstrap[i];
        for (std::size_t k = batch.t_steps; k-- > 0;) {
            const std::size_t r = batch.row(i, k);
            batch.q[r] = batch.rewards[r] + gamma * (1.0 - batch.dones[r]) * next;
            next = batch.q[r];
        }
    }
}

/// A = Q - V(S), no normalization.
inline void compute_advantage(RolloutBatch& batch) {
    check(batch.q.size() == batch.m(), "compute_advantage: Q missing");
    batch.adv.resize(batch.m());
    for (std::size_t r = 0; r < batch.m(); ++r) batch.adv[r] = batch.q[r] - batch.values[r];
}

}  // namespace rlsa2c
