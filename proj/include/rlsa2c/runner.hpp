#pragma once

#include <chrono>
#include <cstdlib>
#include <limits>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "rlsa2c/checkpoint.hpp"
#include "rlsa2c/trainer.hpp"

namespace rlsa2c {

/// Log-file resolution: explicit log_path if set, otherwise
/// <algo>_<env>_seed<seed>.csv; RLSA2C_LOG_DIR overrides the directory part.
inline std::string resolve_log_path(const TrainConfig& cfg) {
    std::string path = cfg.log_path;
    if (path.empty())
        path = cfg.algorithm + "_" + cfg.env + "_seed" + std::to_string(cfg.seed) + ".csv";
    if (const char* dir = std::getenv("RLSA2C_LOG_DIR")) {
        const auto slash = path.find_last_of('/');
        const std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
        path = std::string(dir) + "/" + base;
    }
    return path;
}

/// Trains to total_timesteps, streaming one CSV row per iteration.
inline TrainerState run(const TrainConfig& cfg, std::ostream* csv = nullptr) {
    TrainerState st = build(cfg);
    std::ofstream file;
    std::ostream* out = csv;
    if (!out) {
        const std::string path = resolve_log_path(cfg);
        file.open(path);
        check(bool(file), "run: cannot open log file " + path);
        out = &file;
    }
    *out << MetricsRow::csv_header() << '\n';
    while (st.timesteps < cfg.total_timesteps) {
        const MetricsRow row = train_iteration(st);
        *out << row.csv() << '\n';
    }
    out->flush();
    if (!cfg.checkpoint_path.empty()) save_checkpoint(st, cfg.checkpoint_path);
    return st;
}

struct EvalResult {
    double mean = 0;
    double stddev = 0;
    std::vector<double> episode_rewards;
};

/// Deterministic-greedy rollouts of a trained policy.
inline EvalResult evaluate(TrainerState& st, std::size_t episodes, std::uint64_t eval_seed = 12345) {
    EvalResult res;
    Env env(env_id_from_string(st.cfg.env), eval_seed);
    const std::size_t odim = env.obs_dim();
    for (std::size_t ep = 0; ep < episodes; ++ep) {
        double total = 0;
        bool done = false;
        while (!done) {
            Mat obs(1, env.pixel() ? 0 : odim);
            Tensor4 img;
            if (env.pixel()) {
                img = Tensor4(1, 1, Env::kImageSize, Env::kImageSize);
                img.data = env.obs();
            } else {
                for (std::size_t j = 0; j < odim; ++j) obs(0, j) = env.obs()[j];
            }
            std::vector<std::size_t> ad;
            Mat ac;
            act_greedy(st.model, obs, img, ad, ac);
            StepResult sr;
            if (env.discrete()) {
                sr = env.step_discrete(ad[0]);
            } else {
                std::vector<double> a(env.action_dim());
                for (std::size_t d = 0; d < a.size(); ++d) a[d] = ac(0, d);
                sr = env.step_continuous(a);
            }
            total += sr.reward;
            done = sr.done;
        }
        res.episode_rewards.push_back(total);
    }
    for (double r : res.episode_rewards) res.mean += r;
    res.mean /= double(episodes);
    for (double r : res.episode_rewards) res.stddev += (r - res.mean) * (r - res.mean);
    res.stddev = episodes > 1 ? std::sqrt(res.stddev / double(episodes - 1)) : 0.0;
    return res;
}

struct LayerFactor {
    std::string name;
    double analytic = 1;
    double measured = 1;
};

struct BenchResult {
    std::map<std::string, double> throughput;  // algo -> timesteps per second
    std::vector<LayerFactor> factors;          // RLS layers of rlssa2c on this env
};

namespace bench_detail {

template <typename F>
double time_reps(std::size_t reps, F&& f) {
    // best of several trials: the min is far less sensitive to scheduler and
    // cache noise than a single mean
    double best = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 5; ++trial) {
        const auto t0 = std::chrono::steady_clock::now();
        for (std::size_t i = 0; i < reps; ++i) f();
        const double t =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() /
            double(reps);
        best = std::min(best, t);
    }
    return best;
}

}  // namespace bench_detail

/// Measures timesteps/second for all three algorithms on the config's env and
/// the per-layer RLS-vs-first-order overhead factors next to their analytic
/// values (fc: 1 + N_{l-1}/NT, conv: 1 + C_{l-1}HkWk/(NT HlWl), K-FAC head:
/// flop count of the per-sample recursions, 2 + 3(N_{l-1}/N_l + N_l/N_{l-1})
/// + (N_{l-1}+N_l)/NT).
inline BenchResult bench(const TrainConfig& base_cfg, std::size_t warmup_iters = 20,
                         std::size_t timed_iters = 100) {
    BenchResult result;
    for (const char* algo : {"rmsa2c", "rlssa2c", "rlsna2c"}) {
        TrainConfig cfg = base_cfg;
        cfg.algorithm = algo;
        cfg.total_timesteps = std::size_t(-1);
        TrainerState st = build(cfg);
        for (std::size_t i = 0; i < warmup_iters; ++i) train_iteration(st);
        const auto t0 = std::chrono::steady_clock::now();
        const std::size_t steps0 = st.timesteps;
        for (std::size_t i = 0; i < timed_iters; ++i) train_iteration(st);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.throughput[algo] = double(st.timesteps - steps0) / secs;
    }

    // Per-layer overhead factors, measured on a real batch of the RLS trainer.
    TrainConfig cfg = base_cfg;
    cfg.algorithm = "rlssa2c";
    cfg.total_timesteps = std::size_t(-1);
    TrainerState st = build(cfg);
    for (std::size_t i = 0; i < 5; ++i) train_iteration(st);
    RolloutBatch batch = collect(
        st.envs, st.cfg.t_steps,
        [&](const Mat& obs, const Tensor4& img, std::vector<std::size_t>& ad, Mat& ac) {
            act_batch(st, obs, img, ad, ac);
        },
        st.episode_return);
    prepare_batch(st.model, batch, cfg.gamma);
    BatchEval ev = loss_and_grads(st.model, batch, cfg.eta, cfg.entropy_mode);
    const double nt = double(batch.m());
    const double k = st.opt.sched.k_at(st.iteration);
    const std::size_t reps = 200;

    auto fc_factor = [&](const std::string& name, const FcLayer& layer, const Mat& grad,
                         const Mat& x, RlsLayerState state, RmspropState rms, double analytic_extra,
                         auto&& rls_call) {
        Mat dz(x.rows, layer.out_dim(), 0.5);
        const double t_grad =
            bench_detail::time_reps(reps, [&] { volatile auto g = matmul(transpose(x), dz); });
        Mat w = layer.weight;
        const double t_rls = bench_detail::time_reps(reps, [&] {
            RlsLayerState s = state;
            rls_call(s, w, grad, x);
        });
        std::vector<double> p = layer.weight.data;
        const double t_sgd = bench_detail::time_reps(reps, [&] {
            RmspropState s = rms;
            rmsprop_step(s, p, grad.data);
        });
        LayerFactor f;
        f.name = name;
        f.analytic = 1.0 + analytic_extra;
        f.measured = (t_grad + t_rls) / (t_grad + t_sgd);
        result.factors.push_back(f);
    };

    const Mat& hc = st.model.joint ? ev.trunk_cache.output() : ev.critic_cache.output();
    fc_factor("critic_output", st.model.value_head, ev.grads.value_w, hc, st.opt.value_head_rls,
              st.opt.value_head_rms, double(st.model.value_head.in_dim()) / nt,
              [&](RlsLayerState& s, Mat& w, const Mat& g, const Mat& x) {
                  rls_critic_output_step(s, w, g, x, k);
              });
    const Net& trunk = st.model.joint ? st.model.trunk : st.model.critic_trunk;
    const NetCache& tcache = st.model.joint ? ev.trunk_cache : ev.critic_cache;
    const NetGrads& tgrads = st.model.joint ? ev.grads.trunk : ev.grads.critic_trunk;
    const auto& fc_rls = st.model.joint ? st.opt.trunk_fc_rls : st.opt.critic_fc_rls;
    const auto& fc_rms = st.model.joint ? st.opt.trunk_fc_rms : st.opt.critic_fc_rms;
    for (std::size_t i = 0; i < trunk.fcs.size(); ++i) {
        fc_factor("fc_hidden" + std::to_string(i), trunk.fcs[i], tgrads.fc_w[i], tcache.fcs[i].x,
                  fc_rls[i], fc_rms[i], double(trunk.fcs[i].in_dim()) / nt,
                  [&](RlsLayerState& s, Mat& w, const Mat& g, const Mat& x) {
                      rls_fc_hidden_step(s, w, g, x, k, cfg.mu_fc);
                  });
    }
    for (std::size_t i = 0; i < trunk.convs.size(); ++i) {
        const ConvLayer& layer = trunk.convs[i];
        const ConvCache& cc = tcache.convs[i];
        const Mat xbar = conv_xbar(cc.xhat);
        const double hw = double(cc.shape.h_out * cc.shape.w_out);
        Mat dz(cc.shape.h_out * cc.shape.w_out, layer.c_out, 0.5);
        const double t_grad = bench_detail::time_reps(reps, [&] {
            for (const Mat& xs : cc.xhat) volatile auto g = matmul(xs, dz);
        });
        Mat w = layer.weight;
        const double t_rls = bench_detail::time_reps(reps, [&] {
            RlsLayerState s = st.opt.trunk_conv_rls[i];
            rls_conv_step(s, w, tgrads.conv_w[i], xbar, k, 1.0);
        });
        std::vector<double> p = layer.weight.data;
        const double t_sgd = bench_detail::time_reps(reps, [&] {
            RmspropState s = st.opt.trunk_conv_rms[i];
            rmsprop_step(s, p, tgrads.conv_w[i].data);
        });
        LayerFactor f;
        f.name = "conv" + std::to_string(i);
        f.analytic = 1.0 + double(layer.c_in * layer.kh * layer.kw) / (nt * hw);
        f.measured = (t_grad + t_rls) / (t_grad + t_sgd);
        result.factors.push_back(f);
    }
    {
        // K-FAC actor head of rlsna2c
        TrainConfig ncfg = base_cfg;
        ncfg.algorithm = "rlsna2c";
        ncfg.total_timesteps = std::size_t(-1);
        TrainerState nst = build(ncfg);
        for (std::size_t i = 0; i < 5; ++i) train_iteration(nst);
        RolloutBatch nb = collect(
            nst.envs, nst.cfg.t_steps,
            [&](const Mat& obs, const Tensor4& img, std::vector<std::size_t>& ad, Mat& ac) {
                act_batch(nst, obs, img, ad, ac);
            },
            nst.episode_return);
        prepare_batch(nst.model, nb, ncfg.gamma);
        BatchEval nev = loss_and_grads(nst.model, nb, ncfg.eta, ncfg.entropy_mode);
        const Mat& ha = nst.model.joint ? nev.trunk_cache.output() : nev.actor_cache.output();
        Mat dz(ha.rows, nst.model.policy_head.out_dim(), 0.5);
        const double t_grad =
            bench_detail::time_reps(reps, [&] { volatile auto g = matmul(transpose(ha), dz); });
        Mat w = nst.model.policy_head.weight;
        const double t_kfac = bench_detail::time_reps(reps, [&] {
            KfacActorState s = nst.opt.kfac;
            kfac_w_update(s, ha, nev.score, nb.adv, k);
            kfac_p1_update(s, ha, k);
            kfac_p2_update(s, nev.score, k);
            npg_actor_step(s, w, alpha_schedule(s, nst.timesteps));
        });
        std::vector<double> p = nst.model.policy_head.weight.data;
        const double t_sgd = bench_detail::time_reps(reps, [&] {
            RmspropState s = nst.opt.policy_w_rms;
            rmsprop_step(s, p, nev.grads.policy_w.data);
        });
        LayerFactor f;
        f.name = "kfac_actor_output";
        // flop count of the per-sample w/P1/P2 recursions relative to a plain
        // gradient + RMSProp step; the head skips the batch-averaging shortcut,
        // so its cost carries N1/N2 terms the other layers avoid
        const double n1 = double(nst.model.policy_head.in_dim());
        const double n2 = double(nst.model.policy_head.out_dim());
        f.analytic = 2.0 + 3.0 * (n1 / n2 + n2 / n1) + (n1 + n2) / double(nb.m());
        f.measured = (t_grad + t_kfac) / (t_grad + t_sgd);
        result.factors.push_back(f);
    }
    return result;
}

inline void print_bench(const BenchResult& result, std::ostream& out) {
    out << "algorithm,timesteps_per_second\n";
    for (const auto& [algo, tps] : result.throughput) out << algo << ',' << tps << '\n';
    out << "\nlayer,analytic_factor,measured_factor\n";
    for (const auto& f : result.factors)
        out << f.name << ',' << f.analytic << ',' << f.measured << '\n';
}

/// Re-emits timesteps + the 100-episode smoothed reward column of a run log,
/// optionally downsampled, for external plotting.
inline void plot_data(std::istream& csv_in, std::ostream& out, std::size_t stride = 1) {
    check(stride >= 1, "plot_data: stride must be >= 1");
    std::string line;
    check(bool(std::getline(csv_in, line)), "plot_data: empty log");
    out << "timesteps,reward_mean_100\n";
    std::size_t rownum = 0;
    while (std::getline(csv_in, line)) {
        if (rownum++ % stride != 0) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        check(fields.size() >= 4, "plot_data: malformed row");
        out << fields[1] << ',' << fields[3] << '\n';
    }
}

}  // namespace rlsa2c
