#pragma once

#include <chrono>
#include <deque>
#include <iostream>
#include <limits>
#include <sstream>

#include "rlsa2c/config.hpp"
#include "rlsa2c/env.hpp"
#include "rlsa2c/kfac.hpp"
#include "rlsa2c/net.hpp"
#include "rlsa2c/optim.hpp"
#include "rlsa2c/policy.hpp"
#include "rlsa2c/rollout.hpp"

namespace rlsa2c {

/// Critic/actor model. Discrete and pixel tasks use one joint trunk with two
/// heads; continuous tasks use two disjoint 64-64 Tanh trunks. The Gaussian
/// policy head is the only layer with a bias; its log-std is a learned
/// state-independent vector.
struct Model {
    bool joint = true;
    bool discrete = true;
    bool pixel = false;
    Net trunk;          // joint
    Net critic_trunk;   // disjoint
    Net actor_trunk;    // disjoint
    FcLayer value_head;   // in -> 1, identity
    FcLayer policy_head;  // in -> |A| logits, or in -> dim(a) Gaussian mean (with bias)
    std::vector<double> log_std;  // continuous only

    const Net& critic_net() const { return joint ? trunk : critic_trunk; }
    const Net& actor_net() const { return joint ? trunk : actor_trunk; }
    Net& critic_net() { return joint ? trunk : critic_trunk; }
    Net& actor_net() { return joint ? trunk : actor_trunk; }
};

inline Model build_model(EnvId env_id, Rng& rng) {
    Model model;
    switch (env_id) {
        case EnvId::CartpoleLite:
            model.joint = true;
            model.discrete = true;
            model.trunk.fcs = {make_fc(4, 64, Activation::Tanh), make_fc(64, 64, Activation::Tanh)};
            model.value_head = make_fc(64, 1, Activation::Identity);
            model.policy_head = make_fc(64, 2, Activation::Identity);
            break;
        case EnvId::Pixelgrid:
            model.joint = true;
            model.discrete = true;
            model.pixel = true;
            model.trunk.convs = {make_conv(1, 8, 4, 4, 2), make_conv(8, 8, 3, 3, 1)};
            model.trunk.fcs = {make_fc(8 * 5 * 5, 64, Activation::ReLU)};
            model.value_head = make_fc(64, 1, Activation::Identity);
            model.policy_head = make_fc(64, 4, Activation::Identity);
            break;
        case EnvId::Pointmass:
            model.joint = false;
            model.discrete = false;
            model.critic_trunk.fcs = {make_fc(4, 64, Activation::Tanh),
                                      make_fc(64, 64, Activation::Tanh)};
            model.actor_trunk.fcs = {make_fc(4, 64, Activation::Tanh),
                                     make_fc(64, 64, Activation::Tanh)};
            model.value_head = make_fc(64, 1, Activation::Identity);
            model.policy_head = make_fc(64, 2, Activation::Identity, /*bias=*/true);
            model.log_std.assign(2, -0.5);
            break;
    }
    init_net(model.trunk, rng);
    init_net(model.critic_trunk, rng);
    init_net(model.actor_trunk, rng);
    init_fc(model.value_head, rng);
    init_fc(model.policy_head, rng);
    // small-scale softmax head: near-uniform initial policy, standard A2C practice
    if (model.discrete)
        for (double& v : model.policy_head.weight.data) v *= 0.1;
    return model;
}

struct ModelGrads {
    NetGrads trunk, critic_trunk, actor_trunk;
    Mat value_w;
    Mat policy_w;
    std::vector<double> policy_b;
    std::vector<double> dlog_std;
};

struct BatchEval {
    NetCache trunk_cache, critic_cache, actor_cache;
    FcCache value_cache, policy_cache;
    double value_loss = 0, policy_loss = 0, entropy = 0, total = 0;
    ModelGrads grads;
    Mat score;  // G^Z of the policy head: per-sample d log pi / d Z (mean block for Gaussian)
};

/// Fills batch.values, batch.bootstrap, batch.q and batch.adv from the current
/// critic. Forward caches are discarded; loss_and_grads reruns the forward.
inline void prepare_batch(const Model& model, RolloutBatch& batch, double gamma) {
    auto critic_values = [&](const Mat& obs, const Tensor4& img) {
        NetCache c = model.pixel ? net_forward(model.critic_net(), img)
                                 : net_forward(model.critic_net(), obs);
        FcCache v = fc_forward(model.value_head, c.output());
        std::vector<double> out(v.y.rows);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = v.y(i, 0);
        return out;
    };
    batch.values = critic_values(batch.obs, batch.obs_img);
    batch.bootstrap = critic_values(batch.final_obs, batch.final_obs_img);
    compute_q_targets(batch, gamma);
    compute_advantage(batch);
}

/// One forward/backward pass for the full loss L = L(Psi) + L(Theta) + eta E.
/// The policy loss treats batch.adv as a constant; the value loss is evaluated
/// against batch.q with a fresh critic forward. Gradients are raw (unclipped).
inline BatchEval loss_and_grads(const Model& model, const RolloutBatch& batch, double eta,
                                const std::string& entropy_mode) {
    check(batch.q.size() == batch.m() && batch.adv.size() == batch.m(),
          "loss_and_grads: call prepare_batch first");
    BatchEval ev;
    const std::size_t m = batch.m();
    const double inv_m = 1.0 / double(m);

    if (model.joint) {
        ev.trunk_cache = model.pixel ? net_forward(model.trunk, batch.obs_img)
                                     : net_forward(model.trunk, batch.obs);
    } else {
        ev.critic_cache = net_forward(model.critic_trunk, batch.obs);
        ev.actor_cache = net_forward(model.actor_trunk, batch.obs);
    }
    const Mat& hc = model.joint ? ev.trunk_cache.output() : ev.critic_cache.output();
    const Mat& ha = model.joint ? ev.trunk_cache.output() : ev.actor_cache.output();
    ev.value_cache = fc_forward(model.value_head, hc);
    ev.policy_cache = fc_forward(model.policy_head, ha);

    // value loss (1/2M)||Q - V||^2 and dL/dV = -(1/M)(Q - V)
    Mat dv(m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        const double resid = batch.q[i] - ev.value_cache.y(i, 0);
        ev.value_loss += 0.5 * inv_m * resid * resid;
        dv(i, 0) = -inv_m * resid;
    }

    Mat dz;  // dL/dZ of the policy head
    if (model.discrete) {
        const Mat& z = ev.policy_cache.y;
        const Mat p = softmax(z);
        ev.score = softmax_score(z, batch.actions_d);
        const std::vector<double> lp = softmax_logprob(z, batch.actions_d);
        dz = Mat(m, z.cols);
        for (std::size_t i = 0; i < m; ++i) {
            ev.policy_loss -= inv_m * batch.adv[i] * lp[i];
            for (std::size_t j = 0; j < z.cols; ++j)
                dz(i, j) = -inv_m * batch.adv[i] * ev.score(i, j);
        }
        if (entropy_mode == "full") {
            const std::vector<double> h = softmax_entropy(z);
            for (std::size_t i = 0; i < m; ++i) {
                ev.entropy += inv_m * h[i];
                for (std::size_t j = 0; j < z.cols; ++j) {
                    const double pij = p(i, j);
                    const double logp = pij > 0.0 ? std::log(pij) : 0.0;
                    dz(i, j) += eta * inv_m * (-pij * (logp + h[i]));
                }
            }
        } else {  // one-sample estimator: sums pi log pi over the sampled action only
            for (std::size_t i = 0; i < m; ++i) {
                const std::size_t a = batch.actions_d[i];
                const double pa = p(i, a);
                const double logpa = std::log(pa);
                ev.entropy -= inv_m * pa * logpa;
                for (std::size_t j = 0; j < z.cols; ++j) {
                    const double ind = (j == a) ? 1.0 : 0.0;
                    dz(i, j) += eta * inv_m * (-(1.0 + logpa) * pa * (ind - p(i, j)));
                }
            }
        }
    } else {
        const Mat& mean = ev.policy_cache.y;
        ev.score = gaussian_mean_score(mean, model.log_std, batch.actions_c);
        const std::vector<double> lp = gaussian_logprob(mean, model.log_std, batch.actions_c);
        const Mat gls = gaussian_logstd_score(mean, model.log_std, batch.actions_c);
        dz = Mat(m, mean.cols);
        ev.grads.dlog_std.assign(model.log_std.size(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            ev.policy_loss -= inv_m * batch.adv[i] * lp[i];
            for (std::size_t d = 0; d < mean.cols; ++d) {
                dz(i, d) = -inv_m * batch.adv[i] * ev.score(i, d);
                ev.grads.dlog_std[d] += -inv_m * batch.adv[i] * gls(i, d);
            }
        }
        ev.entropy = gaussian_entropy(model.log_std);
        for (std::size_t d = 0; d < model.log_std.size(); ++d) ev.grads.dlog_std[d] += eta;
    }

    ev.total = ev.value_loss + ev.policy_loss + eta * ev.entropy;

    Mat dhv, dhp;
    std::vector<double> dummy_bias;
    fc_backward(model.value_head, ev.value_cache, dv, ev.grads.value_w, dummy_bias, dhv);
    fc_backward(model.policy_head, ev.policy_cache, dz, ev.grads.policy_w, ev.grads.policy_b, dhp);
    if (model.joint) {
        ev.grads.trunk = net_backward(model.trunk, ev.trunk_cache, dhv + dhp);
    } else {
        ev.grads.critic_trunk = net_backward(model.critic_trunk, ev.critic_cache, dhv);
        ev.grads.actor_trunk = net_backward(model.actor_trunk, ev.actor_cache, dhp);
    }
    return ev;
}

inline std::vector<std::vector<double>*> grad_arrays(ModelGrads& g) {
    std::vector<std::vector<double>*> out;
    auto add_net = [&](NetGrads& n) {
        for (auto& w : n.conv_w) out.push_back(&w.data);
        for (auto& w : n.fc_w) out.push_back(&w.data);
        for (auto& b : n.fc_b)
            if (!b.empty()) out.push_back(&b);
    };
    add_net(g.trunk);
    add_net(g.critic_trunk);
    add_net(g.actor_trunk);
    out.push_back(&g.value_w.data);
    out.push_back(&g.policy_w.data);
    if (!g.policy_b.empty()) out.push_back(&g.policy_b);
    if (!g.dlog_std.empty()) out.push_back(&g.dlog_std);
    return out;
}

struct OptimStates {
    // RLS states, index-aligned with the layer stacks
    std::vector<RlsLayerState> trunk_conv_rls, trunk_fc_rls;
    std::vector<RlsLayerState> critic_fc_rls, actor_fc_rls;
    RlsLayerState value_head_rls;
    // RMSProp states
    std::vector<RmspropState> trunk_conv_rms, trunk_fc_rms, critic_fc_rms, actor_fc_rms;
    RmspropState value_head_rms, policy_w_rms, policy_b_rms, logstd_rms;
    KfacActorState kfac;
    ScheduleState sched;
};

inline OptimStates build_optim(const TrainConfig& cfg, const Model& model) {
    OptimStates opt;
    const Algo algo = algo_from_string(cfg.algorithm);
    const double beta = algo == Algo::RlsSA2C ? cfg.beta : 0.0;
    auto rls_fc = [&](const FcLayer& l) {
        RlsLayerState s;
        s.p = Mat::identity(l.in_dim());
        s.beta = beta;
        s.lambda = cfg.lambda;
        return s;
    };
    auto rls_conv = [&](const ConvLayer& l) {
        RlsLayerState s;
        s.p = Mat::identity(l.c_in * l.kh * l.kw);
        s.beta = beta;
        s.lambda = cfg.lambda;
        return s;
    };
    for (const auto& l : model.trunk.convs) opt.trunk_conv_rls.push_back(rls_conv(l));
    for (const auto& l : model.trunk.fcs) opt.trunk_fc_rls.push_back(rls_fc(l));
    for (const auto& l : model.critic_trunk.fcs) opt.critic_fc_rls.push_back(rls_fc(l));
    for (const auto& l : model.actor_trunk.fcs) opt.actor_fc_rls.push_back(rls_fc(l));
    opt.value_head_rls = rls_fc(model.value_head);

    auto rms = [&] {
        RmspropState s;
        s.rho = cfg.rms_rho;
        s.eps = cfg.rms_eps;
        s.delta = cfg.rms_delta;
        return s;
    };
    opt.trunk_conv_rms.assign(model.trunk.convs.size(), rms());
    opt.trunk_fc_rms.assign(model.trunk.fcs.size(), rms());
    opt.critic_fc_rms.assign(model.critic_trunk.fcs.size(), rms());
    opt.actor_fc_rms.assign(model.actor_trunk.fcs.size(), rms());
    opt.value_head_rms = rms();
    opt.policy_w_rms = rms();
    opt.policy_b_rms = rms();
    opt.logstd_rms = rms();

    opt.kfac.p1 = Mat::identity(model.policy_head.in_dim());
    opt.kfac.p2 = Mat::identity(model.policy_head.out_dim());
    opt.kfac.w.assign(model.policy_head.in_dim() * model.policy_head.out_dim(), 0.0);
    opt.kfac.lambda = cfg.lambda;
    opt.kfac.alpha_init = cfg.alpha_init;
    opt.kfac.alpha_decrement = cfg.alpha_decrement;
    opt.kfac.alpha_period = cfg.alpha_period;
    opt.kfac.alpha_floor = cfg.alpha_floor;
    opt.kfac.literal_gw_sign = cfg.literal_gw_sign;

    opt.sched.k0 = cfg.k0;
    opt.sched.dk = cfg.dk;
    opt.sched.k_min = cfg.k_min;
    opt.sched.mu0 = cfg.mu0;
    opt.sched.dmu = cfg.dmu;
    opt.sched.mu_min = cfg.mu_min;
    opt.sched.t_delta = cfg.t_delta;
    return opt;
}

/// One CSV log line per iteration.
struct MetricsRow {
    std::size_t iteration = 0;
    std::size_t timesteps = 0;
    double wall_clock_s = 0;
    double reward_mean_100 = 0;
    double value_loss = 0, policy_loss = 0, entropy = 0, grad_norm = 0;
    double k_t = 0, mu_t = 0, alpha_t = 0;

    static const char* csv_header() {
        return "iteration,timesteps,wall_clock_s,reward_mean_100,value_loss,policy_loss,entropy,"
               "grad_norm,k_t,mu_t,alpha_t";
    }
    std::string csv() const {
        std::ostringstream out;
        out.precision(17);
        out << iteration << ',' << timesteps << ',' << wall_clock_s << ',' << reward_mean_100
            << ',' << value_loss << ',' << policy_loss << ',' << entropy << ',' << grad_norm
            << ',' << k_t << ',' << mu_t << ',' << alpha_t;
        return out.str();
    }
};

struct TrainerState {
    TrainConfig cfg;
    Algo algo = Algo::RlsSA2C;
    Model model;
    OptimStates opt;
    std::vector<Env> envs;
    Rng action_rng{0};
    std::vector<double> episode_return;
    std::deque<double> reward_window;  // last 100 completed episode rewards
    std::size_t iteration = 0;
    std::size_t timesteps = 0;
    double wall_seconds = 0;  // not part of the checkpointed state
    std::size_t shared_updates_this_iter = 0;  // instrumentation: joint-trunk layer updates
};

inline TrainerState build(const TrainConfig& cfg) {
    cfg.validate();
    TrainerState st;
    st.cfg = cfg;
    st.algo = algo_from_string(cfg.algorithm);
    const EnvId env_id = env_id_from_string(cfg.env);
    Rng init_rng(cfg.seed);
    st.model = build_model(env_id, init_rng);
    st.opt = build_optim(cfg, st.model);
    st.envs.reserve(cfg.n_workers);
    for (std::size_t i = 0; i < cfg.n_workers; ++i)
        st.envs.emplace_back(env_id, cfg.seed * 1000003ULL + 17ULL * i + 1ULL);
    st.action_rng.reseed(cfg.seed ^ 0x5bd1e995u);
    st.episode_return.assign(cfg.n_workers, 0.0);
    return st;
}

/// Samples actions for the N current observations (training policy).
inline void act_batch(TrainerState& st, const Mat& obs, const Tensor4& obs_img,
                      std::vector<std::size_t>& actions_d, Mat& actions_c) {
    NetCache cache = st.model.pixel ? net_forward(st.model.actor_net(), obs_img)
                                    : net_forward(st.model.actor_net(), obs);
    FcCache head = fc_forward(st.model.policy_head, cache.output());
    if (st.model.discrete)
        actions_d = softmax_sample(head.y, st.action_rng);
    else
        actions_c = gaussian_sample(head.y, st.model.log_std, st.action_rng);
}

/// Greedy policy for evaluation: argmax logits / Gaussian mean.
inline void act_greedy(const Model& model, const Mat& obs, const Tensor4& obs_img,
                       std::vector<std::size_t>& actions_d, Mat& actions_c) {
    NetCache cache =
        model.pixel ? net_forward(model.actor_net(), obs_img) : net_forward(model.actor_net(), obs);
    FcCache head = fc_forward(model.policy_head, cache.output());
    if (model.discrete) {
        actions_d.resize(head.y.rows);
        for (std::size_t i = 0; i < head.y.rows; ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < head.y.cols; ++j)
                if (head.y(i, j) > head.y(i, best)) best = j;
            actions_d[i] = best;
        }
    } else {
        actions_c = head.y;
    }
}

/// Applies the per-layer updates of the selected algorithm. The update order
/// follows the critic-block-then-actor-block structure; in the joint case the
/// shared trunk is updated once, inside the critic block.
inline void apply_updates(TrainerState& st, const RolloutBatch& batch, BatchEval& ev) {
    const double k = st.opt.sched.k_at(st.iteration);
    const double mu_conv = st.opt.sched.mu_at(st.iteration);
    const double mu_fc = st.cfg.mu_fc;
    st.shared_updates_this_iter = 0;

    auto rms_mat = [&](RmspropState& s, Mat& w, const Mat& g) { rmsprop_step(s, w.data, g.data); };

    if (st.algo == Algo::RmsA2C) {
        rms_mat(st.opt.value_head_rms, st.model.value_head.weight, ev.grads.value_w);
        if (st.model.joint) {
            for (std::size_t i = 0; i < st.model.trunk.fcs.size(); ++i, ++st.shared_updates_this_iter)
                rms_mat(st.opt.trunk_fc_rms[i], st.model.trunk.fcs[i].weight, ev.grads.trunk.fc_w[i]);
            for (std::size_t i = 0; i < st.model.trunk.convs.size(); ++i, ++st.shared_updates_this_iter)
                rms_mat(st.opt.trunk_conv_rms[i], st.model.trunk.convs[i].weight,
                        ev.grads.trunk.conv_w[i]);
        } else {
            for (std::size_t i = 0; i < st.model.critic_trunk.fcs.size(); ++i)
                rms_mat(st.opt.critic_fc_rms[i], st.model.critic_trunk.fcs[i].weight,
                        ev.grads.critic_trunk.fc_w[i]);
            for (std::size_t i = 0; i < st.model.actor_trunk.fcs.size(); ++i)
                rms_mat(st.opt.actor_fc_rms[i], st.model.actor_trunk.fcs[i].weight,
                        ev.grads.actor_trunk.fc_w[i]);
        }
        rms_mat(st.opt.policy_w_rms, st.model.policy_head.weight, ev.grads.policy_w);
        if (!st.model.policy_head.bias.empty())
            rmsprop_step(st.opt.policy_b_rms, st.model.policy_head.bias, ev.grads.policy_b);
        if (!st.model.log_std.empty())
            rmsprop_step(st.opt.logstd_rms, st.model.log_std, ev.grads.dlog_std);
        return;
    }

    // ---- critic block ----
    const Mat& hc = st.model.joint ? ev.trunk_cache.output() : ev.critic_cache.output();
    rls_critic_output_step(st.opt.value_head_rls, st.model.value_head.weight, ev.grads.value_w, hc,
                           k);
    if (st.model.joint) {
        for (std::size_t i = st.model.trunk.fcs.size(); i-- > 0;) {
            rls_fc_hidden_step(st.opt.trunk_fc_rls[i], st.model.trunk.fcs[i].weight,
                               ev.grads.trunk.fc_w[i], ev.trunk_cache.fcs[i].x, k, mu_fc);
            ++st.shared_updates_this_iter;
        }
        for (std::size_t i = st.model.trunk.convs.size(); i-- > 0;) {
            rls_conv_step(st.opt.trunk_conv_rls[i], st.model.trunk.convs[i].weight,
                          ev.grads.trunk.conv_w[i], conv_xbar(ev.trunk_cache.convs[i].xhat), k,
                          mu_conv);
            ++st.shared_updates_this_iter;
        }
    } else {
        for (std::size_t i = st.model.critic_trunk.fcs.size(); i-- > 0;)
            rls_fc_hidden_step(st.opt.critic_fc_rls[i], st.model.critic_trunk.fcs[i].weight,
                               ev.grads.critic_trunk.fc_w[i], ev.critic_cache.fcs[i].x, k, mu_fc);
    }

    // ---- actor block ----
    const Mat& ha = st.model.joint ? ev.trunk_cache.output() : ev.actor_cache.output();
    if (st.algo == Algo::RlsSA2C) {
        rms_mat(st.opt.policy_w_rms, st.model.policy_head.weight, ev.grads.policy_w);
    } else {  // RLSNA2C: K-FAC compatible parameter + NPG step
        kfac_w_update(st.opt.kfac, ha, ev.score, batch.adv, k);
        kfac_p1_update(st.opt.kfac, ha, k);
        kfac_p2_update(st.opt.kfac, ev.score, k);
        npg_actor_step(st.opt.kfac, st.model.policy_head.weight,
                       alpha_schedule(st.opt.kfac, st.timesteps));
    }
    if (!st.model.policy_head.bias.empty())
        rmsprop_step(st.opt.policy_b_rms, st.model.policy_head.bias, ev.grads.policy_b);
    if (!st.model.log_std.empty())
        rmsprop_step(st.opt.logstd_rms, st.model.log_std, ev.grads.dlog_std);
    if (!st.model.joint) {
        for (std::size_t i = st.model.actor_trunk.fcs.size(); i-- > 0;)
            rls_fc_hidden_step(st.opt.actor_fc_rls[i], st.model.actor_trunk.fcs[i].weight,
                               ev.grads.actor_trunk.fc_w[i], ev.actor_cache.fcs[i].x, k, mu_fc);
    }
}

inline bool spd_spot_check(const TrainerState& st);

inline MetricsRow train_iteration(TrainerState& st) {
    const auto t0 = std::chrono::steady_clock::now();

    RolloutBatch batch = collect(
        st.envs, st.cfg.t_steps,
        [&](const Mat& obs, const Tensor4& img, std::vector<std::size_t>& ad, Mat& ac) {
            act_batch(st, obs, img, ad, ac);
        },
        st.episode_return);
    for (double r : batch.finished_episode_rewards) {
        st.reward_window.push_back(r);
        if (st.reward_window.size() > 100) st.reward_window.pop_front();
    }

    prepare_batch(st.model, batch, st.cfg.gamma);
    BatchEval ev = loss_and_grads(st.model, batch, st.cfg.eta, st.cfg.entropy_mode);
    if (!std::isfinite(ev.total)) {
        std::ostringstream dump;
        dump << "non-finite loss at iteration " << st.iteration << ": value=" << ev.value_loss
             << " policy=" << ev.policy_loss << " entropy=" << ev.entropy;
        std::cerr << dump.str() << std::endl;
        throw std::runtime_error(dump.str());
    }
    auto arrays = grad_arrays(ev.grads);
    const double grad_norm = l2_clip(arrays, st.cfg.clip_norm);

    apply_updates(st, batch, ev);
    if (st.iteration % 1000 == 0)
        check(spd_spot_check(st), "P-matrix lost positive definiteness");

    st.timesteps += st.cfg.n_workers * st.cfg.t_steps;
    MetricsRow row;
    row.iteration = st.iteration;
    row.timesteps = st.timesteps;
    row.value_loss = ev.value_loss;
    row.policy_loss = ev.policy_loss;
    row.entropy = ev.entropy;
    row.grad_norm = grad_norm;
    row.k_t = st.opt.sched.k_at(st.iteration);
    row.mu_t = st.opt.sched.mu_at(st.iteration);
    row.alpha_t = st.algo == Algo::RlsNA2C ? alpha_schedule(st.opt.kfac, st.timesteps) : 0.0;
    if (!st.reward_window.empty()) {
        double sum = 0;
        for (double r : st.reward_window) sum += r;
        row.reward_mean_100 = sum / double(st.reward_window.size());
    }
    ++st.iteration;
    st.wall_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.wall_clock_s = st.wall_seconds;
    return row;
}

/// Cholesky-based SPD test with zero-pivot tolerance.
inline bool is_spd(const Mat& a, double tol = 0.0) {
    if (a.rows != a.cols) return false;
    Mat l(a.rows, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a(i, j);
            for (std::size_t kk = 0; kk < j; ++kk) sum -= l(i, kk) * l(j, kk);
            if (i == j) {
                if (sum <= tol) return false;
                l(i, i) = std::sqrt(sum);
            } else {
                l(i, j) = sum / l(j, j);
            }
        }
    }
    return true;
}

inline bool spd_spot_check(const TrainerState& st) {
    if (st.algo == Algo::RmsA2C) return true;
    for (const auto& s : st.opt.trunk_conv_rls)
        if (!is_spd(s.p)) return false;
    for (const auto& s : st.opt.trunk_fc_rls)
        if (!is_spd(s.p)) return false;
    for (const auto& s : st.opt.critic_fc_rls)
        if (!is_spd(s.p)) return false;
    for (const auto& s : st.opt.actor_fc_rls)
        if (!is_spd(s.p)) return false;
    if (!is_spd(st.opt.value_head_rls.p)) return false;
    if (st.algo == Algo::RlsNA2C)
        if (!is_spd(st.opt.kfac.p1) || !is_spd(st.opt.kfac.p2)) return false;
    return true;
}

}  // namespace rlsa2c
