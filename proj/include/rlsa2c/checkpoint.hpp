#pragma once

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rlsa2c/trainer.hpp"

namespace rlsa2c {

/// Versioned binary checkpoint. Layout (little-endian):
///   magic "RLA2CKPT" | u32 version | u64 config-length | config key=value text
///   | u64 iteration | u64 timesteps | u64 section-count | sections.
/// Each section: u64 name-length | name | u8 type (0 = f64, 1 = u64)
/// | u64 element-count | raw little-endian payload.
namespace ckpt {

constexpr char kMagic[8] = {'R', 'L', 'A', '2', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

struct Section {
    std::string name;
    std::uint8_t type = 0;  // 0 = f64, 1 = u64
    std::vector<double> f64;
    std::vector<std::uint64_t> u64;
};

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    check(bool(in), "checkpoint: truncated file");
    return v;
}

/// Walks every mutable state array of the trainer in a fixed order. `visit_f`
/// and `visit_u` are called with (name, pointer-to-vector); both save and load
/// reuse the same walk so the layout cannot drift.
template <typename VisitF64, typename VisitU64>
void walk_state(TrainerState& st, VisitF64&& visit_f, VisitU64&& visit_u) {
    auto net_params = [&](const std::string& prefix, Net& net) {
        for (std::size_t i = 0; i < net.convs.size(); ++i)
            visit_f(prefix + ".conv" + std::to_string(i) + ".w", &net.convs[i].weight.data);
        for (std::size_t i = 0; i < net.fcs.size(); ++i) {
            visit_f(prefix + ".fc" + std::to_string(i) + ".w", &net.fcs[i].weight.data);
            if (!net.fcs[i].bias.empty())
                visit_f(prefix + ".fc" + std::to_string(i) + ".b", &net.fcs[i].bias);
        }
    };
    net_params("trunk", st.model.trunk);
    net_params("critic_trunk", st.model.critic_trunk);
    net_params("actor_trunk", st.model.actor_trunk);
    visit_f("value_head.w", &st.model.value_head.weight.data);
    visit_f("policy_head.w", &st.model.policy_head.weight.data);
    if (!st.model.policy_head.bias.empty()) visit_f("policy_head.b", &st.model.policy_head.bias);
    if (!st.model.log_std.empty()) visit_f("log_std", &st.model.log_std);

    auto rls = [&](const std::string& name, RlsLayerState& s) {
        visit_f(name + ".p", &s.p.data);
        visit_f(name + ".phi", &s.phi);
    };
    for (std::size_t i = 0; i < st.opt.trunk_conv_rls.size(); ++i)
        rls("rls.trunk_conv" + std::to_string(i), st.opt.trunk_conv_rls[i]);
    for (std::size_t i = 0; i < st.opt.trunk_fc_rls.size(); ++i)
        rls("rls.trunk_fc" + std::to_string(i), st.opt.trunk_fc_rls[i]);
    for (std::size_t i = 0; i < st.opt.critic_fc_rls.size(); ++i)
        rls("rls.critic_fc" + std::to_string(i), st.opt.critic_fc_rls[i]);
    for (std::size_t i = 0; i < st.opt.actor_fc_rls.size(); ++i)
        rls("rls.actor_fc" + std::to_string(i), st.opt.actor_fc_rls[i]);
    rls("rls.value_head", st.opt.value_head_rls);

    auto rms = [&](const std::string& name, RmspropState& s) { visit_f(name + ".c", &s.c); };
    for (std::size_t i = 0; i < st.opt.trunk_conv_rms.size(); ++i)
        rms("rms.trunk_conv" + std::to_string(i), st.opt.trunk_conv_rms[i]);
    for (std::size_t i = 0; i < st.opt.trunk_fc_rms.size(); ++i)
        rms("rms.trunk_fc" + std::to_string(i), st.opt.trunk_fc_rms[i]);
    for (std::size_t i = 0; i < st.opt.critic_fc_rms.size(); ++i)
        rms("rms.critic_fc" + std::to_string(i), st.opt.critic_fc_rms[i]);
    for (std::size_t i = 0; i < st.opt.actor_fc_rms.size(); ++i)
        rms("rms.actor_fc" + std::to_string(i), st.opt.actor_fc_rms[i]);
    rms("rms.value_head", st.opt.value_head_rms);
    rms("rms.policy_w", st.opt.policy_w_rms);
    rms("rms.policy_b", st.opt.policy_b_rms);
    rms("rms.logstd", st.opt.logstd_rms);

    visit_f("kfac.p1", &st.opt.kfac.p1.data);
    visit_f("kfac.p2", &st.opt.kfac.p2.data);
    visit_f("kfac.w", &st.opt.kfac.w);

    for (std::size_t i = 0; i < st.envs.size(); ++i) {
        const std::string p = "env" + std::to_string(i);
        visit_f(p + ".state", &st.envs[i].raw_state());
        visit_u(p + ".counters", nullptr, &st.envs[i]);
    }
    visit_f("episode_return", &st.episode_return);
    visit_u("action_rng", &st.action_rng, nullptr);
    // reward window serialized via a scratch vector by the caller
}

}  // namespace ckpt

inline void save_checkpoint(TrainerState& st, const std::string& path) {
    std::vector<ckpt::Section> sections;
    auto visit_f = [&](const std::string& name, std::vector<double>* v) {
        ckpt::Section s;
        s.name = name;
        s.type = 0;
        s.f64 = *v;
        sections.push_back(std::move(s));
    };
    auto visit_u = [&](const std::string& name, Rng* rng, Env* env) {
        ckpt::Section s;
        s.name = name;
        s.type = 1;
        if (rng) s.u64.assign(rng->state(), rng->state() + 4);
        if (env) {
            s.u64 = {env->raw_steps(), env->raw_ax(), env->raw_ay(), env->raw_gx(), env->raw_gy()};
            s.u64.insert(s.u64.end(), env->rng().state(), env->rng().state() + 4);
        }
        sections.push_back(std::move(s));
    };
    ckpt::walk_state(st, visit_f, visit_u);
    {
        ckpt::Section s;
        s.name = "reward_window";
        s.type = 0;
        s.f64.assign(st.reward_window.begin(), st.reward_window.end());
        sections.push_back(std::move(s));
    }

    std::ofstream out(path, std::ios::binary);
    check(bool(out), "checkpoint: cannot write " + path);
    out.write(ckpt::kMagic, sizeof(ckpt::kMagic));
    ckpt::write_raw(out, ckpt::kVersion);
    const std::string cfg = st.cfg.serialize();
    ckpt::write_raw(out, std::uint64_t(cfg.size()));
    out.write(cfg.data(), std::streamsize(cfg.size()));
    ckpt::write_raw(out, std::uint64_t(st.iteration));
    ckpt::write_raw(out, std::uint64_t(st.timesteps));
    ckpt::write_raw(out, std::uint64_t(sections.size()));
    for (const auto& s : sections) {
        ckpt::write_raw(out, std::uint64_t(s.name.size()));
        out.write(s.name.data(), std::streamsize(s.name.size()));
        ckpt::write_raw(out, s.type);
        if (s.type == 0) {
            ckpt::write_raw(out, std::uint64_t(s.f64.size()));
            out.write(reinterpret_cast<const char*>(s.f64.data()),
                      std::streamsize(s.f64.size() * sizeof(double)));
        } else {
            ckpt::write_raw(out, std::uint64_t(s.u64.size()));
            out.write(reinterpret_cast<const char*>(s.u64.data()),
                      std::streamsize(s.u64.size() * sizeof(std::uint64_t)));
        }
    }
    check(bool(out), "checkpoint: write failed for " + path);
}

inline TrainerState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(bool(in), "checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    check(bool(in) && std::memcmp(magic, ckpt::kMagic, 8) == 0, "checkpoint: bad magic");
    const auto version = ckpt::read_raw<std::uint32_t>(in);
    check(version == ckpt::kVersion, "checkpoint: unsupported version");
    const auto cfg_len = ckpt::read_raw<std::uint64_t>(in);
    std::string cfg_text(cfg_len, '\0');
    in.read(cfg_text.data(), std::streamsize(cfg_len));
    std::istringstream cfg_in(cfg_text);
    TrainerState st = build(TrainConfig::parse(cfg_in));
    st.iteration = ckpt::read_raw<std::uint64_t>(in);
    st.timesteps = ckpt::read_raw<std::uint64_t>(in);

    const auto n_sections = ckpt::read_raw<std::uint64_t>(in);
    std::vector<ckpt::Section> sections(n_sections);
    for (auto& s : sections) {
        const auto name_len = ckpt::read_raw<std::uint64_t>(in);
        s.name.resize(name_len);
        in.read(s.name.data(), std::streamsize(name_len));
        s.type = ckpt::read_raw<std::uint8_t>(in);
        const auto count = ckpt::read_raw<std::uint64_t>(in);
        if (s.type == 0) {
            s.f64.resize(count);
            in.read(reinterpret_cast<char*>(s.f64.data()),
                    std::streamsize(count * sizeof(double)));
        } else {
            s.u64.resize(count);
            in.read(reinterpret_cast<char*>(s.u64.data()),
                    std::streamsize(count * sizeof(std::uint64_t)));
        }
        check(bool(in), "checkpoint: truncated section " + s.name);
    }

    std::size_t cursor = 0;
    auto next = [&](const std::string& name) -> ckpt::Section& {
        check(cursor < sections.size(), "checkpoint: missing section " + name);
        ckpt::Section& s = sections[cursor++];
        check(s.name == name, "checkpoint: expected section " + name + ", found " + s.name);
        return s;
    };
    auto visit_f = [&](const std::string& name, std::vector<double>* v) {
        ckpt::Section& s = next(name);
        check(s.type == 0, "checkpoint: type mismatch in " + name);
        *v = s.f64;
    };
    auto visit_u = [&](const std::string& name, Rng* rng, Env* env) {
        ckpt::Section& s = next(name);
        check(s.type == 1, "checkpoint: type mismatch in " + name);
        if (rng) {
            check(s.u64.size() == 4, "checkpoint: bad rng section " + name);
            std::copy(s.u64.begin(), s.u64.end(), rng->state());
        }
        if (env) {
            check(s.u64.size() == 9, "checkpoint: bad env section " + name);
            env->raw_steps() = s.u64[0];
            env->raw_ax() = s.u64[1];
            env->raw_ay() = s.u64[2];
            env->raw_gx() = s.u64[3];
            env->raw_gy() = s.u64[4];
            std::copy(s.u64.begin() + 5, s.u64.end(), env->rng().state());
        }
    };
    ckpt::walk_state(st, visit_f, visit_u);
    {
        ckpt::Section& s = next("reward_window");
        st.reward_window.assign(s.f64.begin(), s.f64.end());
    }
    for (auto& env : st.envs) env.rerender();
    return st;
}

}  // namespace rlsa2c
