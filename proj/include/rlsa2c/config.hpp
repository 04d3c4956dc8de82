#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "rlsa2c/core.hpp"

namespace rlsa2c {

enum class Algo { RmsA2C, RlsSA2C, RlsNA2C };

inline Algo algo_from_string(const std::string& s) {
    if (s == "rmsa2c") return Algo::RmsA2C;
    if (s == "rlssa2c") return Algo::RlsSA2C;
    if (s == "rlsna2c") return Algo::RlsNA2C;
    throw std::invalid_argument("unknown algorithm: " + s);
}

inline std::string algo_to_string(Algo a) {
    switch (a) {
        case Algo::RmsA2C: return "rmsa2c";
        case Algo::RlsSA2C: return "rlssa2c";
        default: return "rlsna2c";
    }
}

/// Full hyperparameter record. Defaults follow the reference settings for the
/// discrete-control experiments; per-run overrides come from a flat
/// key=value config file and CLI flags (CLI wins).
struct TrainConfig {
    std::string algorithm = "rlssa2c";
    std::string env = "cartpole_lite";
    std::size_t n_workers = 32;
    std::size_t t_steps = 5;
    std::size_t total_timesteps = 100000;
    double gamma = 0.99;
    double eta = 0.01;           // entropy regularization factor
    double lambda = 1.0;         // forgetting factor
    double beta = 0.5;           // momentum factor (RLSSA2C only)
    // k_t / mu_t schedules
    double k0 = 0.1, dk = 0.02, k_min = 0.01;
    double mu0 = 5.0, dmu = 0.1, mu_min = 1.0;
    std::size_t t_delta = 5000;
    double mu_fc = 1.0;          // mu for fc layers (fixed, conv layers use the schedule)
    // RMSProp
    double rms_eps = 0.00025, rms_rho = 0.99, rms_delta = 0.00005;
    // NPG learning-rate schedule (actor output layer of RLSNA2C)
    double alpha_init = 0.01, alpha_decrement = 0.002, alpha_floor = 0.001;
    std::size_t alpha_period = 5000;
    double clip_norm = 0.5;
    std::uint64_t seed = 1;
    std::string entropy_mode = "full";  // full | sampled
    bool literal_gw_sign = false;
    std::string log_path;        // empty: derived from log dir + run name
    std::string checkpoint_path;

    void validate() const {
        algo_from_string(algorithm);
        check(gamma > 0.0 && gamma <= 1.0, "config: gamma must be in (0,1]");
        check(lambda > 0.0 && lambda <= 1.0, "config: lambda must be in (0,1]");
        check(eta >= 0.0, "config: eta must be >= 0");
        check(n_workers >= 1 && t_steps >= 1, "config: N and T must be >= 1");
        check(beta >= 0.0 && beta < 1.0, "config: beta must be in [0,1)");
        check(entropy_mode == "full" || entropy_mode == "sampled",
              "config: entropy_mode must be full or sampled");
        check(clip_norm > 0.0, "config: clip_norm must be > 0");
        check(t_delta >= 1 && alpha_period >= 1, "config: schedule periods must be >= 1");
    }

    void set(const std::string& key, const std::string& value) {
        auto d = [&] { return std::stod(value); };
        auto u = [&] { return std::stoull(value); };
        if (key == "algorithm") algorithm = value;
        else if (key == "env") env = value;
        else if (key == "n_workers") n_workers = u();
        else if (key == "t_steps") t_steps = u();
        else if (key == "total_timesteps") total_timesteps = u();
        else if (key == "gamma") gamma = d();
        else if (key == "eta") eta = d();
        else if (key == "lambda") lambda = d();
        else if (key == "beta") beta = d();
        else if (key == "k0") k0 = d();
        else if (key == "dk") dk = d();
        else if (key == "k_min") k_min = d();
        else if (key == "mu0") mu0 = d();
        else if (key == "dmu") dmu = d();
        else if (key == "mu_min") mu_min = d();
        else if (key == "t_delta") t_delta = u();
        else if (key == "mu_fc") mu_fc = d();
        else if (key == "rms_eps") rms_eps = d();
        else if (key == "rms_rho") rms_rho = d();
        else if (key == "rms_delta") rms_delta = d();
        else if (key == "alpha_init") alpha_init = d();
        else if (key == "alpha_decrement") alpha_decrement = d();
        else if (key == "alpha_floor") alpha_floor = d();
        else if (key == "alpha_period") alpha_period = u();
        else if (key == "clip_norm") clip_norm = d();
        else if (key == "seed") seed = u();
        else if (key == "entropy_mode") entropy_mode = value;
        else if (key == "literal_gw_sign") literal_gw_sign = (value == "1" || value == "true");
        else if (key == "log_path") log_path = value;
        else if (key == "checkpoint_path") checkpoint_path = value;
        else throw std::invalid_argument("unknown config key: " + key);
    }

    std::string serialize() const {
        std::ostringstream out;
        out.precision(17);
        out << "algorithm=" << algorithm << "\nenv=" << env << "\nn_workers=" << n_workers
            << "\nt_steps=" << t_steps << "\ntotal_timesteps=" << total_timesteps
            << "\ngamma=" << gamma << "\neta=" << eta << "\nlambda=" << lambda
            << "\nbeta=" << beta << "\nk0=" << k0 << "\ndk=" << dk << "\nk_min=" << k_min
            << "\nmu0=" << mu0 << "\ndmu=" << dmu << "\nmu_min=" << mu_min
            << "\nt_delta=" << t_delta << "\nmu_fc=" << mu_fc << "\nrms_eps=" << rms_eps
            << "\nrms_rho=" << rms_rho << "\nrms_delta=" << rms_delta
            << "\nalpha_init=" << alpha_init << "\nalpha_decrement=" << alpha_decrement
            << "\nalpha_floor=" << alpha_floor << "\nalpha_period=" << alpha_period
            << "\nclip_norm=" << clip_norm << "\nseed=" << seed
            << "\nentropy_mode=" << entropy_mode
            << "\nliteral_gw_sign=" << (literal_gw_sign ? 1 : 0) << "\nlog_path=" << log_path
            << "\ncheckpoint_path=" << checkpoint_path << "\n";
        return out.str();
    }

    static TrainConfig parse(std::istream& in) {
        TrainConfig cfg;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            check(eq != std::string::npos, "config: malformed line: " + line);
            cfg.set(line.substr(0, eq), line.substr(eq + 1));
        }
        return cfg;
    }

    static TrainConfig load(const std::string& path) {
        std::ifstream in(path);
        check(bool(in), "config: cannot open " + path);
        return parse(in);
    }
};

}  // namespace rlsa2c
