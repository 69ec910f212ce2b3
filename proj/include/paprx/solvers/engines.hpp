// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "paprx/channel/model.hpp"
#include "paprx/errors.hpp"
#include "paprx/numerics/fft.hpp"
#include "paprx/prox/projections.hpp"
#include "paprx/waveform/grid.hpp"
#include "paprx/waveform/metrics.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace paprx {

enum class Engine { topadmm, badmm, dys, icf };
enum class SetMode { p3, p4 };

/// Which iterate the per-iteration set radii are taken from (P3 only).
enum class RadiusAnchor {
    split,  // PAPR radius from Z, ACLR radius from X
    xbar,   // both from X
};

inline const char* to_string(Engine e) {
    switch (e) {
        case Engine::topadmm: return "topadmm";
        case Engine::badmm: return "badmm";
        case Engine::dys: return "dys";
        case Engine::icf: return "icf";
    }
    return "?";
}

inline Engine engine_from_string(const std::string& s) {
    if (s == "topadmm") return Engine::topadmm;
    if (s == "badmm") return Engine::badmm;
    if (s == "dys") return Engine::dys;
    if (s == "icf") return Engine::icf;
    throw ParameterError("unknown engine '" + s + "' (expected topadmm, badmm, dys or icf)");
}

inline const char* to_string(SetMode m) { return m == SetMode::p3 ? "P3" : "P4"; }

inline SetMode mode_from_string(const std::string& s) {
    if (s == "P3" || s == "p3") return SetMode::p3;
    if (s == "P4" || s == "p4") return SetMode::p4;
    throw ParameterError("unknown set mode '" + s + "' (expected P3 or P4)");
}

inline const char* to_string(RadiusAnchor a) { return a == RadiusAnchor::split ? "split" : "xbar"; }

inline RadiusAnchor anchor_from_string(const std::string& s) {
    if (s == "split") return RadiusAnchor::split;
    if (s == "xbar") return RadiusAnchor::xbar;
    throw ParameterError("unknown radius anchor '" + s + "' (expected split or xbar)");
}

struct SolverConfig {
    Engine engine = Engine::topadmm;
    SetMode mode = SetMode::p3;
    RadiusAnchor anchor = RadiusAnchor::split;
    double tau = 1.945;
    double rho = 0.01;
    double badmm_rho_x = 1.0;
    double badmm_rho_z = 1.0;
    double dys_mu = 1.0;
    int max_iters = 1000;
    double gamma_par_db = 4.0;
    double psi_aclr_db = -50.0;
    double zeta = 0.0;
    double stop_tol = 1e-4;
    bool early_stop = true;
    double divergence_factor = 1e6;

    static SolverConfig defaults(Engine e) {
        SolverConfig c;
        c.engine = e;
        switch (e) {
            case Engine::topadmm: c.tau = 1.945; break;
            case Engine::badmm: c.tau = 0.01; c.rho = 0.01; c.badmm_rho_x = 1.0; c.badmm_rho_z = 1.0; break;
            case Engine::dys: c.tau = 1.945; c.dys_mu = 1.0; break;
            case Engine::icf: c.max_iters = 10; break;
        }
        return c;
    }

    void validate() const {
        if (max_iters < 1) throw ParameterError("solver: max_iters must be >= 1");
        if (!(zeta >= 0.0)) throw ParameterError("solver: zeta must be >= 0");
        if (!(stop_tol > 0.0)) throw ParameterError("solver: stop_tol must be > 0");
        if (!std::isfinite(gamma_par_db) || !std::isfinite(psi_aclr_db)) {
            throw ParameterError("solver: constraint targets must be finite");
        }
        switch (engine) {
            case Engine::topadmm:
                if (!(tau > 0.0)) throw ParameterError("topadmm: tau must be > 0");
                break;
            case Engine::badmm:
                if (!(tau > 0.0) || !(rho > 0.0) || !(badmm_rho_x > 0.0) || !(badmm_rho_z > 0.0)) {
                    throw ParameterError("badmm: tau, rho, rho_x and rho_z must be > 0");
                }
                break;
            case Engine::dys:
                if (!(tau > 0.0)) throw ParameterError("dys: tau must be > 0");
                if (!(dys_mu > 0.0)) throw ParameterError("dys: mu must be > 0");
                break;
            case Engine::icf: break;
        }
    }
};

struct MetricSnapshot {
    int iter = 0;
    double papr_db_max = 0.0;
    double txevm_wb = 0.0;
    double predevm_wb = 0.0;
    double estevm_wb = 0.0;
    double aclr_db_max = 0.0;
};

struct ResidualTrace {
    std::vector<double> primal;
    std::vector<double> dual;  // fixed-point residual for DYS
    std::vector<MetricSnapshot> snapshots;

    std::size_t size() const { return primal.size(); }
};

struct SolverState {
    ResourceGrid xbar;
    ResourceGrid zbar;
    ComplexMatrix lambda;  // scaled dual for TOP-ADMM, governing sequence for DYS
    int iter = 0;
    ResidualTrace residuals;
};

/// Snapshot hook: called after iteration `iter` (1-based) with the current state.
using IterationObserver = std::function<std::optional<MetricSnapshot>(int iter, const SolverState&)>;

struct SolverResult {
    ResourceGrid solution;  // Z at the last iteration
    SolverState state;
    std::vector<std::string> warnings;
    bool early_stopped = false;
};

struct Residuals {
    double primal = 0.0;
    double dual = 0.0;
};

inline Residuals residuals(const SolverState& prev, const SolverState& cur) {
    return {(cur.xbar.data - cur.zbar.data).norm(), (cur.xbar.data - prev.xbar.data).norm()};
}

/// Lipschitz constant of the mitigation-term gradient.
inline double gradient_lipschitz(const MitigationWeights& q, double zeta) { return q.max_eigenvalue() + zeta; }

namespace detail {

struct SetPair {
    PaprSetSpec papr;
    AclrSetSpec aclr;
};

class EngineLoop {
public:
    EngineLoop(const ResourceGrid& x0, const MitigationWeights& q, const SolverConfig& cfg, IterationObserver obs)
        : x0_(x0), q_(q), cfg_(cfg), obs_(std::move(obs)) {
        cfg_.validate();
        if (cfg_.engine == Engine::icf) throw ParameterError("ICF is not a splitting engine; use icf_run");
        x0_norm_ = x0.data.norm();
        if (!(x0_norm_ > 0.0)) throw ParameterError("solver: initial grid is all zero");
        fixed_ = SetPair{papr_set_from(x0, cfg.gamma_par_db), aclr_set_from(x0, cfg.psi_aclr_db)};
        state_.xbar = x0;
        state_.zbar = x0;
        state_.lambda = cfg.engine == Engine::dys ? x0.data : ComplexMatrix::Zero(x0.data.rows(), x0.data.cols());
    }

    SetPair sets() const {
        if (cfg_.mode == SetMode::p4) return fixed_;
        const ResourceGrid& papr_ref = cfg_.anchor == RadiusAnchor::split ? state_.zbar : state_.xbar;
        return {papr_set_from(papr_ref, cfg_.gamma_par_db), aclr_set_from(state_.xbar, cfg_.psi_aclr_db)};
    }

    ComplexMatrix grad(const ResourceGrid& at) const { return grad_h(at, x0_, q_, cfg_.zeta); }

    ResourceGrid grid(ComplexMatrix m) const { return ResourceGrid(x0_.layout, std::move(m)); }

    /// Records residuals, runs the divergence guard and observer; returns true to stop.
    bool finish_iteration(double primal, double dual) {
        ++state_.iter;
        state_.residuals.primal.push_back(primal);
        state_.residuals.dual.push_back(dual);
        const double limit = cfg_.divergence_factor * x0_norm_;
        if (!std::isfinite(primal) || !std::isfinite(dual) || primal > limit || dual > limit) {
            throw SolverFailure(std::string(to_string(cfg_.engine)) + " diverged at iteration " +
                                std::to_string(state_.iter) + ": primal " + std::to_string(primal) + ", dual " +
                                std::to_string(dual) + ", limit " + std::to_string(limit));
        }
        if (obs_) {
            if (auto snap = obs_(state_.iter, state_)) state_.residuals.snapshots.push_back(*snap);
        }
        const double tol = cfg_.stop_tol * x0_norm_;
        return cfg_.early_stop && primal < tol && dual < tol;
    }

    SolverResult result(bool early) {
        SolverResult r{state_.zbar, state_, std::move(warnings_), early};
        return r;
    }

    const ResourceGrid& x0_;
    const MitigationWeights& q_;
    SolverConfig cfg_;
    IterationObserver obs_;
    double x0_norm_ = 0.0;
    SetPair fixed_;
    SolverState state_;
    std::vector<std::string> warnings_;
};

}  // namespace detail

inline SolverResult topadmm_run(const ResourceGrid& x0, const MitigationWeights& q, const SolverConfig& cfg,
                                IterationObserver obs = {}) {
    detail::EngineLoop L(x0, q, cfg, std::move(obs));
    auto& s = L.state_;
    const double tau = L.cfg_.tau;
    for (int i = 0; i < L.cfg_.max_iters; ++i) {
        const auto sets = L.sets();
        const ComplexMatrix g = L.grad(s.zbar);
        ResourceGrid xn = proj_aclr_set(L.grid(s.zbar.data - s.lambda), sets.aclr);
        ResourceGrid zn = proj_papr_set(L.grid(xn.data - tau * g + s.lambda), sets.papr);
        s.lambda += xn.data - zn.data;
        const double primal = (xn.data - zn.data).norm();
        const double dual = (xn.data - s.xbar.data).norm();
        s.xbar = std::move(xn);
        s.zbar = std::move(zn);
        if (L.finish_iteration(primal, dual)) return L.result(true);
    }
    return L.result(false);
}

inline SolverResult badmm_run(const ResourceGrid& x0, const MitigationWeights& q, const SolverConfig& cfg,
                              IterationObserver obs = {}) {
    detail::EngineLoop L(x0, q, cfg, std::move(obs));
    auto& s = L.state_;
    const double rho = L.cfg_.rho;
    const double rx = L.cfg_.badmm_rho_x;
    const double rz = L.cfg_.badmm_rho_z;
    const double tau = L.cfg_.tau;
    for (int i = 0; i < L.cfg_.max_iters; ++i) {
        const auto sets = L.sets();
        const ComplexMatrix u = rx * s.xbar.data - L.grad(s.xbar) + rho * s.zbar.data - s.lambda;
        ResourceGrid xn = proj_aclr_set(L.grid(u / (rx + rho)), sets.aclr);
        const ComplexMatrix v = (rz * s.zbar.data - L.grad(s.zbar) + rho * xn.data + s.lambda) / (rz + rho);
        ResourceGrid zn = proj_papr_set(L.grid(v), sets.papr);
        s.lambda += tau * (xn.data - zn.data);
        const double primal = (xn.data - zn.data).norm();
        const double dual = (xn.data - s.xbar.data).norm();
        s.xbar = std::move(xn);
        s.zbar = std::move(zn);
        if (L.finish_iteration(primal, dual)) return L.result(true);
    }
    return L.result(false);
}

inline SolverResult dys_run(const ResourceGrid& x0, const MitigationWeights& q, const SolverConfig& cfg,
                            IterationObserver obs = {}) {
    detail::EngineLoop L(x0, q, cfg, std::move(obs));
    auto& s = L.state_;
    const double tau = L.cfg_.tau;
    const double mu = L.cfg_.dys_mu;
    const double lip = gradient_lipschitz(q, L.cfg_.zeta);
    if (lip > 0.0 && !(tau < 2.0 / lip)) {
        L.warnings_.push_back("dys: tau = " + std::to_string(tau) + " outside (0, 2/L) with L = " + std::to_string(lip));
    }
    for (int i = 0; i < L.cfg_.max_iters; ++i) {
        const auto sets = L.sets();
        ResourceGrid xn = proj_aclr_set(L.grid(s.lambda), sets.aclr);
        ResourceGrid zn = proj_papr_set(L.grid(2.0 * xn.data - s.lambda - tau * L.grad(xn)), sets.papr);
        const ComplexMatrix step = mu * (zn.data - xn.data);
        s.lambda += step;
        const double primal = (xn.data - zn.data).norm();
        const double dual = step.norm();
        s.xbar = std::move(xn);
        s.zbar = std::move(zn);
        if (L.finish_iteration(primal, dual)) return L.result(true);
    }
    return L.result(false);
}

inline SolverResult solve(const ResourceGrid& x0, const MitigationWeights& q, const SolverConfig& cfg,
                          IterationObserver obs = {}) {
    switch (cfg.engine) {
        case Engine::topadmm: return topadmm_run(x0, q, cfg, std::move(obs));
        case Engine::badmm: return badmm_run(x0, q, cfg, std::move(obs));
        case Engine::dys: return dys_run(x0, q, cfg, std::move(obs));
        case Engine::icf: break;
    }
    throw ParameterError("solve: ICF has no splitting state; use icf_run");
}

/// Iterative clipping and filtering. The clip level follows the mean power of the current iterate.
inline ResourceGrid icf_run(const ResourceGrid& x0, double gamma_par_db, int iters) {
    if (iters < 1) throw ParameterError("icf_run: iters must be >= 1");
    const auto n = x0.total_bins();
    const FftPlan& plan = fft_plan(n);
    const double g = db_to_lin(gamma_par_db);
    ResourceGrid cur = x0;
    std::vector<cplx> buf(n);
    for (int it = 0; it < iters; ++it) {
        for (Eigen::Index j = 0; j < cur.n_tx(); ++j) {
            auto row = row_span(cur.data, j);
            std::copy(row.begin(), row.end(), buf.begin());
            plan.inverse(buf);
            double p = 0.0;
            for (const auto& v : buf) p += std::norm(v);
            p /= static_cast<double>(n);
            proj_linf_ball_inplace(buf, std::sqrt(g * p));
            plan.forward(buf);
            std::copy(buf.begin(), buf.end(), row.begin());
            for (std::size_t k : cur.layout.guard()) cur.data(j, static_cast<Eigen::Index>(k)) = cplx(0.0, 0.0);
        }
    }
    return cur;
}

struct KktReport {
    double primal_gap = 0.0;           // ||X - Z|| / ||x0||
    double stationarity_u = 0.0;       // ||X - proj_U(X - dual)|| / ||x0||
    double stationarity_p = 0.0;       // ||Z - proj_P(Z - grad h(Z) + dual)|| / ||x0||
    std::vector<double> papr_slack_db;  // papr_db(Z) - target, per antenna
    std::vector<double> aclr_slack_db;  // aclr_db(X) - target, per antenna
};

inline KktReport kkt_check(const SolverState& st, const ResourceGrid& x0, const MitigationWeights& q,
                           const SolverConfig& cfg) {
    KktReport r;
    const double nx0 = x0.data.norm();
    if (!(nx0 > 0.0)) throw ParameterError("kkt_check: initial grid is all zero");
    r.primal_gap = (st.xbar.data - st.zbar.data).norm() / nx0;

    const ComplexMatrix gx = grad_h(st.xbar, x0, q, cfg.zeta);
    const ComplexMatrix gz = grad_h(st.zbar, x0, q, cfg.zeta);
    ComplexMatrix dual;
    switch (cfg.engine) {
        case Engine::topadmm: dual = st.lambda / cfg.tau; break;
        case Engine::dys: dual = (st.xbar.data - st.lambda) / cfg.tau; break;
        case Engine::badmm: dual = 0.5 * (gx + st.lambda); break;
        case Engine::icf: dual = ComplexMatrix::Zero(x0.data.rows(), x0.data.cols()); break;
    }
    const ResourceGrid& papr_ref = cfg.mode == SetMode::p4 ? x0 : (cfg.anchor == RadiusAnchor::split ? st.zbar : st.xbar);
    const ResourceGrid& aclr_ref = cfg.mode == SetMode::p4 ? x0 : st.xbar;
    const auto papr = papr_set_from(papr_ref, cfg.gamma_par_db);
    const auto aclr = aclr_set_from(aclr_ref, cfg.psi_aclr_db);
    const ResourceGrid pu = proj_aclr_set(ResourceGrid(x0.layout, st.xbar.data - dual), aclr);
    const ResourceGrid pp = proj_papr_set(ResourceGrid(x0.layout, st.zbar.data - gz + dual), papr);
    r.stationarity_u = (st.xbar.data - pu.data).norm() / nx0;
    r.stationarity_p = (st.zbar.data - pp.data).norm() / nx0;

    const TimeSignal tz = to_time(st.zbar);
    for (Eigen::Index j = 0; j < x0.n_tx(); ++j) {
        r.papr_slack_db.push_back(papr_db(tz, j) - cfg.gamma_par_db);
        r.aclr_slack_db.push_back(aclr_db(st.xbar, j) - cfg.psi_aclr_db);
    }
    return r;
}

}  // namespace paprx
