#pragma once

// Stand-alone KKT residual evaluators for the two subproblems. They only use the formulas of
// core_model.hpp, never the solvers, so they can certify solver output.
//
// Conventions: stationarity residuals are divided by the largest term of the equation.
// Complementary slackness is reported as min(multiplier / natural scale, slack / constraint
// scale), which is zero when either factor vanishes. Primal and dual residuals are relative
// violations (positive parts only).

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "semcom/core_model.hpp"
#include "semcom/p3_solver.hpp"
#include "semcom/p4_types.hpp"

namespace semcom::oracle {

struct KktReport {
    double stationarity = 0.0;
    double slackness = 0.0;
    double primal = 0.0;
    double dual = 0.0;
    double time_equality = 0.0;  // P3 only: max relative gap between device time and deadline
    double beta_sum = 0.0;       // P3 only: |sum(beta) - w1|

    double worst() const noexcept { return std::max({stationarity, slackness, primal, dual}); }
    bool ok(double tol) const noexcept { return worst() <= tol; }
};

namespace detail {
inline double rel(double residual, std::initializer_list<double> terms) {
    double scale = 0.0;
    for (double t : terms) scale = std::max(scale, std::abs(t));
    if (scale == 0.0) return std::abs(residual);
    return std::abs(residual) / scale;
}
inline double pos(double x) { return x > 0.0 ? x : 0.0; }
inline double complement(double mult, double mult_scale, double slack, double slack_scale) {
    const double m = mult_scale > 0.0 ? std::abs(mult) / mult_scale : std::abs(mult);
    const double s = slack_scale > 0.0 ? std::abs(slack) / slack_scale : std::abs(slack);
    return std::min(m, s);
}
}  // namespace detail

inline KktReport kkt_residuals_p3(const Scenario& sc, std::span<const double> power, std::span<const double> bandwidth,
                                  const P3Solution& sol) {
    using detail::complement;
    using detail::pos;
    using detail::rel;
    KktReport rep;
    const double w1 = sc.system.weight_time;
    const double w2 = sc.system.weight_energy;
    const double kappa = sc.system.kappa;
    const double big_t = sol.deadline;
    double beta_sum = 0.0;
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& d = sc.devices[n];
        const double k1 = d.cycles_device * d.samples;
        const double k2 = d.cycles_bs * d.samples;
        const double f = sol.freq_device[n];
        const double h = sol.freq_bs[n];
        const double beta = sol.beta[n];
        const double alpha = sol.alpha[n];
        const double tau = sol.tau[n];
        beta_sum += beta;

        const double r = uplink_rate(power[n], bandwidth[n], d.gain, sc.system.noise_psd);
        const double t_up = d.payload_bits(sol.rho[n]) / r;
        const double t_dev = t_up + k1 / f + k2 / h;

        // d/df and d/dh of the Lagrangian.
        const double gf_energy = 2.0 * w2 * kappa * k1 * f;
        const double gf_time = beta * k1 / (f * f);
        const double gh_energy = 2.0 * w2 * kappa * k2 * h;
        const double gh_time = beta * k2 / (h * h);
        rep.stationarity = std::max(rep.stationarity, rel(gf_energy + alpha - gf_time, {gf_energy, alpha, gf_time}));
        rep.stationarity = std::max(rep.stationarity, rel(gh_energy + tau - gh_time, {gh_energy, tau, gh_time}));

        const double alpha_scale = std::max(gf_time, gf_energy);
        const double tau_scale = std::max(gh_time, gh_energy);
        rep.slackness = std::max(rep.slackness, complement(alpha, alpha_scale, d.f_max - f, d.f_max));
        rep.slackness = std::max(rep.slackness, complement(tau, tau_scale, d.h_max - h, d.h_max));
        rep.slackness = std::max(rep.slackness, complement(beta, w1, big_t - t_dev, big_t));

        rep.primal = std::max({rep.primal, pos(f - d.f_max) / d.f_max, pos(h - d.h_max) / d.h_max,
                               pos(t_dev - big_t) / big_t, pos(-f), pos(-h)});
        // Minimal feasible rho: PSNR at rho must reach the floor, rho inside its box.
        const double s = snr(power[n], bandwidth[n], d.gain, sc.system.noise_psd);
        const double q = sc.psnr_model(sol.rho[n], s);
        rep.primal = std::max({rep.primal, pos(d.psnr_min - q) / d.psnr_min, pos(d.rho_min - sol.rho[n]) / d.rho_min,
                               pos(sol.rho[n] - d.rho_max) / d.rho_max});

        rep.dual = std::max({rep.dual, pos(-alpha) / std::max(alpha_scale, 1e-300),
                             pos(-tau) / std::max(tau_scale, 1e-300), pos(-beta) / w1});
        rep.time_equality = std::max(rep.time_equality, std::abs(t_dev - big_t) / big_t);
    }
    rep.beta_sum = std::abs(beta_sum - w1);
    rep.stationarity = std::max(rep.stationarity, rep.beta_sum / std::max(w1, 1.0));
    return rep;
}

/// Residuals of the convex surrogate for fixed auxiliary variables (gamma, delta).
inline KktReport kkt_residuals_p7(const Scenario& sc, std::span<const double> rho, const P4Floors& floors,
                                  const AuxiliaryState& aux, const P7Point& pt) {
    using detail::complement;
    using detail::pos;
    using detail::rel;
    KktReport rep;
    const double n0 = sc.system.noise_psd;
    const double b_tot = sc.system.total_bandwidth;
    double b_sum = 0.0;
    double zeta_scale = 0.0;
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& d = sc.devices[n];
        const double p = pt.power[n];
        const double b = pt.bandwidth[n];
        const double a = d.payload_bits(rho[n]);
        const double g = d.gain;
        const double gamma = aux.gamma[n];
        const double delta = aux.delta[n];
        const double eta = pt.eta[n];
        const double nu = pt.nu[n];
        const double iota = pt.iota[n];
        const double smin = floors.snr[n];
        const double rmin = floors.rate[n];
        b_sum += b;

        const double s = snr(p, b, g, n0);
        const double r = uplink_rate(p, b, g, n0);
        const double dr_dp = b * g / ((n0 * b + p * g) * kLn2);
        const double dr_db = (std::log1p(s) - s / (1.0 + s)) / kLn2;
        const double w = gamma * delta + eta;

        // Lagrangian: gamma (a p - delta r) + zeta (sum B - Bt) + eta (rmin - r)
        //             + nu (N0 B Smin - p g) + iota (p - pmax)
        const double lp_terms[] = {gamma * a, w * dr_dp, nu * g, iota};
        rep.stationarity = std::max(rep.stationarity, rel(lp_terms[0] - lp_terms[1] - lp_terms[2] + lp_terms[3],
                                                          {lp_terms[0], lp_terms[1], lp_terms[2], lp_terms[3]}));
        const double lb_terms[] = {w * dr_db, pt.zeta, nu * n0 * smin};
        rep.stationarity = std::max(rep.stationarity, rel(-lb_terms[0] + lb_terms[1] + lb_terms[2],
                                                          {lb_terms[0], lb_terms[1], lb_terms[2]}));
        zeta_scale = std::max(zeta_scale, gamma * delta * dr_db);

        const double eta_scale = gamma * delta;
        const double nu_scale = gamma * a / g;
        const double iota_scale = gamma * a;
        rep.slackness = std::max(rep.slackness, complement(eta, eta_scale, r - rmin, std::max(rmin, r)));
        if (smin > 0.0) rep.slackness = std::max(rep.slackness, complement(nu, nu_scale, s - smin, smin));
        else rep.slackness = std::max(rep.slackness, nu / nu_scale);
        rep.slackness = std::max(rep.slackness, complement(iota, iota_scale, d.p_max - p, d.p_max));

        rep.primal = std::max({rep.primal, pos(p - d.p_max) / d.p_max, pos(-p), pos(-b)});
        if (rmin > 0.0) rep.primal = std::max(rep.primal, pos(rmin - r) / rmin);
        if (smin > 0.0) rep.primal = std::max(rep.primal, pos(smin - s) / smin);

        rep.dual = std::max({rep.dual, pos(-eta) / eta_scale, pos(-nu) / nu_scale, pos(-iota) / iota_scale});
    }
    rep.primal = std::max(rep.primal, pos(b_sum - b_tot) / b_tot);
    if (zeta_scale > 0.0) {
        rep.slackness = std::max(rep.slackness, complement(pt.zeta, zeta_scale, b_tot - b_sum, b_tot));
        rep.dual = std::max(rep.dual, pos(-pt.zeta) / zeta_scale);
    }
    return rep;
}

/// Fixed-point residual of the auxiliary variables: max over devices of |gamma r - w2| / w2 and |delta r - p a| / (p a).
inline double fixed_point_residual(const Scenario& sc, std::span<const double> rho, std::span<const double> power,
                                   std::span<const double> bandwidth, const AuxiliaryState& aux) {
    double worst = 0.0;
    const double w2 = sc.system.weight_energy;
    for (std::size_t n = 0; n < sc.size(); ++n) {
        const auto& d = sc.devices[n];
        const double r = uplink_rate(power[n], bandwidth[n], d.gain, sc.system.noise_psd);
        const double pa = power[n] * d.payload_bits(rho[n]);
        worst = std::max(worst, std::abs(aux.delta[n] * r - pa) / pa);
        if (w2 > 0.0) worst = std::max(worst, std::abs(aux.gamma[n] * r - w2) / w2);
    }
    return worst;
}

}  // namespace semcom::oracle
