#include "neem/girsanov.hpp"

#include <cmath>

namespace neem {

Vec delta(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen) {
    if (!model.has_nonlinear()) return Vec::Zero(model.dof);
    return frozen - nonlinear_at(model, t, s);
}

Vec gamma(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen) {
    return gamma_direct(model, t, s, frozen);
}

Vec q_drift(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen) {
    Vec g = linear_velocity(model, s) + forcing_at(model, t);
    if (frozen.size() == model.dof) g += frozen;
    return g;
}

GirsanovEvaluator::GirsanovEvaluator(const OscillatorModel& model, PhiForm form) : model_(model), form_(form) {
    jet_.reset(model.dof, model.channels);
}

PointTerms GirsanovEvaluator::eval(double t, const PathState& s, const Vec& frozen, const Vec& b,
                                   Vec* phi_out) {
    const int n = model_.channels;
    PointTerms out;
    if (phi_out) *phi_out = Vec::Zero(n);
    if (!model_.has_nonlinear()) return out;
    gamma_jet(model_, t, s, frozen, jet_);
    Mat f = diffusion_at(model_, t, s);
    Vec gq = q_drift(model_, t, s, frozen);
    const Vec& x2 = s.x2;
    for (int k = 0; k < n; ++k) {
        const Vec fk = f.col(k);
        const double g = jet_.gamma(k);
        const double bk = b(k);
        const Vec d22f = jet_.d22[k] * fk;
        const Vec d12f = jet_.d12[k] * fk;
        const double h = jet_.d2[k].dot(fk);
        const double hp = fk.dot(d22f);
        const double ah = x2.dot(d12f) + gq.dot(d22f);
        double p = 0.0, bnd = 0.0;
        if (form_ == PhiForm::Ito) {
            double ito = 0.0;
            for (int l = 0; l < f.cols(); ++l) ito += f.col(l).dot(jet_.d22[k] * f.col(l));
            const double a = jet_.d1[k].dot(x2) + jet_.d2[k].dot(gq) + 0.5 * ito;
            p = bk * a + 0.5 * h - 0.5 * bk * bk * ah - 0.5 * bk * hp + 0.5 * g * g;
            bnd = g * bk - 0.5 * bk * bk * h + bk * bk * bk * hp / 6.0;
        } else {
            p = -h - bk * jet_.d1[k].dot(x2) - bk * jet_.d2[k].dot(gq) - 0.5 * bk * d22f.sum() +
                bk * bk * x2.dot(d12f) + bk * bk * gq.dot(d22f) + bk * d22f.dot(fk) - 0.5 * g * g;
            bnd = g * bk - bk * bk * h;
        }
        if (phi_out) (*phi_out)(k) = p;
        out.phi += p;
        out.boundary += bnd;
    }
    return out;
}

double GirsanovEvaluator::boundary(double t, const PathState& s, const Vec& frozen, const Vec& b) {
    return eval(t, s, frozen, b).boundary;
}

Vec phi(const OscillatorModel& model, double t, const PathState& s, const Vec& frozen, const Vec& b_tilde,
        PhiForm form) {
    GirsanovEvaluator ev(model, form);
    Vec out;
    ev.eval(t, s, frozen, b_tilde, &out);
    return out;
}

double lambda1(const OscillatorModel& model, double t_r, const PathState& s_r, const Vec& b_r, double t_i,
               const PathState& s_i, const Vec& b_i, const Vec& frozen, PhiForm form) {
    GirsanovEvaluator ev(model, form);
    double hi = ev.boundary(t_i, s_i, frozen, b_i);
    double lo = ev.boundary(t_r, s_r, frozen, b_r);
    return hi - lo;
}

double lambda2_log_integral(std::span<const double> phi, double dt_sub) {
    if (phi.size() < 2) return 0.0;
    double s = 0.5 * (phi.front() + phi.back());
    for (std::size_t r = 1; r + 1 < phi.size(); ++r) s += phi[r];
    return -s * dt_sub;
}

double discrete_log_radon_nikodym(std::span<const double> gammas, std::span<const double> dx, double dt) {
    if (gammas.size() != dx.size()) throw ConfigError("gamma and increment sequences differ in length");
    double acc = 0.0;
    for (std::size_t i = 0; i < gammas.size(); ++i) acc += gammas[i] * dx[i] - 0.5 * gammas[i] * gammas[i] * dt;
    return acc;
}

double discrete_radon_nikodym(std::span<const double> gammas, std::span<const double> dx, double dt) {
    return std::exp(discrete_log_radon_nikodym(gammas, dx, dt));
}

}  // namespace neem
