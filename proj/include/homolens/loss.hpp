#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "homolens/dataset.hpp"
#include "homolens/errors.hpp"
#include "homolens/network.hpp"
#include "homolens/stats.hpp"

namespace homolens {

enum class LossKind { MaxMargin, PowerMaxMargin, Hinge, Example1 };

/// Loss selection. MaxMargin l(z) = max{-yz, 0} composed with an
/// H-homogeneous network is H-homogeneous in w; PowerMaxMargin(u) gives
/// degree H*u. Hinge is not homogeneous (kept for the ratio diagnostics).
/// Example1 bypasses the network entirely:
///   l(w) = (w_1^2 + 2 sum_{i>=2} w_i^2)^{3/2},
/// a 3-homogeneous function of the weight itself with known constants.
struct LossSpec {
    LossKind kind = LossKind::MaxMargin;
    double u = 1.0;         // PowerMaxMargin exponent
    int example1_dim = 2;   // Example1 weight dimension

    static LossSpec max_margin() { return {LossKind::MaxMargin, 1.0, 2}; }
    static LossSpec power_max_margin(double u) {
        if (!(u >= 1.0)) throw InvalidSpec("PowerMaxMargin exponent must be >= 1");
        return {LossKind::PowerMaxMargin, u, 2};
    }
    static LossSpec hinge() { return {LossKind::Hinge, 1.0, 2}; }
    static LossSpec example1(int dim) {
        if (dim < 2) throw InvalidSpec("Example1 dimension must be >= 2");
        return {LossKind::Example1, 1.0, dim};
    }
};

namespace detail {

// scalar link l(z; y) and derivative; kink derivative is 0
inline double link_value(const LossSpec& ls, double z, double y) {
    switch (ls.kind) {
        case LossKind::MaxMargin: {
            const double m = -y * z;
            return m > 0.0 ? m : 0.0;
        }
        case LossKind::PowerMaxMargin: {
            const double m = -y * z;
            return m > 0.0 ? std::pow(m, ls.u) : 0.0;
        }
        case LossKind::Hinge: {
            const double m = 1.0 - y * z;
            return m > 0.0 ? m : 0.0;
        }
        case LossKind::Example1: break;
    }
    throw InvalidSpec("link_value: Example1 has no prediction link");
}

inline double link_deriv(const LossSpec& ls, double z, double y) {
    switch (ls.kind) {
        case LossKind::MaxMargin:
            return -y * z > 0.0 ? -y : 0.0;
        case LossKind::PowerMaxMargin: {
            const double m = -y * z;
            return m > 0.0 ? -y * ls.u * std::pow(m, ls.u - 1.0) : 0.0;
        }
        case LossKind::Hinge:
            return 1.0 - y * z > 0.0 ? -y : 0.0;
        case LossKind::Example1: break;
    }
    throw InvalidSpec("link_deriv: Example1 has no prediction link");
}

} // namespace detail

/// A loss bound to its (optional) network. All evaluation goes through this:
/// value/gradient at arbitrary w, plus the sphere versions at v = w/|w|.
/// Pure functions of (spec, w, sample); safe to share across threads with a
/// per-thread workspace.
class LossContext {
public:
    LossContext(LossSpec loss, const NetworkSpec* net) : loss_(loss), net_(net) {
        if (loss_.kind != LossKind::Example1) {
            if (net_ == nullptr)
                throw InvalidSpec("this loss kind requires a network spec");
            net_->validate();
        }
    }

    static LossContext example1(int dim) {
        return LossContext(LossSpec::example1(dim), nullptr);
    }

    const LossSpec& loss() const { return loss_; }
    const NetworkSpec* network() const { return net_; }

    std::size_t weight_dim() const {
        return loss_.kind == LossKind::Example1
                   ? static_cast<std::size_t>(loss_.example1_dim)
                   : net_->weight_count();
    }

    bool homogeneous() const { return loss_.kind != LossKind::Hinge; }

    /// Total homogeneity degree of w -> loss(w; sample).
    double degree() const {
        switch (loss_.kind) {
            case LossKind::Example1: return 3.0;
            case LossKind::MaxMargin: return net_->declared_degree;
            case LossKind::PowerMaxMargin: return net_->declared_degree * loss_.u;
            case LossKind::Hinge:
                throw InvalidSpec("hinge loss is not homogeneous");
        }
        return 0.0;
    }

    /// True when the gradient is continuous (gamma = 0 candidates).
    bool smooth() const {
        switch (loss_.kind) {
            case LossKind::Example1: return true;
            case LossKind::PowerMaxMargin: {
                if (loss_.u <= 1.0) return false;
                for (const auto& l : net_->layers)
                    if (!l.activation.smooth()) return false;
                return true;
            }
            default: return false;
        }
    }

    double value(std::span<const double> w, const Sample& s, NetWorkspace& ws) const {
        if (loss_.kind == LossKind::Example1) return example1_value(w);
        const double z = forward(*net_, w, s.x, ws);
        return detail::link_value(loss_, z, s.y);
    }

    /// Gradient (and value) of the loss at w via the chain rule through Phi.
    double value_and_grad(std::span<const double> w, const Sample& s, NetWorkspace& ws,
                          std::span<double> grad_out) const {
        if (loss_.kind == LossKind::Example1) return example1_grad(w, grad_out);
        if (grad_out.size() != net_->weight_count())
            throw DimensionMismatch("gradient buffer has wrong length");
        const double z = grad(*net_, w, s.x, ws, grad_out);
        const double dl = detail::link_deriv(loss_, z, s.y);
        for (auto& g : grad_out) g *= dl;
        return detail::link_value(loss_, z, s.y);
    }

    double prediction(std::span<const double> w, const Sample& s, NetWorkspace& ws) const {
        if (loss_.kind == LossKind::Example1)
            throw InvalidSpec("Example1 has no prediction");
        return forward(*net_, w, s.x, ws);
    }

    double link_deriv_at(double z, double y) const { return detail::link_deriv(loss_, z, y); }

    // Example1 closed forms ---------------------------------------------------

    double example1_value(std::span<const double> w) const {
        check_dim(w);
        double q = w[0] * w[0];
        for (std::size_t i = 1; i < w.size(); ++i) q += 2.0 * w[i] * w[i];
        return std::pow(q, 1.5);
    }

    double example1_grad(std::span<const double> w, std::span<double> g) const {
        check_dim(w);
        if (g.size() != w.size()) throw DimensionMismatch("gradient buffer has wrong length");
        double q = w[0] * w[0];
        for (std::size_t i = 1; i < w.size(); ++i) q += 2.0 * w[i] * w[i];
        const double root = std::sqrt(q);
        g[0] = 3.0 * root * w[0];
        for (std::size_t i = 1; i < w.size(); ++i) g[i] = 6.0 * root * w[i];
        return q * root;
    }

    /// Cancellation-free l(v) - sigma_lower^2 for unit v (used by the
    /// separation experiment where the excess reaches ~1e-10).
    double example1_sphere_excess(std::span<const double> v) const {
        check_dim(v);
        double s = 0.0;
        for (std::size_t i = 1; i < v.size(); ++i) s += v[i] * v[i];
        return std::expm1(1.5 * std::log1p(s));
    }

private:
    void check_dim(std::span<const double> w) const {
        if (w.size() != weight_dim())
            throw DimensionMismatch("weight vector has wrong length");
    }

    LossSpec loss_;
    const NetworkSpec* net_;
};

// --- sphere evaluation -------------------------------------------------------

constexpr double kZeroWeightNorm = 1e-150;

inline void project_to_sphere(std::span<const double> w, std::vector<double>& v) {
    const double nu = detail::norm2(w);
    if (nu < kZeroWeightNorm) throw ZeroWeightNorm("weight norm below 1e-150");
    v.assign(w.begin(), w.end());
    for (auto& x : v) x /= nu;
}

/// Empirical sphere loss: mean_i l(w/|w|; x_i, y_i).
inline double sphere_loss(const LossContext& ctx, std::span<const double> w,
                          const Dataset& data, NetWorkspace& ws) {
    std::vector<double> v;
    project_to_sphere(w, v);
    if (ctx.loss().kind == LossKind::Example1) return ctx.example1_value(v);
    if (data.size() == 0) throw InvalidSpec("sphere_loss: empty dataset");
    KahanSum acc;
    for (const auto& s : data.samples) acc.add(ctx.value(v, s, ws));
    return acc.value() / static_cast<double>(data.size());
}

struct McEstimate {
    double mean = 0.0;
    double stderr_mean = 0.0;
    std::size_t samples = 0;
};

/// Population sphere loss by Monte Carlo over the task distribution.
inline McEstimate sphere_pop_loss(const LossContext& ctx, std::span<const double> w,
                                  const SyntheticTask& task, std::size_t n_mc,
                                  std::uint64_t seed, NetWorkspace& ws) {
    std::vector<double> v;
    project_to_sphere(w, v);
    if (ctx.loss().kind == LossKind::Example1)
        return {ctx.example1_value(v), 0.0, 0}; // deterministic, no data
    Rng rng(derive_seed(seed, 0x90b));
    MeanVar mv;
    for (std::size_t i = 0; i < n_mc; ++i) {
        const Sample s = task.draw(rng);
        mv.add(ctx.value(v, s, ws));
    }
    return {mv.mean(), mv.stderr_mean(), n_mc};
}

/// Gradient alignment ratio rho = l'(Phi(w)) / l'(Phi(v)). Equal to 1 for
/// MaxMargin whenever both points sit on the active branch; throws
/// UndefinedRatio when l'(Phi(v)) = 0 (the hinge "approximately overlap"
/// case is surfaced, never silently set to 1).
inline double rho_ratio(const LossContext& ctx, std::span<const double> w,
                        const Sample& s, NetWorkspace& ws) {
    if (ctx.loss().kind == LossKind::Example1) return 1.0;
    std::vector<double> v;
    project_to_sphere(w, v);
    const double zw = ctx.prediction(w, s, ws);
    const double zv = ctx.prediction(v, s, ws);
    const double dv = ctx.link_deriv_at(zv, s.y);
    if (dv == 0.0) throw UndefinedRatio("l'(Phi(v)) = 0");
    return ctx.link_deriv_at(zw, s.y) / dv;
}

} // namespace homolens
