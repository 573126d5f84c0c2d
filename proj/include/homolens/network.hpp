#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "homolens/activation.hpp"
#include "homolens/errors.hpp"
#include "homolens/rng.hpp"

#include <json.hpp>

namespace homolens {

enum class LayerKind { Normalized, Unnormalized };
enum class NormMode { Frobenius, RowWise };
enum class Connection { Plain, Residual };

/// One layer of the homogeneity construction. Both kinds apply the
/// activation to the layer input and then multiply by the weight matrix:
///   unnormalized:  a' = W sigma(a)
///   normalized:    a' = (W/|W|) sigma(a)      (0-homogeneous in W)
/// RowWise normalization divides each row by its own norm, which preserves
/// the input scale; Frobenius divides the whole matrix by its norm.
struct LayerSpec {
    LayerKind kind = LayerKind::Unnormalized;
    Activation activation = Activation::relu();
    int in_dim = 0;
    int out_dim = 0;
    NormMode norm_mode = NormMode::RowWise;     // normalized layers only
    Connection connection = Connection::Plain;  // normalized layers only

    static LayerSpec unnormalized(Activation act, int in, int out) {
        LayerSpec s;
        s.kind = LayerKind::Unnormalized;
        s.activation = act;
        s.in_dim = in;
        s.out_dim = out;
        return s;
    }
    static LayerSpec normalized(Activation act, int in, int out,
                                NormMode mode = NormMode::RowWise,
                                Connection conn = Connection::Plain) {
        LayerSpec s;
        s.kind = LayerKind::Normalized;
        s.activation = act;
        s.in_dim = in;
        s.out_dim = out;
        s.norm_mode = mode;
        s.connection = conn;
        return s;
    }

    std::size_t weight_count() const {
        return static_cast<std::size_t>(in_dim) * static_cast<std::size_t>(out_dim);
    }
};

/// Layered H-homogeneous network description (normalized layers first, then
/// unnormalized ones). declared_degree must match the degree implied by the
/// unnormalized stack: H = sum over unnormalized layers of the product of
/// the activation degrees of the *later* unnormalized layers.
struct NetworkSpec {
    std::vector<LayerSpec> layers;
    double declared_degree = 0.0;

    static double computed_degree(const std::vector<LayerSpec>& layers) {
        // deg(a_{k+1}) = 1 + u_k * deg(a_k) through the unnormalized stack
        double deg = 0.0;
        for (const auto& l : layers) {
            if (l.kind == LayerKind::Normalized) continue;
            deg = 1.0 + l.activation.degree() * deg;
        }
        return deg;
    }

    void validate() const {
        if (layers.empty()) throw InvalidSpec("network needs at least one layer");
        bool seen_unnormalized = false;
        int prev_out = layers.front().in_dim;
        for (const auto& l : layers) {
            if (l.in_dim <= 0 || l.out_dim <= 0)
                throw InvalidSpec("layer dimensions must be positive");
            if (l.in_dim != prev_out)
                throw DimensionMismatch("layer input dim does not match previous output");
            prev_out = l.out_dim;
            if (l.kind == LayerKind::Unnormalized) {
                seen_unnormalized = true;
                if (!l.activation.positively_homogeneous())
                    throw InvalidSpec("unnormalized layers require a homogeneous activation");
            } else {
                if (seen_unnormalized)
                    throw InvalidSpec("all normalized layers must precede unnormalized ones");
                if (l.connection == Connection::Residual && l.in_dim != l.out_dim)
                    throw InvalidSpec("residual connection requires in_dim == out_dim");
            }
        }
        if (layers.back().out_dim != 1)
            throw InvalidSpec("final layer must produce a scalar output");
        if (!seen_unnormalized)
            throw InvalidSpec("network needs at least one unnormalized layer");
        const double expect = computed_degree(layers);
        if (std::abs(declared_degree - expect) > 1e-9)
            throw InvalidSpec("declared_degree " + std::to_string(declared_degree) +
                              " does not match construction degree " + std::to_string(expect));
    }

    int input_dim() const { return layers.front().in_dim; }

    std::size_t weight_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.weight_count();
        return n;
    }

    /// Flat offsets per layer; the flat vector is a bijection onto the
    /// row-major matrix entries and |w| below is its Euclidean norm.
    std::vector<std::size_t> layout() const {
        std::vector<std::size_t> off(layers.size() + 1, 0);
        for (std::size_t k = 0; k < layers.size(); ++k)
            off[k + 1] = off[k] + layers[k].weight_count();
        return off;
    }

    nlohmann::json to_json() const;
    static NetworkSpec from_json(const nlohmann::json& j);
};

namespace detail {

inline double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

constexpr double kZeroLayerNorm = 1e-300;

} // namespace detail

/// Scratch buffers for forward/backward passes; reuse across calls to avoid
/// per-step allocation. Not thread-safe; use one per thread.
struct NetWorkspace {
    std::vector<std::vector<double>> input;  // a_k, per layer
    std::vector<std::vector<double>> acted;  // sigma(a_k)
    std::vector<std::vector<double>> g_in;   // gradient buffers
    std::vector<std::vector<double>> g_out;

    void resize_for(const NetworkSpec& spec) {
        const std::size_t n = spec.layers.size();
        input.resize(n);
        acted.resize(n);
        g_in.resize(n);
        g_out.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            input[k].resize(spec.layers[k].in_dim);
            acted[k].resize(spec.layers[k].in_dim);
            g_in[k].resize(spec.layers[k].in_dim);
            g_out[k].resize(spec.layers[k].out_dim);
        }
    }
};

namespace detail {

inline void layer_forward(const LayerSpec& l, std::span<const double> W,
                          std::span<const double> a, std::span<double> acted,
                          std::span<double> out) {
    const int in = l.in_dim, on = l.out_dim;
    for (int j = 0; j < in; ++j) acted[j] = l.activation(a[j]);
    if (l.kind == LayerKind::Unnormalized) {
        for (int i = 0; i < on; ++i) {
            double s = 0.0;
            const double* row = W.data() + static_cast<std::size_t>(i) * in;
            for (int j = 0; j < in; ++j) s += row[j] * acted[j];
            out[i] = s;
        }
        return;
    }
    if (l.norm_mode == NormMode::Frobenius) {
        const double nu = norm2(W);
        if (nu < kZeroLayerNorm)
            throw ZeroNormalizedLayer("normalized layer has (near-)zero Frobenius norm");
        for (int i = 0; i < on; ++i) {
            double s = 0.0;
            const double* row = W.data() + static_cast<std::size_t>(i) * in;
            for (int j = 0; j < in; ++j) s += row[j] * acted[j];
            out[i] = s / nu;
        }
    } else {
        for (int i = 0; i < on; ++i) {
            const double* row = W.data() + static_cast<std::size_t>(i) * in;
            const double nu = norm2({row, static_cast<std::size_t>(in)});
            if (nu < kZeroLayerNorm)
                throw ZeroNormalizedLayer("normalized layer has a (near-)zero row norm");
            double s = 0.0;
            for (int j = 0; j < in; ++j) s += row[j] * acted[j];
            out[i] = s / nu;
        }
    }
    if (l.connection == Connection::Residual)
        for (int i = 0; i < on; ++i) out[i] += a[i];
}

} // namespace detail

/// Evaluates Phi(w; x). Positively H-homogeneous in w with
/// H = spec.declared_degree: Phi(c w; x) = c^H Phi(w; x) for all c > 0.
inline double forward(const NetworkSpec& spec, std::span<const double> w,
                      std::span<const double> x, NetWorkspace& ws) {
    if (w.size() != spec.weight_count())
        throw DimensionMismatch("flat weight vector has wrong length");
    if (static_cast<int>(x.size()) != spec.input_dim())
        throw DimensionMismatch("input vector has wrong length");
    ws.resize_for(spec);
    const auto off = spec.layout();
    std::span<const double> a = x;
    for (std::size_t k = 0; k < spec.layers.size(); ++k) {
        const auto& l = spec.layers[k];
        std::copy(a.begin(), a.end(), ws.input[k].begin());
        detail::layer_forward(l, w.subspan(off[k], l.weight_count()), ws.input[k],
                              ws.acted[k], ws.g_out[k]); // g_out doubles as output buf
        a = std::span<const double>(ws.g_out[k].data(), ws.g_out[k].size());
    }
    return a[0];
}

/// Exact reverse-mode gradient of forward with respect to the flat weights,
/// including the quotient rule through normalized layers. Also returns the
/// forward value. grad_out must have spec.weight_count() entries.
inline double grad(const NetworkSpec& spec, std::span<const double> w,
                   std::span<const double> x, NetWorkspace& ws,
                   std::span<double> grad_out) {
    if (grad_out.size() != spec.weight_count())
        throw DimensionMismatch("gradient buffer has wrong length");
    const double value = forward(spec, w, x, ws); // fills input/acted buffers
    const auto off = spec.layout();
    const std::size_t n_layers = spec.layers.size();

    // upstream holds dPhi/d(layer output); start from the scalar output
    std::vector<double> upstream(1, 1.0);
    for (std::size_t kk = n_layers; kk-- > 0;) {
        const auto& l = spec.layers[kk];
        const int in = l.in_dim, on = l.out_dim;
        std::span<const double> W = w.subspan(off[kk], l.weight_count());
        std::span<double> dW = grad_out.subspan(off[kk], l.weight_count());
        const auto& a = ws.input[kk];
        const auto& s = ws.acted[kk];
        std::vector<double>& da = ws.g_in[kk];
        std::fill(da.begin(), da.end(), 0.0);

        if (l.kind == LayerKind::Unnormalized) {
            for (int i = 0; i < on; ++i) {
                const double g = upstream[i];
                const double* row = W.data() + static_cast<std::size_t>(i) * in;
                double* drow = dW.data() + static_cast<std::size_t>(i) * in;
                for (int j = 0; j < in; ++j) {
                    drow[j] = g * s[j];
                    da[j] += g * row[j];
                }
            }
        } else if (l.norm_mode == NormMode::Frobenius) {
            const double nu = detail::norm2(W);
            // y = W s / nu ; dy/dW_pq = delta_ip s_q/nu - y_i W_pq/nu^2
            double g_dot_y = 0.0;
            std::vector<double> y(on, 0.0);
            for (int i = 0; i < on; ++i) {
                const double* row = W.data() + static_cast<std::size_t>(i) * in;
                double acc = 0.0;
                for (int j = 0; j < in; ++j) acc += row[j] * s[j];
                y[i] = acc / nu;
                g_dot_y += upstream[i] * y[i];
            }
            for (int i = 0; i < on; ++i) {
                const double g = upstream[i];
                const double* row = W.data() + static_cast<std::size_t>(i) * in;
                double* drow = dW.data() + static_cast<std::size_t>(i) * in;
                for (int j = 0; j < in; ++j) {
                    drow[j] = g * s[j] / nu - g_dot_y * row[j] / (nu * nu);
                    da[j] += g * row[j] / nu;
                }
            }
        } else {
            for (int i = 0; i < on; ++i) {
                const double g = upstream[i];
                const double* row = W.data() + static_cast<std::size_t>(i) * in;
                double* drow = dW.data() + static_cast<std::size_t>(i) * in;
                const double nu = detail::norm2({row, static_cast<std::size_t>(in)});
                double y_i = 0.0;
                for (int j = 0; j < in; ++j) y_i += row[j] * s[j];
                y_i /= nu;
                for (int j = 0; j < in; ++j) {
                    drow[j] = g * (s[j] - y_i * row[j] / nu) / nu;
                    da[j] += g * row[j] / nu;
                }
            }
        }
        // chain through the activation into the layer input
        for (int j = 0; j < in; ++j) da[j] *= l.activation.deriv(a[j]);
        if (l.kind == LayerKind::Normalized && l.connection == Connection::Residual)
            for (int i = 0; i < on; ++i) da[i] += upstream[i]; // identity path
        upstream.assign(da.begin(), da.end());
    }
    return value;
}

struct HomogeneityReport {
    double max_rel_error = 0.0;
};

constexpr double kEpsAbs = 1e-12; // relative-error denominator guard

/// Checks |Phi(c w; x) - c^H Phi(w; x)| / (|c^H Phi(w;x)| + eps) over scales.
inline HomogeneityReport verify_homogeneity(const NetworkSpec& spec,
                                            std::span<const double> w,
                                            std::span<const double> x,
                                            std::span<const double> scales,
                                            NetWorkspace& ws) {
    if (scales.empty()) throw InvalidSpec("verify_homogeneity: scales must be nonempty");
    for (double c : scales)
        if (!(c > 0.0)) throw InvalidSpec("verify_homogeneity: scales must be positive");
    const double base = forward(spec, w, x, ws);
    std::vector<double> scaled(w.size());
    HomogeneityReport rep;
    for (double c : scales) {
        for (std::size_t i = 0; i < w.size(); ++i) scaled[i] = c * w[i];
        const double lhs = forward(spec, scaled, x, ws);
        const double rhs = std::pow(c, spec.declared_degree) * base;
        const double rel = std::abs(lhs - rhs) / (std::abs(rhs) + kEpsAbs);
        rep.max_rel_error = std::max(rep.max_rel_error, rel);
    }
    return rep;
}

/// i.i.d. Gaussian entries rescaled so that |w| = 1 exactly.
inline std::vector<double> gaussian_unit_weights(const NetworkSpec& spec, Rng& rng) {
    std::vector<double> w(spec.weight_count());
    for (auto& v : w) v = rng.normal();
    const double nu = detail::norm2(w);
    for (auto& v : w) v /= nu;
    return w;
}

// --- JSON (external interface) ---------------------------------------------

inline nlohmann::json NetworkSpec::to_json() const {
    nlohmann::json j;
    j["degree"] = declared_degree;
    j["layers"] = nlohmann::json::array();
    for (const auto& l : layers) {
        nlohmann::json jl;
        jl["kind"] = l.kind == LayerKind::Normalized ? "normalized" : "unnormalized";
        jl["activation"] = l.activation.name();
        nlohmann::json params = nlohmann::json::object();
        if (l.activation.kind == ActKind::LeakyReLU) params["slope"] = l.activation.param;
        if (l.activation.kind == ActKind::PowerReLU) params["u"] = l.activation.param;
        jl["params"] = params;
        jl["in"] = l.in_dim;
        jl["out"] = l.out_dim;
        if (l.kind == LayerKind::Normalized) {
            jl["norm_mode"] = l.norm_mode == NormMode::Frobenius ? "frobenius" : "row_wise";
            jl["connection"] = l.connection == Connection::Residual ? "residual" : "plain";
        }
        j["layers"].push_back(jl);
    }
    return j;
}

inline NetworkSpec NetworkSpec::from_json(const nlohmann::json& j) {
    NetworkSpec spec;
    if (!j.contains("layers") || !j["layers"].is_array())
        throw ConfigError("network spec: missing layers array");
    for (const auto& jl : j["layers"]) {
        LayerSpec l;
        const std::string kind = jl.at("kind").get<std::string>();
        if (kind == "normalized") l.kind = LayerKind::Normalized;
        else if (kind == "unnormalized") l.kind = LayerKind::Unnormalized;
        else throw ConfigError("network spec: unknown layer kind '" + kind + "'");
        const std::string act = jl.at("activation").get<std::string>();
        const nlohmann::json params =
            jl.contains("params") ? jl["params"] : nlohmann::json::object();
        if (act == "relu") l.activation = Activation::relu();
        else if (act == "leaky_relu") l.activation = Activation::leaky_relu(params.at("slope").get<double>());
        else if (act == "linear") l.activation = Activation::linear();
        else if (act == "power_relu") l.activation = Activation::power_relu(params.at("u").get<double>());
        else if (act == "sigmoid") l.activation = Activation::sigmoid();
        else throw ConfigError("network spec: unknown activation '" + act + "'");
        l.in_dim = jl.at("in").get<int>();
        l.out_dim = jl.at("out").get<int>();
        if (l.kind == LayerKind::Normalized) {
            const std::string nm = jl.value("norm_mode", "row_wise");
            if (nm == "frobenius") l.norm_mode = NormMode::Frobenius;
            else if (nm == "row_wise") l.norm_mode = NormMode::RowWise;
            else throw ConfigError("network spec: unknown norm_mode '" + nm + "'");
            const std::string conn = jl.value("connection", "plain");
            if (conn == "residual") l.connection = Connection::Residual;
            else if (conn == "plain") l.connection = Connection::Plain;
            else throw ConfigError("network spec: unknown connection '" + conn + "'");
        }
        spec.layers.push_back(l);
    }
    spec.declared_degree = j.at("degree").get<double>();
    spec.validate();
    return spec;
}

} // namespace homolens
