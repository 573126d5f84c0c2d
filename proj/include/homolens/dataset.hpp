#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "homolens/errors.hpp"
#include "homolens/rng.hpp"

namespace homolens {

struct Sample {
    std::vector<double> x;
    double y = 1.0; // label in {-1, +1}
};

struct Dataset {
    std::vector<Sample> samples;
    int dim = 0;

    std::size_t size() const { return samples.size(); }
    const Sample& operator[](std::size_t i) const { return samples[i]; }
};

/// Noisy linear classification task: x uniform on the sphere of radius r,
/// y = sign(w* . x) flipped independently with probability pi. Label noise
/// keeps the Bayes-optimal sphere loss strictly positive.
struct SyntheticTask {
    int input_dim = 16;
    std::vector<double> w_star; // unit margin vector
    double noise_rate = 0.3;
    double radius = 1.0;

    static SyntheticTask make(int d, double pi, double r = 1.0) {
        if (!(pi >= 0.0 && pi < 0.5))
            throw InvalidNoiseRate("noise rate must lie in [0, 0.5)");
        if (d < 1) throw InvalidSpec("input_dim must be positive");
        if (!(r > 0.0)) throw InvalidSpec("radius must be positive");
        SyntheticTask t;
        t.input_dim = d;
        t.noise_rate = pi;
        t.radius = r;
        t.w_star.assign(d, 0.0);
        t.w_star[0] = 1.0;
        return t;
    }

    Sample draw(Rng& rng) const {
        Sample s;
        s.x.resize(input_dim);
        double nu = 0.0;
        do {
            nu = 0.0;
            for (auto& v : s.x) {
                v = rng.normal();
                nu += v * v;
            }
        } while (nu <= 0.0);
        nu = std::sqrt(nu);
        for (auto& v : s.x) v *= radius / nu;
        double dot = 0.0;
        for (int i = 0; i < input_dim; ++i) dot += w_star[i] * s.x[i];
        s.y = dot >= 0.0 ? 1.0 : -1.0;
        if (rng.uniform01() < noise_rate) s.y = -s.y;
        return s;
    }
};

inline Dataset gen_task(const SyntheticTask& task, std::uint64_t seed, std::size_t n) {
    if (n < 1) throw InvalidSpec("dataset size must be >= 1");
    Rng rng(derive_seed(seed, 0xDA7A));
    Dataset d;
    d.dim = task.input_dim;
    d.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) d.samples.push_back(task.draw(rng));
    return d;
}

/// Neighbor dataset S^{(i)}: sample i replaced by a fresh i.i.d. draw, all
/// other samples bitwise identical (shared representation is copied as-is).
inline Dataset make_neighbor(const Dataset& s, std::size_t i, const SyntheticTask& task,
                             Rng& rng) {
    if (i >= s.size()) throw IndexOutOfRange("neighbor index out of range");
    Dataset out = s;
    out.samples[i] = task.draw(rng);
    return out;
}

} // namespace homolens
