#pragma once

// Seeded synthetic datasets. Normals come from Box-Muller over
// std::mt19937_64 so the data is identical across standard libraries.

#include "men/common.hpp"

#include <cstdint>
#include <random>

namespace men::synthetic {

class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do u1 = uniform();
        while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(th);
        has_spare_ = true;
        return r * std::cos(th);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Classes differ only on features [0, informative); every feature carries
/// isotropic N(0, noise^2). Class means on the informative features are
/// N(0, separation^2). Samples are grouped by class.
inline SampleSet sparse_signal_classes(int classes, Index per_class, Index p, Index informative, double noise,
                                       double separation, std::uint64_t seed) {
    Gaussian g(seed);
    Matrix protos = Matrix::Zero(classes, p);
    for (int c = 0; c < classes; ++c)
        for (Index k = 0; k < informative; ++k) protos(c, k) = separation * g();
    Matrix x(classes * per_class, p);
    std::vector<int> labels;
    for (int c = 0; c < classes; ++c)
        for (Index i = 0; i < per_class; ++i) {
            const Index row = c * per_class + i;
            for (Index k = 0; k < p; ++k) x(row, k) = protos(c, k) + noise * g();
            labels.push_back(c);
        }
    return SampleSet(std::move(x), std::move(labels));
}

/// Face-like images: each class prototype is a sum of Gaussian blobs; a sample
/// moves along a 2-parameter manifold (brightness and horizontal shift) and
/// adds 3x3-smoothed pixel noise. Values are clipped to [0, 1].
inline SampleSet face_like(int classes, Index per_class, Index side, std::uint64_t seed, double noise = 0.05) {
    Gaussian g(seed);
    const Index p = side * side;
    struct Blob { double cx, cy, sigma, amp; };
    std::vector<std::vector<Blob>> protos(static_cast<std::size_t>(classes));
    for (auto& blobs : protos)
        for (int b = 0; b < 4; ++b)
            blobs.push_back({side * (0.2 + 0.6 * g.uniform()), side * (0.2 + 0.6 * g.uniform()),
                             side * (0.06 + 0.08 * g.uniform()), 0.3 + 0.5 * g.uniform()});

    Matrix x(classes * per_class, p);
    std::vector<int> labels;
    Matrix white(side, side), smooth(side, side);
    for (int c = 0; c < classes; ++c)
        for (Index i = 0; i < per_class; ++i) {
            const double bright = 1.0 + 0.1 * g();
            const double shift = 0.5 * g();
            for (Index r = 0; r < side; ++r)
                for (Index q = 0; q < side; ++q) white(r, q) = g();
            for (Index r = 0; r < side; ++r)
                for (Index q = 0; q < side; ++q) {
                    double acc = 0.0;
                    int cnt = 0;
                    for (Index dr = -1; dr <= 1; ++dr)
                        for (Index dq = -1; dq <= 1; ++dq) {
                            const Index rr = r + dr, qq = q + dq;
                            if (rr < 0 || qq < 0 || rr >= side || qq >= side) continue;
                            acc += white(rr, qq);
                            ++cnt;
                        }
                    smooth(r, q) = acc / cnt;
                }
            const Index row = c * per_class + i;
            for (Index r = 0; r < side; ++r)
                for (Index q = 0; q < side; ++q) {
                    double v = 0.1;
                    for (const Blob& b : protos[static_cast<std::size_t>(c)]) {
                        const double dx = q - (b.cx + shift), dy = r - b.cy;
                        v += bright * b.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
                    }
                    v += noise * 3.0 * smooth(r, q);
                    x(row, r * side + q) = std::clamp(v, 0.0, 1.0);
                }
            labels.push_back(c);
        }
    return SampleSet(std::move(x), std::move(labels));
}

}  // namespace men::synthetic
