#pragma once

// Reference implementations used as test oracles. They are written the
// slow, obvious way and share no code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "flowagg/flow_features.hpp"
#include "flowagg/neural_net.hpp"

namespace oracle {

// The port-delta definition spelled out: insertion sort, absolute neighbour differences,
// arithmetic mean. A single port yields 0.
inline double ports_delta(std::vector<int> ports) {
    for (std::size_t i = 1; i < ports.size(); ++i)
        for (std::size_t j = i; j > 0 && ports[j - 1] > ports[j]; --j) std::swap(ports[j - 1], ports[j]);
    if (ports.size() < 2) return 0.0;
    long long total = 0;
    for (std::size_t i = 0; i + 1 < ports.size(); ++i) total += std::llabs(ports[i + 1] - ports[i]);
    return static_cast<double>(total) / static_cast<double>(ports.size() - 1);
}

struct Packet {
    double t;
    bool forward;
    int length;
    std::uint8_t flags;
};

// The 34 statistics of a flow given as a flat packet list, in the documented
// column order (17 forward, then 17 backward).
inline std::array<double, 34> flow_features(const std::vector<Packet>& packets) {
    std::array<double, 34> out{};
    for (int dir = 0; dir < 2; ++dir) {
        std::vector<Packet> p;
        for (const auto& x : packets)
            if (x.forward == (dir == 0)) p.push_back(x);
        std::stable_sort(p.begin(), p.end(), [](const Packet& a, const Packet& b) { return a.t < b.t; });
        double* o = out.data() + 17 * dir;
        const std::size_t n = p.size();
        o[0] = static_cast<double>(n);
        if (n == 0) continue;

        long double bytes = 0;
        double lo = p[0].length, hi = p[0].length;
        for (const auto& x : p) {
            bytes += x.length;
            lo = std::min<double>(lo, x.length);
            hi = std::max<double>(hi, x.length);
        }
        const long double mean = bytes / n;
        long double sq = 0;
        for (const auto& x : p) sq += (x.length - mean) * (x.length - mean);
        o[1] = static_cast<double>(bytes);
        o[2] = static_cast<double>(mean);
        o[3] = static_cast<double>(std::sqrt(sq / n));
        o[4] = lo;
        o[5] = hi;

        if (n >= 2) {
            std::vector<long double> gaps;
            for (std::size_t i = 1; i < n; ++i) gaps.push_back((long double)p[i].t - p[i - 1].t);
            long double gsum = 0, glo = gaps[0], ghi = gaps[0];
            for (auto g : gaps) {
                gsum += g;
                glo = std::min(glo, g);
                ghi = std::max(ghi, g);
            }
            const long double gmean = gsum / gaps.size();
            long double gsq = 0;
            for (auto g : gaps) gsq += (g - gmean) * (g - gmean);
            o[6] = static_cast<double>(gmean);
            o[7] = static_cast<double>(std::sqrt(gsq / gaps.size()));
            o[8] = static_cast<double>(glo);
            o[9] = static_cast<double>(ghi);

            long double since = 0;
            for (std::size_t i = 1; i < n; ++i) since += (long double)p[i].t - p[0].t;
            o[10] = static_cast<double>(since / (n - 1));
        }

        const std::uint8_t bits[6] = {0x02, 0x10, 0x01, 0x04, 0x08, 0x20};  // SYN ACK FIN RST PSH URG
        for (int f = 0; f < 6; ++f)
            for (const auto& x : p)
                if (x.flags & bits[f]) o[11 + f] += 1;
    }
    return out;
}

// |a - b| relative to the larger magnitude; exact zeros compare equal.
inline double relative_error(double a, double b) {
    const double scale = std::max(std::fabs(a), std::fabs(b));
    return scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
}

struct GradientCheck {
    double max_relative = 0.0;  // over entries whose absolute gap exceeds the floor
    double max_absolute = 0.0;
    std::size_t entries = 0;
};

// Central finite differences of the library's loss against its analytic
// gradients. Entries whose absolute discrepancy is below `floor` are
// considered exact.
inline GradientCheck compare_gradients(flowagg::MlpModel model, const Eigen::MatrixXd& x,
                                       const Eigen::MatrixXd& y, flowagg::Loss loss,
                                       const flowagg::Gradients& g, double eps = 1e-5, double floor = 1e-7) {
    GradientCheck result;
    auto probe = [&](double& param, double analytic) {
        const double saved = param;
        param = saved + eps;
        const double up = flowagg::loss_value(model, x, y, loss);
        param = saved - eps;
        const double down = flowagg::loss_value(model, x, y, loss);
        param = saved;
        const double numeric = (up - down) / (2 * eps);
        const double gap = std::fabs(numeric - analytic);
        result.max_absolute = std::max(result.max_absolute, gap);
        if (gap > floor) result.max_relative = std::max(result.max_relative, relative_error(numeric, analytic));
        ++result.entries;
    };
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (Eigen::Index i = 0; i < model.weights[l].rows(); ++i)
            for (Eigen::Index j = 0; j < model.weights[l].cols(); ++j) probe(model.weights[l](i, j), g.weights[l](i, j));
        for (Eigen::Index j = 0; j < model.biases[l].size(); ++j) probe(model.biases[l][j], g.biases[l][j]);
    }
    return result;
}

inline GradientCheck check_gradients(const flowagg::MlpModel& model, const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& y, flowagg::Loss loss, double eps = 1e-5,
                                     double floor = 1e-7) {
    flowagg::Gradients g;
    flowagg::loss_and_gradients(model, x, y, loss, g);
    return compare_gradients(model, x, y, loss, g, eps, floor);
}

}  // namespace oracle
