#pragma once

#include <infodesign/core.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testing_util {

using infodesign::Belief;
using infodesign::SignalStructure;

/// Seeded generator used by every property test.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    /// Interior belief bounded away from the faces by `margin`.
    Belief belief(std::size_t states, double margin = 0.02) {
        std::vector<double> p(states);
        double s = 0.0;
        for (auto& x : p) {
            x = -std::log(uniform(1e-9, 1.0));
            s += x;
        }
        for (auto& x : p) x = margin + (1.0 - margin * static_cast<double>(states)) * x / s;
        return Belief(p);
    }

    /// Random structure with `atoms` posteriors; its barycenter is whatever results.
    SignalStructure structure(std::size_t states, std::size_t atoms) {
        std::vector<infodesign::Atom> out;
        std::vector<double> w(atoms);
        double s = 0.0;
        for (auto& x : w) {
            x = uniform(0.05, 1.0);
            s += x;
        }
        for (std::size_t i = 0; i < atoms; ++i) out.push_back({w[i] / s, belief(states, 0.0)});
        return SignalStructure(out);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

} // namespace testing_util
