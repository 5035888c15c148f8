#pragma once

#include "gen.hpp"

#include <infodesign/core.hpp>

#include <gtest/gtest.h>

#include <random>
#include <vector>

namespace testing_util {

using infodesign::Belief;
using infodesign::SignalStructure;

inline void expect_bayes_plausible(const SignalStructure& p, const Belief& mu, double tol = 1e-9) {
    const Belief b = infodesign::barycenter(p);
    for (std::size_t i = 0; i < mu.size(); ++i) EXPECT_NEAR(b[i], mu[i], tol);
}

inline void expect_support_at_most(const SignalStructure& p, std::size_t bound) {
    EXPECT_LE(p.support_size(), bound) << "support bound violated";
}

} // namespace testing_util
