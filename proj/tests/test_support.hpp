#pragma once

#include "maba/model.hpp"
#include "maba/rng.hpp"

namespace maba::testing {

// mu = (0.9, 0.8), q(0,0) = 1, all other q = 0. Hand-solved values:
// V*(1) = 99, V*(0) = 90, gap(1,a_2) = 1, gap(0,a_2) = 10,
// E[I|1] = 110, E[I|0] = 100.
inline BanditInstance simple_instance() {
    return BanditInstance(ArmSet({0.9, 0.8}), BinaryAbandonment(1.0, 0.0, 0.0, 0.0));
}

// mu = (0.9, 0.8), q00 = 0.8, q01 = q10 = 0.2, q11 = 0.1.
inline BanditInstance soft_instance() {
    return BanditInstance(ArmSet({0.9, 0.8}), BinaryAbandonment(0.8, 0.2, 0.2, 0.1));
}

// q identically 1: every episode lasts exactly one step.
inline BanditInstance one_step_instance() {
    return BanditInstance(ArmSet({0.9, 0.8}), BinaryAbandonment(1.0, 1.0, 1.0, 1.0));
}

inline BanditInstance log_general_instance(double c6 = 1000.0, double theta = 0.5) {
    return BanditInstance(ArmSet({0.9, 0.8}), GeneralAbandonment::log_family(c6, theta));
}

// Random instance satisfying the model assumptions, kept well-conditioned so
// episodes stay short (q00 bounded away from 0, means away from 1).
inline BanditInstance random_instance(Rng& rng, int arms) {
    std::vector<double> means(arms);
    for (double& m : means) m = 0.05 + 0.8 * rng.uniform01();
    const double q11 = 0.5 * rng.uniform01();
    const double q01 = q11 + (1.0 - q11) * rng.uniform01() * 0.5;
    const double q10 = q11 + (1.0 - q11) * rng.uniform01() * 0.5;
    const double qmax = q01 > q10 ? q01 : q10;
    const double q00 = 0.3 + (1.0 - 0.3) * rng.uniform01();
    return BanditInstance(ArmSet(std::move(means)),
                          BinaryAbandonment(q00 > qmax ? q00 : qmax, q01, q10, q11));
}

}  // namespace maba::testing
