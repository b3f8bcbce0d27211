#include "jdqm/rng.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

namespace jdqm {

namespace {
const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
}

double CounterRng::normal(std::uint64_t counter) const {
    return boost::math::quantile(kStdNormal, uniform(counter));
}

double CounterRng::exponential(std::uint64_t counter) const {
    return -std::log(uniform(counter));
}

} // namespace jdqm
