#include "nball/types.hpp"

#include "nball/error.hpp"

namespace nball {

RadialGrid::RadialGrid(double radius, int intervals) : radius_(radius), intervals_(intervals)
{
    if (!(radius > 0.0)) throw InvalidArgument("RadialGrid: radius must be positive");
    if (intervals < 2) throw InvalidArgument("RadialGrid: need at least 2 intervals");
}

std::vector<double> RadialGrid::nodes() const
{
    std::vector<double> r(size());
    for (int i = 0; i < size(); ++i) r[i] = node(i);
    return r;
}

} // namespace nball
