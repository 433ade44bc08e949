#pragma once

#include <vector>

namespace nball {

// One spherical-harmonic channel: dimension n, degree l, order m in [0, N(l,n)).
struct ModeIndex {
    int n = 2;
    int l = 0;
    int m = 0;
    bool operator==(const ModeIndex&) const = default;
};

// Uniform radial grid r_i = i R / m, i = 0..m.
class RadialGrid {
public:
    RadialGrid() = default;
    RadialGrid(double radius, int intervals);

    double radius() const { return radius_; }
    int intervals() const { return intervals_; }
    int size() const { return intervals_ + 1; }
    double h() const { return radius_ / intervals_; }
    double node(int i) const { return i == intervals_ ? radius_ : i * h(); }
    std::vector<double> nodes() const;

private:
    double radius_ = 1.0;
    int intervals_ = 1;
};

// Radial coefficient profile of one channel.
struct ModeState {
    ModeIndex index;
    std::vector<double> values;
    double time = 0.0;
};

} // namespace nball
