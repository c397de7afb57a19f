#pragma once

#include "arealk/error.hpp"

#include <Eigen/Dense>

namespace arealk {

/// Strictly increasing positive evaluation radii, in original length units.
class RadiusGrid {
public:
    explicit RadiusGrid(Eigen::ArrayXd radii) : r_(std::move(radii)) {
        if (r_.size() == 0) throw ValidationError("radius grid is empty");
        if (!(r_[0] > 0.0)) throw ValidationError("radii must be positive");
        for (Eigen::Index i = 1; i < r_.size(); ++i)
            if (!(r_[i] > r_[i - 1]))
                throw ValidationError("radii must be strictly increasing");
        if (!r_.allFinite()) throw ValidationError("radii must be finite");
    }

    [[nodiscard]] int count() const { return static_cast<int>(r_.size()); }
    [[nodiscard]] double operator[](int i) const { return r_[i]; }
    [[nodiscard]] const Eigen::ArrayXd& values() const { return r_; }

private:
    Eigen::ArrayXd r_;
};

} // namespace arealk
