#pragma once

#include "arealk/error.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace arealk {

/// Binary observation vector over areal units; y(i) == 1 marks unit i as
/// observed. The count of ones is kept alongside.
struct Pattern {
    Eigen::VectorX<std::uint8_t> y;
    int n = 0;

    Pattern() = default;
    explicit Pattern(Eigen::VectorX<std::uint8_t> values)
        : y(std::move(values)), n(0) {
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (y[i] > 1) throw ValidationError("pattern entries must be 0 or 1");
            n += y[i];
        }
    }

    static Pattern zeros(Eigen::Index size) {
        Pattern p;
        p.y = Eigen::VectorX<std::uint8_t>::Zero(size);
        p.n = 0;
        return p;
    }

    void set(Eigen::Index i) {
        if (!y[i]) {
            y[i] = 1;
            ++n;
        }
    }

    [[nodiscard]] Eigen::Index size() const { return y.size(); }
    [[nodiscard]] bool observed(Eigen::Index i) const { return y[i] != 0; }
};

} // namespace arealk
