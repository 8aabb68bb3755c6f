#ifndef HYPERODE_HERMITE_HPP
#define HYPERODE_HERMITE_HPP

#include <algorithm>
#include <cstddef>
#include <vector>

#include "hyperode/errors.hpp"

namespace hyperode {

// Piecewise cubic Hermite interpolant: value and first derivative prescribed
// at strictly increasing nodes. Evaluation outside [front, back] throws.
class CubicHermite {
public:
    CubicHermite() = default;
    CubicHermite(std::vector<double> x, std::vector<double> v, std::vector<double> d)
        : x_(std::move(x)), v_(std::move(v)), d_(std::move(d)) {
        if (x_.size() < 2 || x_.size() != v_.size() || x_.size() != d_.size())
            throw NumericError("Hermite interpolant needs at least two matched nodes");
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (!(x_[i] > x_[i - 1])) throw NumericError("Hermite nodes must be strictly increasing");
    }

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    std::size_t size() const { return x_.size(); }
    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& values() const { return v_; }
    const std::vector<double>& derivatives() const { return d_; }

    double value(double x) const {
        const Seg s = segment(x);
        const double h00 = (1.0 + 2.0 * s.t) * s.u * s.u;
        const double h10 = s.t * s.u * s.u;
        const double h01 = s.t * s.t * (3.0 - 2.0 * s.t);
        const double h11 = s.t * s.t * (s.t - 1.0);
        return h00 * v_[s.i] + h10 * s.dx * d_[s.i] + h01 * v_[s.i + 1] + h11 * s.dx * d_[s.i + 1];
    }

    double derivative(double x) const {
        const Seg s = segment(x);
        const double g00 = 6.0 * s.t * (s.t - 1.0);
        const double g10 = (1.0 - s.t) * (1.0 - 3.0 * s.t);
        const double g01 = -g00;
        const double g11 = s.t * (3.0 * s.t - 2.0);
        return (g00 * v_[s.i] + g01 * v_[s.i + 1]) / s.dx + g10 * d_[s.i] + g11 * d_[s.i + 1];
    }

    double second_derivative(double x) const {
        const Seg s = segment(x);
        const double w00 = (12.0 * s.t - 6.0) / (s.dx * s.dx);
        const double w10 = (6.0 * s.t - 4.0) / s.dx;
        const double w11 = (6.0 * s.t - 2.0) / s.dx;
        return w00 * (v_[s.i] - v_[s.i + 1]) + w10 * d_[s.i] + w11 * d_[s.i + 1];
    }

private:
    struct Seg {
        std::size_t i;
        double t;  // normalized abscissa in [0, 1]
        double u;  // 1 - t
        double dx;
    };

    Seg segment(double x) const {
        if (x < x_.front() || x > x_.back()) throw EvalError("evaluation outside interpolant domain");
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = (it == x_.end()) ? x_.size() - 2 : static_cast<std::size_t>(it - x_.begin()) - 1;
        if (i >= x_.size() - 1) i = x_.size() - 2;
        const double dx = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / dx;
        return {i, t, 1.0 - t, dx};
    }

    std::vector<double> x_, v_, d_;
};

} // namespace hyperode

#endif
