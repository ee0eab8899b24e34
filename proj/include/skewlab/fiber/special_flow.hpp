#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "skewlab/core/error.hpp"
#include "skewlab/core/rng.hpp"

namespace skewlab {

inline double wrap_unit(double x) {
    x -= std::floor(x);
    return x >= 1.0 ? 0.0 : x;
}

inline double circle_distance(double a, double b) {
    const double d = std::fabs(a - b);
    return std::min(d, 1.0 - d);
}

// Rotation x -> x + alpha mod 1, or an interval exchange of [0,1) where
// interval j (in order) is moved to position permutation[j].
class BaseMap {
public:
    static BaseMap rotation(double alpha) {
        require(alpha >= 0.0 && alpha < 1.0, "rotation number must lie in [0,1)");
        BaseMap m;
        m.rotation_ = true;
        m.alpha_ = alpha;
        m.cuts_ = {0.0};
        return m;
    }

    static BaseMap iet(std::vector<double> lengths, std::vector<int> permutation) {
        const std::size_t d = lengths.size();
        require(d >= 1 && permutation.size() == d, "interval exchange needs one permutation entry per interval");
        for (double l : lengths) require(l > 0.0, "interval lengths must be positive");
        const double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);
        require(std::fabs(total - 1.0) <= 1e-14, "interval lengths must sum to 1");
        std::vector<int> inverse(d, -1);
        for (std::size_t j = 0; j < d; ++j) {
            const int p = permutation[j];
            require(p >= 0 && static_cast<std::size_t>(p) < d && inverse[static_cast<std::size_t>(p)] < 0,
                    "permutation must be a bijection");
            inverse[static_cast<std::size_t>(p)] = static_cast<int>(j);
        }
        BaseMap m;
        m.lengths_ = std::move(lengths);
        m.perm_ = std::move(permutation);
        m.inverse_ = std::move(inverse);
        m.left_.assign(d, 0.0);
        m.image_left_.assign(d, 0.0);
        for (std::size_t j = 1; j < d; ++j) m.left_[j] = m.left_[j - 1] + m.lengths_[j - 1];
        for (std::size_t p = 1; p < d; ++p)
            m.image_left_[p] = m.image_left_[p - 1] + m.lengths_[static_cast<std::size_t>(m.inverse_[p - 1])];
        m.cuts_ = m.left_;
        return m;
    }

    bool is_rotation() const { return rotation_; }
    double alpha() const { return alpha_; }
    // Left endpoints of the continuity intervals, starting with 0.
    const std::vector<double>& cuts() const { return cuts_; }

    double apply(double x) const {
        if (rotation_) {
            const double y = x + alpha_;
            return y >= 1.0 ? y - 1.0 : y;
        }
        const std::size_t j = locate(left_, x);
        return clamp_unit(x - left_[j] + image_left_[static_cast<std::size_t>(perm_[j])]);
    }

    double apply_inverse(double x) const {
        if (rotation_) {
            const double y = x - alpha_;
            return y < 0.0 ? y + 1.0 : y;
        }
        const std::size_t p = locate(image_left_, x);
        const std::size_t j = static_cast<std::size_t>(inverse_[p]);
        return clamp_unit(x - image_left_[p] + left_[j]);
    }

    // Rotation by n steps in one go (extended precision).
    double rotate(double x, long long n) const {
        const long double y = static_cast<long double>(x) + static_cast<long double>(n) * static_cast<long double>(alpha_);
        return wrap_unit(static_cast<double>(y - std::floor(y)));
    }

private:
    static std::size_t locate(const std::vector<double>& lefts, double x) {
        auto it = std::upper_bound(lefts.begin(), lefts.end(), x);
        return it == lefts.begin() ? 0 : static_cast<std::size_t>(it - lefts.begin() - 1);
    }
    static double clamp_unit(double x) { return x < 0.0 ? 0.0 : (x >= 1.0 ? std::nextafter(1.0, 0.0) : x); }

    bool rotation_ = false;
    double alpha_ = 0.0;
    std::vector<double> lengths_, left_, image_left_, cuts_;
    std::vector<int> perm_, inverse_;
};

// Piecewise affine roof a + b x on consecutive intervals covering [0,1).
class Roof {
public:
    struct Piece {
        double lo, hi, a, b;
    };

    static Roof constant(double c) { return Roof({{0.0, 1.0, c, 0.0}}); }

    explicit Roof(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
        require(!pieces_.empty(), "roof needs at least one piece");
        require(pieces_.front().lo == 0.0 && std::fabs(pieces_.back().hi - 1.0) <= 1e-14, "roof pieces must cover [0,1)");
        min_ = HUGE_VAL;
        max_ = 0.0;
        lip_ = 0.0;
        integral_ = 0.0;
        for (std::size_t k = 0; k < pieces_.size(); ++k) {
            const Piece& p = pieces_[k];
            require(p.hi > p.lo, "roof pieces must have positive length");
            if (k > 0) require(pieces_[k - 1].hi == p.lo, "roof pieces must be contiguous");
            const double v0 = p.a + p.b * p.lo, v1 = p.a + p.b * p.hi;
            min_ = std::min({min_, v0, v1});
            max_ = std::max({max_, v0, v1});
            lip_ = std::max(lip_, std::fabs(p.b));
            integral_ += p.a * (p.hi - p.lo) + 0.5 * p.b * (p.hi * p.hi - p.lo * p.lo);
            lows_.push_back(p.lo);
        }
        require(min_ > 0.0, "roof must be positive");
        constant_ = pieces_.size() == 1 && pieces_[0].b == 0.0;
    }

    double operator()(double x) const {
        const Piece& p = piece(x);
        return p.a + p.b * x;
    }
    const Piece& piece(double x) const {
        auto it = std::upper_bound(lows_.begin(), lows_.end(), x);
        return pieces_[it == lows_.begin() ? 0 : static_cast<std::size_t>(it - lows_.begin() - 1)];
    }
    // Minimum over [lo, hi).
    double min_on(double lo, double hi) const {
        double m = HUGE_VAL;
        for (const Piece& p : pieces_) {
            const double l = std::max(lo, p.lo), h = std::min(hi, p.hi);
            if (l >= h) continue;
            m = std::min({m, p.a + p.b * l, p.a + p.b * h});
        }
        return m;
    }
    double max_on(double lo, double hi) const {
        double m = 0.0;
        for (const Piece& p : pieces_) {
            const double l = std::max(lo, p.lo), h = std::min(hi, p.hi);
            if (l >= h) continue;
            m = std::max({m, p.a + p.b * l, p.a + p.b * h});
        }
        return m;
    }
    double integral_on(double lo, double hi) const {
        double s = 0.0;
        for (const Piece& p : pieces_) {
            const double l = std::max(lo, p.lo), h = std::min(hi, p.hi);
            if (l >= h) continue;
            s += p.a * (h - l) + 0.5 * p.b * (h * h - l * l);
        }
        return s;
    }

    const std::vector<Piece>& pieces() const { return pieces_; }
    double min_value() const { return min_; }
    double max_value() const { return max_; }
    double lipschitz() const { return lip_; }
    double integral() const { return integral_; }
    bool is_constant() const { return constant_; }

private:
    std::vector<Piece> pieces_;
    std::vector<double> lows_;
    double min_, max_, lip_, integral_;
    bool constant_ = false;
};

struct FlowPoint {
    double x = 0.0;  // base coordinate in [0,1)
    double s = 0.0;  // height, 0 <= s < roof(x)
};

// Product sup-metric on the flow space, circle distance on the base.
inline double flow_distance(const FlowPoint& p, const FlowPoint& q) {
    return std::max(circle_distance(p.x, q.x), std::fabs(p.s - q.s));
}

class SpecialFlow {
public:
    static constexpr double max_base_steps = 1e9;

    SpecialFlow(BaseMap base, Roof roof) : base_(std::move(base)), roof_(std::move(roof)) {}

    const BaseMap& base() const { return base_; }
    const Roof& roof() const { return roof_; }
    double mean_roof() const { return roof_.integral(); }
    bool contains(const FlowPoint& p) const { return p.x >= 0.0 && p.x < 1.0 && p.s >= 0.0 && p.s < roof_(p.x); }

    // Time-t map K_t.
    FlowPoint flow(FlowPoint p, double t) const {
        require(contains(p), "flow point outside the flow space");
        if (std::fabs(t) / roof_.min_value() > max_base_steps)
            throw ResourceError("flow time needs more than 1e9 base steps");
        if (base_.is_rotation() && roof_.is_constant()) {
            const double c = roof_.min_value();
            const double u = p.s + t;
            double n = std::floor(u / c);
            double s = u - n * c;
            if (s >= c) {
                s -= c;
                n += 1;
            } else if (s < 0.0) {
                s += c;
                n -= 1;
            }
            if (s >= c) s = std::nextafter(c, 0.0);
            return {base_.rotate(p.x, static_cast<long long>(n)), s < 0.0 ? 0.0 : s};
        }
        double u = p.s + t;
        double x = p.x;
        for (;;) {
            const double h = roof_(x);
            if (u < h) break;
            u -= h;
            x = base_.apply(x);
        }
        while (u < 0.0) {
            x = base_.apply_inverse(x);
            u += roof_(x);
        }
        if (u >= roof_(x)) u = std::nextafter(roof_(x), 0.0);
        return {x, u};
    }

    // S_n(roof)(x).
    double roof_sum(double x, long long n) const {
        if (roof_.is_constant()) return roof_.min_value() * static_cast<double>(n);
        double s = 0.0;
        for (long long k = 0; k < n; ++k) {
            s += roof_(x);
            x = base_.apply(x);
        }
        return s;
    }

    FlowPoint sample(Rng& rng) const {
        for (;;) {
            const double x = rng.uniform();
            const double s = rng.uniform() * roof_.max_value();
            if (s < roof_(x)) return {x, s};
        }
    }

private:
    BaseMap base_;
    Roof roof_;
};

}  // namespace skewlab
