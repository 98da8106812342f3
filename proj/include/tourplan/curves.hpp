/**
 * @file curves.hpp
 * @brief Learning-curve representation, evaluation, monotonization,
 *        piecewise-linear approximation and concave-block decomposition.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tourplan {

inline constexpr double kCurveTol = 1e-9;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

class NonMonotoneCurveError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One linear piece of a piecewise-linear curve: value(t) = slope*t + intercept
/// on [t_begin, t_end] (t_end may be +inf for the final piece).
struct PWLSegment {
    double slope = 0.0;
    double intercept = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;

    double value_at(double t) const { return slope * t + intercept; }
};

/**
 * @brief Continuous, non-decreasing piecewise-linear curve starting at (0,0).
 *
 * Values stay within [0, 1]; the optional final segment extends flat to +inf
 * (a learning curve saturates but never decreases).
 */
class PWLCurve {
public:
    PWLCurve() : PWLCurve({{0.0, 0.0}}, true) {}

    /// @param breakpoints ordered (t, value) pairs; must start at (0,0),
    ///        be continuous (trivially true of a breakpoint list) and
    ///        non-decreasing in both coordinates.
    /// @param final_unbounded extend the curve flat past the last breakpoint.
    PWLCurve(std::vector<std::pair<double, double>> breakpoints, bool final_unbounded = true)
        : breakpoints_(std::move(breakpoints)), final_unbounded_(final_unbounded) {
        if (breakpoints_.empty())
            throw std::invalid_argument("PWLCurve: needs at least one breakpoint");
        if (std::abs(breakpoints_.front().first) > kCurveTol ||
            std::abs(breakpoints_.front().second) > kCurveTol)
            throw std::invalid_argument("PWLCurve: must start at (0, 0)");
        breakpoints_.front() = {0.0, 0.0};
        merge_collinear();
        for (std::size_t k = 0; k + 1 < breakpoints_.size(); ++k) {
            const auto& [t0, v0] = breakpoints_[k];
            const auto& [t1, v1] = breakpoints_[k + 1];
            if (t1 <= t0)
                throw std::invalid_argument("PWLCurve: breakpoint abscissae must increase");
            if (v1 < v0 - kCurveTol)
                throw std::invalid_argument("PWLCurve: values must be non-decreasing");
            if (v1 > 1.0 + kCurveTol)
                throw std::invalid_argument("PWLCurve: values must stay within [0, 1]");
            PWLSegment seg;
            seg.t_begin = t0;
            seg.t_end = t1;
            seg.slope = std::max(0.0, (v1 - v0) / (t1 - t0));
            seg.intercept = v0 - seg.slope * t0;
            segments_.push_back(seg);
        }
        if (final_unbounded_) {
            PWLSegment tail;
            tail.t_begin = breakpoints_.back().first;
            tail.t_end = kInf;
            tail.slope = 0.0;
            tail.intercept = breakpoints_.back().second;
            segments_.push_back(tail);
        }
        if (segments_.empty())
            throw std::invalid_argument("PWLCurve: needs at least one segment");
    }

    double eval(double t) const {
        if (t < 0.0) throw std::invalid_argument("PWLCurve: negative time");
        if (t >= breakpoints_.back().first)
            return std::clamp(breakpoints_.back().second, 0.0, 1.0);
        // first breakpoint with abscissa > t identifies the piece
        auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t,
                                   [](double x, const auto& bp) { return x < bp.first; });
        std::size_t piece = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
        return std::clamp(segments_[piece].value_at(t), 0.0, 1.0);
    }

    const std::vector<std::pair<double, double>>& breakpoints() const { return breakpoints_; }
    const std::vector<PWLSegment>& segments() const { return segments_; }
    bool final_segment_unbounded() const { return final_unbounded_; }

    /// Abscissa past which the curve stays constant.
    double saturation_time() const { return breakpoints_.back().first; }
    double max_value() const { return breakpoints_.back().second; }

private:
    void merge_collinear() {
        if (breakpoints_.size() < 3) return;
        std::vector<std::pair<double, double>> kept;
        kept.push_back(breakpoints_[0]);
        for (std::size_t k = 1; k + 1 < breakpoints_.size(); ++k) {
            const auto& [ta, va] = kept.back();
            const auto& [tb, vb] = breakpoints_[k];
            const auto& [tc, vc] = breakpoints_[k + 1];
            double s1 = (vb - va) / (tb - ta);
            double s2 = (vc - vb) / (tc - tb);
            if (std::abs(s1 - s2) > 1e-12) kept.push_back(breakpoints_[k]);
        }
        kept.push_back(breakpoints_.back());
        breakpoints_ = std::move(kept);
    }

    std::vector<std::pair<double, double>> breakpoints_;
    std::vector<PWLSegment> segments_;
    bool final_unbounded_ = true;
};

enum class CurveKind { Linear, Exponential, Pwl, Sampled };

/**
 * @brief Specification of a learning curve f : time -> [0, 1].
 *
 * Linear: f(t) = min(rate*t, 1). Exponential: f(t) = 1 - exp(-rate*t).
 * Pwl: an explicit PWLCurve. Sampled: linear interpolation through a grid of
 * (t, value) points, clamped right.
 */
struct CurveSpec {
    CurveKind kind = CurveKind::Linear;
    double rate = 1.0;
    PWLCurve pwl;
    std::vector<std::pair<double, double>> samples;

    static CurveSpec linear(double rate) {
        check_rate(rate);
        CurveSpec s;
        s.kind = CurveKind::Linear;
        s.rate = rate;
        return s;
    }

    static CurveSpec exponential(double rate) {
        check_rate(rate);
        CurveSpec s;
        s.kind = CurveKind::Exponential;
        s.rate = rate;
        return s;
    }

    static CurveSpec from_pwl(PWLCurve curve) {
        CurveSpec s;
        s.kind = CurveKind::Pwl;
        s.pwl = std::move(curve);
        return s;
    }

    static CurveSpec sampled(std::vector<std::pair<double, double>> grid) {
        if (grid.size() < 2)
            throw std::invalid_argument("sampled curve: needs at least two grid points");
        if (std::abs(grid.front().first) > kCurveTol || std::abs(grid.front().second) > kCurveTol)
            throw std::invalid_argument("sampled curve: must start at (0, 0)");
        grid.front() = {0.0, 0.0};
        for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
            if (grid[k + 1].first <= grid[k].first)
                throw std::invalid_argument("sampled curve: abscissae must strictly increase");
            if (grid[k].second < -kCurveTol || grid[k].second > 1.0 + kCurveTol)
                throw std::invalid_argument("sampled curve: values must stay within [0, 1]");
        }
        CurveSpec s;
        s.kind = CurveKind::Sampled;
        s.samples = std::move(grid);
        return s;
    }

private:
    static void check_rate(double rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("curve rate must be positive");
    }
};

/// Evaluate a curve specification at time t >= 0. Result lies in [0, 1].
inline double eval_curve(const CurveSpec& spec, double t) {
    if (t < 0.0) throw std::invalid_argument("eval_curve: negative time");
    switch (spec.kind) {
        case CurveKind::Linear:
            return std::min(spec.rate * t, 1.0);
        case CurveKind::Exponential:
            return 1.0 - std::exp(-spec.rate * t);
        case CurveKind::Pwl:
            return spec.pwl.eval(t);
        case CurveKind::Sampled: {
            const auto& g = spec.samples;
            if (t >= g.back().first) return std::clamp(g.back().second, 0.0, 1.0);
            auto it = std::upper_bound(g.begin(), g.end(), t,
                                       [](double x, const auto& p) { return x < p.first; });
            std::size_t k = static_cast<std::size_t>(it - g.begin()) - 1;
            double w = (t - g[k].first) / (g[k + 1].first - g[k].first);
            return std::clamp(g[k].second + w * (g[k + 1].second - g[k].second), 0.0, 1.0);
        }
    }
    throw std::logic_error("eval_curve: unknown curve kind");
}

inline bool is_non_decreasing(const std::vector<std::pair<double, double>>& grid) {
    for (std::size_t k = 0; k + 1 < grid.size(); ++k)
        if (grid[k + 1].second < grid[k].second - kCurveTol) return false;
    return true;
}

/// Running-maximum envelope of a sampled curve: t -> max_{s<=t} f(s).
inline CurveSpec monotonize(const CurveSpec& spec) {
    if (spec.kind != CurveKind::Sampled)
        throw std::invalid_argument("monotonize: only sampled curves can be monotonized");
    auto grid = spec.samples;
    double running = 0.0;
    for (auto& [t, v] : grid) {
        running = std::max(running, v);
        v = running;
    }
    return CurveSpec::sampled(std::move(grid));
}

enum class ApproxFlavor {
    Band,  ///< |f - approx| / f <= eps everywhere
    Upper  ///< f <= approx <= f / (1 - eps)
};

namespace detail {

/// Uniform numeric view of a non-decreasing curve used by the approximation.
struct CurveAdapter {
    std::function<double(double)> f;
    std::function<double(double)> fprime;
    double initial_slope = 0.0;
    double sup_value = 1.0;       // least upper bound of f
    double sup_time = kInf;       // time at which sup is (first) attained, or +inf

    /// Leftmost t with f(t) >= v (v <= sup_value); bisection to ~1e-14 rel.
    double inverse(double v) const {
        if (v <= 0.0) return 0.0;
        double lo = 0.0;
        double hi = std::isfinite(sup_time) ? sup_time : 1.0;
        if (!std::isfinite(sup_time)) {
            while (f(hi) < v && hi < 1e18) hi *= 2.0;
        }
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            if (f(mid) >= v)
                hi = mid;
            else
                lo = mid;
            if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
        }
        return hi;
    }
};

inline CurveAdapter make_adapter(const CurveSpec& spec) {
    CurveAdapter a;
    switch (spec.kind) {
        case CurveKind::Exponential: {
            double lam = spec.rate;
            a.f = [lam](double t) { return -std::expm1(-lam * t); };
            a.fprime = [lam](double t) { return lam * std::exp(-lam * t); };
            a.initial_slope = lam;
            a.sup_value = 1.0;
            a.sup_time = kInf;
            return a;
        }
        case CurveKind::Sampled: {
            auto grid = spec.samples;
            a.f = [grid, spec](double t) { return eval_curve(spec, t); };
            // One-sided (right) finite difference at grid resolution.
            a.fprime = [grid](double t) {
                auto it = std::upper_bound(grid.begin(), grid.end(), t,
                                           [](double x, const auto& p) { return x < p.first; });
                std::size_t k = static_cast<std::size_t>(it - grid.begin());
                if (k >= grid.size()) return 0.0;
                if (k == 0) k = 1;
                return (grid[k].second - grid[k - 1].second) /
                       (grid[k].first - grid[k - 1].first);
            };
            a.initial_slope = (grid[1].second - grid[0].second) / (grid[1].first - grid[0].first);
            a.sup_value = grid.back().second;
            double sup_t = grid.back().first;
            for (std::size_t k = grid.size(); k-- > 1;) {
                if (grid[k - 1].second >= a.sup_value - 1e-15)
                    sup_t = grid[k - 1].first;
                else
                    break;
            }
            a.sup_time = sup_t;
            return a;
        }
        default:
            throw std::invalid_argument("approximation adapter: unsupported curve kind");
    }
}

/// Largest t such that f' stays within [(1-tol), (1+tol)] * f'(0) on [0, t],
/// found by bisection; capped so the tangent value stays below value_cap.
inline double tangent_extent(const CurveAdapter& a, double tol, double value_cap) {
    double slope0 = a.initial_slope;
    auto within = [&](double t) {
        // sample the derivative over [0, t]; monotone derivatives make a
        // single endpoint check sufficient, sampling covers the general case
        for (int s = 1; s <= 8; ++s) {
            double d = a.fprime(t * s / 8.0);
            if (d < (1.0 - tol) * slope0 - 1e-15 || d > (1.0 + tol) * slope0 + 1e-15)
                return false;
        }
        return true;
    };
    double cap = value_cap / slope0;
    double lo = 0.0, hi = cap;
    if (within(cap)) return cap;
    // shrink until the lower probe passes, then bisect
    hi = cap;
    double probe = cap;
    while (probe > 1e-18 && !within(probe)) probe *= 0.5;
    lo = probe;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (within(mid))
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    return lo;
}

inline PWLCurve approximate_band(const CurveAdapter& a, double eps) {
    const double slope0 = a.initial_slope;
    const double vsup = a.sup_value;
    if (vsup <= 1e-12) return PWLCurve({{0.0, 0.0}}, true);

    // Derivative tolerance eps/(1+eps) keeps the tangent piece within a
    // two-sided relative band of eps (the plain eps choice only bounds one
    // side by eps/(1-eps)).
    const double eps_d = eps / (1.0 + eps);
    const double v_top = vsup / (1.0 + eps);  // flat tail starts where f = v_top

    double t_delta = tangent_extent(a, eps_d, v_top);
    double y1 = slope0 * t_delta;

    std::vector<std::pair<double, double>> bps;
    bps.emplace_back(0.0, 0.0);

    // Anchor chain: value steps v_{k+1} = (1+eps) v_k along the curve.
    std::vector<std::pair<double, double>> anchors;  // on-curve points
    double v = y1;
    if (a.f(t_delta) >= y1 - 1e-15) {
        // tangent ends below (or on) the curve: secant bridge directly from
        // (t_delta, y1); anchors start at the next value step
        bps.emplace_back(t_delta, y1);
        v = (1.0 + eps) * y1;
    } else {
        // tangent overshoots the curve; the first anchor is where the curve
        // catches the tangent value (the horizontal-bridge endpoint)
        anchors.emplace_back(a.inverse(y1), y1);
        v = (1.0 + eps) * y1;
    }
    while (v < v_top) {
        anchors.emplace_back(a.inverse(v), v);
        v *= (1.0 + eps);
    }
    anchors.emplace_back(a.inverse(v_top), vsup);  // final chord jumps to the sup

    // Merge the tangent piece with the first chord when the chord's line
    // crosses the tangent inside (0, t_delta]: removes the zero-slope bridge
    // and keeps the approximation concave for concave inputs.
    bool merged = false;
    if (bps.size() == 1 && anchors.size() >= 2) {
        double xa = anchors[0].first, ya = anchors[0].second;
        double xb = anchors[1].first, yb = anchors[1].second;
        double chord_slope = (yb - ya) / (xb - xa);
        if (chord_slope < slope0 - 1e-15) {
            double intercept = ya - chord_slope * xa;
            double t_x = intercept / (slope0 - chord_slope);
            if (t_x > 1e-15 && t_x <= t_delta + 1e-15) {
                bps.emplace_back(t_x, slope0 * t_x);
                anchors.erase(anchors.begin());
                merged = true;
            }
        }
    }
    if (!merged && bps.size() == 1) {
        bps.emplace_back(t_delta, y1);  // explicit tangent end + bridge
    }
    for (const auto& p : anchors) {
        if (p.first > bps.back().first + 1e-15)
            bps.push_back(p);
        else if (p.second > bps.back().second)
            bps.back().second = p.second;
    }
    return PWLCurve(std::move(bps), true);
}

}  // namespace detail

/**
 * @brief Piecewise-linear approximation of a non-decreasing curve.
 *
 * Band flavor: relative error |f - approx|/f <= eps for all t > 0.
 * Upper flavor: f <= approx <= f/(1-eps) (built by scaling a band
 * approximation at alpha = eps/(2-eps) by 1/(1-alpha) and clamping at the
 * curve's supremum).
 *
 * Linear and PWL specs are already piecewise linear and are returned exactly.
 */
inline PWLCurve approximate(const CurveSpec& spec, double eps, ApproxFlavor flavor) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("approximate: eps must lie in (0, 1)");
    if (spec.kind == CurveKind::Linear) {
        double sat = 1.0 / spec.rate;
        return PWLCurve({{0.0, 0.0}, {sat, 1.0}}, true);
    }
    if (spec.kind == CurveKind::Pwl) return spec.pwl;
    if (spec.kind == CurveKind::Sampled && !is_non_decreasing(spec.samples))
        throw NonMonotoneCurveError("approximate: curve is not non-decreasing; monotonize first");

    auto adapter = detail::make_adapter(spec);
    if (flavor == ApproxFlavor::Band) return detail::approximate_band(adapter, eps);

    // Upper flavor: scale a tighter band so every piece dominates f, then
    // clamp at the supremum (the clamp point lands exactly at f = (1-eps)*sup).
    double alpha = eps / (2.0 - eps);
    PWLCurve band = detail::approximate_band(adapter, alpha);
    double scale = 1.0 / (1.0 - alpha);
    double vsup = adapter.sup_value;

    std::vector<std::pair<double, double>> bps;
    for (const auto& [t, v] : band.breakpoints()) {
        double sv = v * scale;
        if (sv >= vsup - 1e-15) {
            if (bps.empty() || bps.back().second < vsup - 1e-15) {
                // truncate the crossing piece at the supremum
                double t_prev = bps.empty() ? 0.0 : bps.back().first;
                double v_prev = bps.empty() ? 0.0 : bps.back().second;
                double w = (vsup - v_prev) / (sv - v_prev);
                bps.emplace_back(t_prev + w * (t - t_prev), vsup);
            }
            break;
        }
        bps.emplace_back(t, sv);
    }
    if (bps.empty() || bps.back().second < vsup - 1e-15)
        bps.emplace_back(band.saturation_time(), vsup);
    return PWLCurve(std::move(bps), true);
}

/**
 * @brief Max relative error of a PWL approximation over an evaluation grid.
 *
 * Grid is log-spaced over [t_lo, t_hi] (defaults span [1e-4, 30] divided by
 * the curve's initial slope); points where f < 1e-12 are skipped.
 */
inline double validate_pwl_error(const CurveSpec& spec, const PWLCurve& approx,
                                 int grid_points, double t_lo = 0.0, double t_hi = 0.0) {
    if (grid_points < 100)
        throw std::invalid_argument("validate_pwl_error: need at least 100 grid points");
    double lam = 1.0;
    switch (spec.kind) {
        case CurveKind::Linear:
        case CurveKind::Exponential:
            lam = spec.rate;
            break;
        case CurveKind::Pwl:
            lam = std::max(spec.pwl.segments().front().slope, 1e-6);
            break;
        case CurveKind::Sampled:
            lam = std::max(detail::make_adapter(spec).initial_slope, 1e-6);
            break;
    }
    if (t_lo <= 0.0) t_lo = 1e-4 / lam;
    if (t_hi <= 0.0) t_hi = 30.0 / lam;
    double worst = 0.0;
    double log_lo = std::log(t_lo), log_hi = std::log(t_hi);
    for (int k = 0; k < grid_points; ++k) {
        double t = std::exp(log_lo + (log_hi - log_lo) * k / (grid_points - 1));
        double f = eval_curve(spec, t);
        if (f < 1e-12) continue;
        double g = approx.eval(t);
        worst = std::max(worst, std::abs(f - g) / f);
    }
    return worst;
}

/// A maximal run of segments with strictly decreasing slopes.
struct ConcaveBlock {
    std::size_t seg_begin = 0;  ///< first segment index (inclusive)
    std::size_t seg_end = 0;    ///< one past the last segment index
    double t_begin = 0.0;
    double t_end = 0.0;         ///< +inf when the block holds the unbounded tail
    double v_begin = 0.0;
    double v_end = 0.0;
    double t_last_finite = 0.0; ///< last finite breakpoint inside the block
};

struct ConcaveBlocks {
    std::vector<ConcaveBlock> blocks;
};

/// Greedy left-to-right grouping: a block extends while the next slope is
/// strictly smaller (tolerance 1e-9); a slope that does not decrease starts a
/// new block.
inline ConcaveBlocks concave_blocks(const PWLCurve& curve) {
    const auto& segs = curve.segments();
    ConcaveBlocks out;
    std::size_t begin = 0;
    for (std::size_t k = 1; k <= segs.size(); ++k) {
        bool cut = (k == segs.size()) || !(segs[k].slope < segs[k - 1].slope - 1e-9);
        if (!cut) continue;
        ConcaveBlock b;
        b.seg_begin = begin;
        b.seg_end = k;
        b.t_begin = segs[begin].t_begin;
        b.t_end = segs[k - 1].t_end;
        b.t_last_finite = std::isfinite(b.t_end) ? b.t_end : segs[k - 1].t_begin;
        b.v_begin = segs[begin].value_at(b.t_begin);
        b.v_end = segs[k - 1].value_at(b.t_last_finite);
        out.blocks.push_back(b);
        begin = k;
    }
    return out;
}

}  // namespace tourplan
