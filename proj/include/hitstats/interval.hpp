#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace hitstats {

/// Subinterval of the unit interval with per-endpoint closure flags.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = true;
    bool hi_closed = false;

    Interval() = default;
    Interval(double lo_, double hi_, bool lo_closed_ = true, bool hi_closed_ = false)
        : lo(lo_), hi(hi_), lo_closed(lo_closed_), hi_closed(hi_closed_) {
        if (!(lo <= hi)) throw std::invalid_argument("Interval: lo > hi");
    }

    static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
    static Interval open(double lo, double hi) { return {lo, hi, false, false}; }
    static Interval left_closed(double lo, double hi) { return {lo, hi, true, false}; }

    double length() const { return hi - lo; }

    bool empty() const {
        if (lo < hi) return false;
        return !(lo_closed && hi_closed);  // degenerate point survives only if closed
    }

    bool contains(double x) const {
        if (x < lo || x > hi) return false;
        if (x == lo && !lo_closed) return false;
        if (x == hi && !hi_closed) return false;
        return true;
    }

    Interval intersect(const Interval& o) const {
        Interval r;
        if (lo > o.lo) { r.lo = lo; r.lo_closed = lo_closed; }
        else if (lo < o.lo) { r.lo = o.lo; r.lo_closed = o.lo_closed; }
        else { r.lo = lo; r.lo_closed = lo_closed && o.lo_closed; }
        if (hi < o.hi) { r.hi = hi; r.hi_closed = hi_closed; }
        else if (hi > o.hi) { r.hi = o.hi; r.hi_closed = o.hi_closed; }
        else { r.hi = hi; r.hi_closed = hi_closed && o.hi_closed; }
        if (r.lo > r.hi) return {};  // disjoint -> empty at origin
        return r;
    }

    double overlap_length(const Interval& o) const {
        double a = std::max(lo, o.lo), b = std::min(hi, o.hi);
        return b > a ? b - a : 0.0;
    }
};

/// Finite disjoint union of subintervals of [0,1], kept sorted by left endpoint.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(Interval iv) { if (!iv.empty()) components_.push_back(iv); }
    explicit IntervalSet(std::vector<Interval> ivs) { assign(std::move(ivs)); }

    static IntervalSet unit() { return IntervalSet(Interval::left_closed(0.0, 1.0)); }

    const std::vector<Interval>& components() const { return components_; }
    bool empty() const { return components_.empty(); }
    std::size_t size() const { return components_.size(); }

    double total_length() const {
        double s = 0.0;
        for (const auto& c : components_) s += c.length();
        return s;
    }

    bool contains(double x) const {
        // components are ordered; linear scan is fine for the small sets used here
        for (const auto& c : components_) {
            if (x < c.lo) return false;
            if (c.contains(x)) return true;
        }
        return false;
    }

    double lower_bound_point() const {
        if (components_.empty()) throw std::logic_error("IntervalSet: empty");
        return components_.front().lo;
    }
    double upper_bound_point() const {
        if (components_.empty()) throw std::logic_error("IntervalSet: empty");
        return components_.back().hi;
    }

    void add(Interval iv) {
        if (iv.empty()) return;
        components_.push_back(iv);
        normalize();
    }

    IntervalSet intersect(const IntervalSet& o) const {
        std::vector<Interval> out;
        for (const auto& a : components_)
            for (const auto& b : o.components_) {
                Interval r = a.intersect(b);
                if (!r.empty()) out.push_back(r);
            }
        return IntervalSet(std::move(out));
    }

    IntervalSet intersect(const Interval& iv) const { return intersect(IntervalSet(iv)); }

    /// Complement within [0,1), ignoring endpoint closure (sets agree mod null sets).
    IntervalSet complement_in_unit() const {
        std::vector<Interval> out;
        double cursor = 0.0;
        for (const auto& c : components_) {
            if (c.lo > cursor) out.push_back(Interval::left_closed(cursor, c.lo));
            cursor = std::max(cursor, c.hi);
        }
        if (cursor < 1.0) out.push_back(Interval::left_closed(cursor, 1.0));
        return IntervalSet(std::move(out));
    }

    IntervalSet set_union(const IntervalSet& o) const {
        std::vector<Interval> all = components_;
        all.insert(all.end(), o.components_.begin(), o.components_.end());
        return IntervalSet(std::move(all));
    }

    /// Coverage test up to endpoint tolerance: every component of *this lies in
    /// some chain of components of `o`, with gaps/overhangs below `tol`.
    bool subset_of(const IntervalSet& o, double tol = 1e-12) const {
        for (const auto& a : components_) {
            double need = a.lo;
            bool done = a.length() <= 0;
            for (const auto& b : o.components_) {
                if (b.hi < need - tol) continue;
                if (b.lo > need + tol) break;  // gap
                need = std::max(need, b.hi);
                if (need >= a.hi - tol) { done = true; break; }
            }
            if (!done && need < a.hi - tol) return false;
        }
        return true;
    }

    bool approx_equal(const IntervalSet& o, double tol = 1e-12) const {
        return subset_of(o, tol) && o.subset_of(*this, tol);
    }

private:
    void assign(std::vector<Interval> ivs) {
        components_ = std::move(ivs);
        normalize();
    }

    void normalize() {
        components_.erase(std::remove_if(components_.begin(), components_.end(),
                                         [](const Interval& i) { return i.empty(); }),
                          components_.end());
        std::sort(components_.begin(), components_.end(),
                  [](const Interval& a, const Interval& b) {
                      return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
                  });
        std::vector<Interval> merged;
        for (const auto& c : components_) {
            if (!merged.empty()) {
                Interval& last = merged.back();
                bool overlaps = c.lo < last.hi;
                bool touches = c.lo == last.hi && (last.hi_closed || c.lo_closed);
                if (overlaps || touches) {
                    if (c.hi > last.hi) { last.hi = c.hi; last.hi_closed = c.hi_closed; }
                    else if (c.hi == last.hi) last.hi_closed = last.hi_closed || c.hi_closed;
                    continue;
                }
            }
            merged.push_back(c);
        }
        components_ = std::move(merged);
    }

    std::vector<Interval> components_;
};

}  // namespace hitstats
