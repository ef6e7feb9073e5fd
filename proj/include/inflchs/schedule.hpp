// schedule.hpp: time dependence of (L(t), H(t)) and the problem instance the
// solver consumes.

#pragma once

#include "inflchs/linalg.hpp"

#include "json.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace inflchs {

// One interval of a schedule on which a single pair applies (or, for
// callback schedules, is sampled at the midpoint).
struct Segment {
    double t0 = 0.0;
    double t1 = 0.0;
    std::size_t piece = 0;
};

class TimeSchedule {
public:
    enum class Kind { constant, piecewise_constant, callback_sampled };
    // Unshifted pair at time t.
    using Rule = std::function<linalg::HermitianPair(double)>;

    static TimeSchedule constant(linalg::HermitianPair pair);
    // breakpoints: 0 = b_0 < b_1 < ... < b_n = horizon; pairs.size() == n.
    static TimeSchedule piecewise(std::vector<double> breakpoints,
                                  std::vector<linalg::HermitianPair> pairs);
    // The rule is certified (Hermiticity, lambda0) at `probes` uniformly spaced
    // midpoints in [0, horizon].
    static TimeSchedule callback(double horizon, Rule rule, int probes = 33);

    Kind kind() const { return kind_; }
    bool exact_pieces() const { return kind_ != Kind::callback_sampled; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    // Callback schedules expose their probe samples here.
    const std::vector<linalg::HermitianPair>& pairs() const { return pairs_; }
    double horizon() const { return breakpoints_.back(); }
    linalg::Index dim() const { return pairs_.front().dim(); }

    // Shifted pair at time t in [0, horizon]; throws PropagationError otherwise.
    linalg::HermitianPair at(double t) const;

    double shift() const { return pairs_.front().shift; }
    double lambda0() const;
    // max_t ||L(t)|| of the shifted L.
    double max_norm_L() const;
    // max_t ||A(t)|| upper bound (||L - cI|| + ||H||) of the unshifted generator.
    double max_norm_A() const;

    // Adds the same c*I to every L so that min_t lambda0 >= target.
    TimeSchedule shifted_to(double lambda0_target) const;

    // Exact kinds: the pieces intersecting [0, T]. Callback kind: n_steps
    // uniform steps with piece index = step index.
    std::vector<Segment> segments(double T, int n_steps) const;

private:
    TimeSchedule() = default;

    Kind kind_ = Kind::constant;
    std::vector<double> breakpoints_;
    std::vector<linalg::HermitianPair> pairs_;
    Rule rule_;
    double callback_shift_ = 0.0;
};

struct ShiftRecord {
    double c = 0.0;
    double lambda0 = 0.0;
};

// A validated problem: du/dt = -(L(t) - cI + iH(t)) u, u(0) = u0, where the
// schedule stores the shifted L and the recorded c. Requires lambda0 > 0.
class ProblemInstance {
public:
    ProblemInstance(TimeSchedule schedule, linalg::Vector u0, std::string label,
                    nlohmann::json meta = nlohmann::json::object());

    const TimeSchedule& schedule() const { return schedule_; }
    const linalg::Vector& u0() const { return u0_; }
    const std::string& label() const { return label_; }
    linalg::Index dim() const { return u0_.size(); }
    ShiftRecord shift_record() const { return {schedule_.shift(), schedule_.lambda0()}; }
    // Builder metadata: parameters, conventions, diagnostics.
    const nlohmann::json& meta() const { return meta_; }

private:
    TimeSchedule schedule_;
    linalg::Vector u0_;
    std::string label_;
    nlohmann::json meta_;
};

} // namespace inflchs
