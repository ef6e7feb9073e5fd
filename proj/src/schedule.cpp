#include "inflchs/schedule.hpp"

#include "inflchs/errors.hpp"

#include <algorithm>
#include <cmath>

namespace inflchs {

namespace {

using linalg::HermitianPair;

// Re-symmetrizes and re-certifies a pair; lambda0 is never taken on trust.
HermitianPair certified(const HermitianPair& in) {
    HermitianPair out;
    out.L = linalg::checked_hermitian(in.L, "schedule pair L");
    out.H = linalg::checked_hermitian(in.H, "schedule pair H");
    if (out.L.rows() != out.H.rows()) {
        throw DimensionError("schedule pair: L and H dimensions differ");
    }
    out.shift = in.shift;
    out.lambda0 = linalg::min_hermitian_eigenvalue(out.L);
    return out;
}

} // namespace

TimeSchedule TimeSchedule::constant(HermitianPair pair) {
    TimeSchedule s;
    s.kind_ = Kind::constant;
    s.breakpoints_ = {0.0, std::numeric_limits<double>::infinity()};
    s.pairs_.push_back(certified(pair));
    return s;
}

TimeSchedule TimeSchedule::piecewise(std::vector<double> breakpoints,
                                     std::vector<HermitianPair> pairs) {
    if (pairs.empty() || breakpoints.size() != pairs.size() + 1) {
        throw InvalidArgument("piecewise schedule: need n + 1 breakpoints for n pairs");
    }
    if (breakpoints.front() != 0.0) {
        throw InvalidArgument("piecewise schedule: first breakpoint must be 0");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        if (!(breakpoints[i] > breakpoints[i - 1]) || !std::isfinite(breakpoints[i])) {
            throw InvalidArgument("piecewise schedule: breakpoints must be strictly ascending");
        }
    }
    TimeSchedule s;
    s.kind_ = Kind::piecewise_constant;
    s.breakpoints_ = std::move(breakpoints);
    for (const auto& p : pairs) {
        s.pairs_.push_back(certified(p));
        if (s.pairs_.back().dim() != s.pairs_.front().dim()) {
            throw DimensionError("piecewise schedule: pair dimensions differ");
        }
        if (std::abs(s.pairs_.back().shift - s.pairs_.front().shift) > 1e-14) {
            throw InvalidArgument("piecewise schedule: all pairs must carry the same shift");
        }
    }
    return s;
}

TimeSchedule TimeSchedule::callback(double horizon, Rule rule, int probes) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw InvalidArgument("callback schedule: horizon must be positive and finite");
    }
    if (!rule || probes < 1) {
        throw InvalidArgument("callback schedule: need a rule and at least one probe");
    }
    TimeSchedule s;
    s.kind_ = Kind::callback_sampled;
    s.breakpoints_ = {0.0, horizon};
    s.rule_ = std::move(rule);
    for (int i = 0; i < probes; ++i) {
        const double t = horizon * (i + 0.5) / probes;
        HermitianPair p = s.rule_(t);
        p.shift = 0.0;
        s.pairs_.push_back(certified(p));
        if (s.pairs_.back().dim() != s.pairs_.front().dim()) {
            throw DimensionError("callback schedule: rule changes dimension over time");
        }
    }
    return s;
}

HermitianPair TimeSchedule::at(double t) const {
    if (!(t >= 0.0) || t > horizon() * (1.0 + 1e-14)) {
        throw PropagationError("schedule evaluated outside [0, " + std::to_string(horizon()) +
                                   "] at t = " + std::to_string(t),
                               t);
    }
    switch (kind_) {
    case Kind::constant:
        return pairs_.front();
    case Kind::piecewise_constant: {
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
        std::size_t idx = static_cast<std::size_t>(std::distance(breakpoints_.begin(), it));
        idx = std::clamp<std::size_t>(idx, 1, pairs_.size()) - 1;
        return pairs_[idx];
    }
    case Kind::callback_sampled:
        break;
    }
    HermitianPair p;
    try {
        p = rule_(t);
    } catch (const Error& e) {
        throw PropagationError(std::string("schedule rule failed: ") + e.what(), t);
    }
    if (!linalg::is_hermitian(p.L) || !linalg::is_hermitian(p.H) || p.L.rows() != dim()) {
        throw PropagationError("schedule rule returned an invalid pair", t);
    }
    p.L.diagonal().array() += callback_shift_;
    p.shift = callback_shift_;
    return p;
}

double TimeSchedule::lambda0() const {
    double lam = std::numeric_limits<double>::infinity();
    for (const auto& p : pairs_) {
        lam = std::min(lam, p.lambda0);
    }
    return lam;
}

double TimeSchedule::max_norm_L() const {
    double n = 0.0;
    for (const auto& p : pairs_) {
        n = std::max(n, linalg::hermitian_spectral_norm(p.L));
    }
    return n;
}

double TimeSchedule::max_norm_A() const {
    double n = 0.0;
    for (const auto& p : pairs_) {
        linalg::Matrix unshifted = p.L;
        unshifted.diagonal().array() -= p.shift;
        n = std::max(n, linalg::hermitian_spectral_norm(unshifted) +
                            linalg::hermitian_spectral_norm(p.H));
    }
    return n;
}

TimeSchedule TimeSchedule::shifted_to(double lambda0_target) const {
    if (!(lambda0_target > 0.0)) {
        throw InvalidArgument("shifted_to: target must be positive");
    }
    const double c = std::max(0.0, lambda0_target - lambda0());
    TimeSchedule s = *this;
    if (c == 0.0) {
        return s;
    }
    for (auto& p : s.pairs_) {
        p.L.diagonal().array() += c;
        p.shift += c;
        p.lambda0 = linalg::min_hermitian_eigenvalue(p.L);
    }
    if (kind_ == Kind::callback_sampled) {
        s.callback_shift_ += c;
    }
    return s;
}

std::vector<Segment> TimeSchedule::segments(double T, int n_steps) const {
    if (!(T >= 0.0) || !std::isfinite(T)) {
        throw InvalidArgument("segments: T must be finite and non-negative");
    }
    if (T > horizon() * (1.0 + 1e-14)) {
        throw PropagationError("evolution time " + std::to_string(T) +
                                   " exceeds schedule horizon " + std::to_string(horizon()),
                               horizon());
    }
    std::vector<Segment> out;
    if (T == 0.0) {
        return out;
    }
    if (kind_ == Kind::callback_sampled) {
        if (n_steps < 1) {
            throw InvalidArgument("segments: n_steps must be at least 1");
        }
        for (int j = 0; j < n_steps; ++j) {
            out.push_back({T * j / n_steps, T * (j + 1) / n_steps, static_cast<std::size_t>(j)});
        }
        return out;
    }
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        const double a = breakpoints_[i];
        const double b = std::min(breakpoints_[i + 1], T);
        if (b > a) {
            out.push_back({a, b, i});
        }
        if (breakpoints_[i + 1] >= T) {
            break;
        }
    }
    return out;
}

ProblemInstance::ProblemInstance(TimeSchedule schedule, linalg::Vector u0, std::string label,
                                 nlohmann::json meta)
    : schedule_(std::move(schedule)), u0_(std::move(u0)), label_(std::move(label)),
      meta_(std::move(meta)) {
    if (u0_.size() != schedule_.dim()) {
        throw DimensionError("ProblemInstance: u0 length " + std::to_string(u0_.size()) +
                             " does not match schedule dimension " +
                             std::to_string(schedule_.dim()));
    }
    if (!u0_.allFinite() || !(u0_.norm() > 0.0)) {
        throw InvalidArgument("ProblemInstance: u0 must be finite with positive norm");
    }
    if (!(schedule_.lambda0() > 0.0)) {
        throw ContractViolation("ProblemInstance: certified lambda0 = " +
                                std::to_string(schedule_.lambda0()) +
                                " is not positive; apply a spectral shift");
    }
}

} // namespace inflchs
