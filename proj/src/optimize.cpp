#include "tfwi/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "tfwi/error.hpp"
#include "tfwi/material.hpp"

namespace tfwi {

void FrequencySchedule::validate() const
{
    if (groups.empty()) {
        throw Error(ErrorCode::validation_error, "schedule has no frequency groups");
    }
    double previous_max = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& g = groups[i];
        if (g.empty()) {
            throw Error(ErrorCode::validation_error, "schedule group " + std::to_string(i) + " is empty");
        }
        for (double w : g) {
            if (!(w > 0.0) || !std::isfinite(w)) {
                throw Error(ErrorCode::validation_error,
                            "schedule group " + std::to_string(i) + " has a non-positive frequency");
            }
        }
        const double top = *std::max_element(g.begin(), g.end());
        if (i > 0 && !(top > previous_max)) {
            std::ostringstream msg;
            msg << "schedule group " << i << ": highest frequency " << top
                << " does not exceed the previous group's " << previous_max;
            throw Error(ErrorCode::validation_error, msg.str());
        }
        previous_max = top;
    }
}

std::vector<double> FrequencySchedule::all_frequencies() const
{
    std::set<double> distinct;
    for (const auto& g : groups) {
        distinct.insert(g.begin(), g.end());
    }
    return {distinct.begin(), distinct.end()};
}

FrequencySchedule FrequencySchedule::blind_test()
{
    FrequencySchedule s;
    for (int w = 300; w <= 1000; w += 100) {
        s.groups.push_back({static_cast<double>(w)});
    }
    for (int k = 0; k < 16; ++k) {
        s.groups.push_back({600.0 + 100.0 * k, 1200.0 + 200.0 * k});
    }
    for (int k = 1; k <= 4; ++k) {
        s.groups.push_back({2100.0 - 120.0 * k, 4200.0 + 200.0 * k});
    }
    return s;
}

void OptimizerSettings::validate() const
{
    if (max_iterations < 0) {
        throw Error(ErrorCode::validation_error, "optimizer.max_iterations must be non-negative");
    }
    if (!(stop_threshold >= 0.0)) {
        throw Error(ErrorCode::validation_error, "optimizer.stop_threshold must be non-negative");
    }
    if (!(gradient_tolerance >= 0.0)) {
        throw Error(ErrorCode::validation_error, "optimizer.gradient_tolerance must be non-negative");
    }
    if (history < 1) {
        throw Error(ErrorCode::validation_error, "optimizer.history must be at least 1");
    }
    if (line_search_rounds < 1 || max_backtracks < 0) {
        throw Error(ErrorCode::validation_error, "optimizer line-search limits must be positive");
    }
    if (!(first_step >= 0.0)) {
        throw Error(ErrorCode::validation_error, "optimizer.first_step must be non-negative");
    }
}

LbfgsHistory::LbfgsHistory(int capacity) : capacity_(capacity)
{
    if (capacity < 1) {
        throw Error(ErrorCode::invalid_argument, "L-BFGS capacity must be positive");
    }
}

bool LbfgsHistory::push(const RealVector& s, const RealVector& y)
{
    const double sy = s.dot(y);
    if (!(sy > 0.0) || !std::isfinite(sy)) {
        return false;
    }
    if (static_cast<int>(pairs_.size()) == capacity_) {
        pairs_.pop_front();
    }
    pairs_.push_back({s, y, 1.0 / sy});
    return true;
}

RealVector lbfgs_direction(const LbfgsHistory& history, const RealVector& gradient, const RealVector& h0)
{
    if (h0.size() != 0 && h0.size() != gradient.size()) {
        throw Error(ErrorCode::dimension_mismatch, "initial Hessian scaling does not match the gradient");
    }
    const auto& pairs = history.pairs();
    RealVector q = gradient;
    std::vector<double> alpha(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
        alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
        q -= alpha[i] * pairs[i].y;
    }
    double gamma = 1.0;
    if (!pairs.empty()) {
        const auto& last = pairs.back();
        const double yhy = h0.size() == 0 ? last.y.squaredNorm() : last.y.dot(h0.cwiseProduct(last.y));
        if (yhy > 0.0) {
            gamma = 1.0 / (last.rho * yhy);
        }
    }
    RealVector r = h0.size() == 0 ? RealVector(gamma * q) : RealVector(gamma * h0.cwiseProduct(q));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double beta = pairs[i].rho * pairs[i].y.dot(r);
        r += (alpha[i] - beta) * pairs[i].s;
    }
    return -r;
}

std::optional<double> parabola_vertex(double a0, double f0, double a1, double f1, double a2, double f2)
{
    if (a0 == a1 || a1 == a2 || a0 == a2) {
        return std::nullopt;
    }
    const double d01 = (f1 - f0) / (a1 - a0);
    const double d12 = (f2 - f1) / (a2 - a1);
    const double c2 = (d12 - d01) / (a2 - a0);
    if (!(c2 > 0.0) || !std::isfinite(c2)) {
        return std::nullopt;
    }
    const double c1 = d01 - c2 * (a0 + a1);
    return -c1 / (2.0 * c2);
}

LineSearchResult line_search(const std::function<double(double)>& chi, double chi0, double alpha_init, int rounds,
                             int max_backtracks)
{
    if (!(alpha_init > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "initial step length must be positive");
    }
    LineSearchResult result;
    const auto eval = [&](double a) {
        ++result.evaluations;
        const double f = chi(a);
        return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    };
    struct Sample {
        double a;
        double f;
    };
    std::vector<Sample> samples{{0.0, chi0}};

    double a1 = alpha_init;
    double f1 = eval(a1);
    bool backtracked = false;
    for (int k = 0; !(f1 < chi0); ++k) {
        if (k >= max_backtracks) {
            result.alpha = 0.0;
            result.value = chi0;
            return result;
        }
        samples.push_back({a1, f1});
        a1 *= 0.5;
        f1 = eval(a1);
        backtracked = true;
    }
    samples.push_back({a1, f1});
    if (!backtracked) {
        samples.push_back({2.0 * a1, eval(2.0 * a1)});
    }

    const auto by_step = [](const Sample& x, const Sample& y) { return x.a < y.a; };
    for (int round = 0; round < rounds; ++round) {
        std::sort(samples.begin(), samples.end(), by_step);
        const auto best = static_cast<std::size_t>(
            std::min_element(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) { return x.f < y.f; }) -
            samples.begin());
        const std::size_t mid = std::clamp<std::size_t>(best, 1, samples.size() - 2);
        const Sample& l = samples[mid - 1];
        const Sample& m = samples[mid];
        const Sample& r = samples[mid + 1];
        ++result.fits;
        const auto vertex = parabola_vertex(l.a, l.f, m.a, m.f, r.a, r.f);
        if (!vertex || !(*vertex > 0.0)) {
            break;
        }
        const double a = std::min(*vertex, 4.0 * samples.back().a);
        const bool known = std::any_of(samples.begin(), samples.end(),
                                       [&](const Sample& s) { return std::abs(s.a - a) <= 1e-9 * a; });
        if (known) {
            break;
        }
        samples.push_back({a, eval(a)});
    }
    const auto best = *std::min_element(samples.begin(), samples.end(),
                                        [](const Sample& x, const Sample& y) { return x.f < y.f; });
    result.alpha = best.a;
    result.value = best.f;
    result.success = best.a > 0.0 && best.f < chi0;
    return result;
}

GroupResult run_frequency_group(Objective& objective, const RealVector& initial, const OptimizerSettings& settings,
                                int group_index)
{
    settings.validate();
    GroupResult result;
    RealVector m = objective.admissible(initial);
    RealVector g;
    double value = objective.value_and_gradient(m, g);
    result.initial_misfit = value;
    result.final_misfit = value;
    result.model = m;
    if (value == 0.0) {
        return result;
    }
    LbfgsHistory history(settings.history);
    for (int j = 0; j < settings.max_iterations; ++j) {
        if (settings.gradient_tolerance > 0.0 && g.norm() <= settings.gradient_tolerance) {
            break;
        }
        const RealVector h0 = objective.preconditioner(m);
        RealVector d = lbfgs_direction(history, g, h0);
        if (!(g.dot(d) < 0.0)) {
            history.clear();
            d = lbfgs_direction(history, g, h0);
            if (!(g.dot(d) < 0.0)) {
                break;
            }
        }
        double alpha_init = 1.0;
        if (history.empty() && settings.first_step > 0.0) {
            alpha_init = settings.first_step / d.cwiseAbs().maxCoeff();
        }
        const auto trial = [&](double a) { return objective.value(objective.admissible(m + a * d)); };
        const LineSearchResult ls =
            line_search(trial, value, alpha_init, settings.line_search_rounds, settings.max_backtracks);
        if (!ls.success) {
            std::ostringstream msg;
            msg << "line search found no decrease in group " << group_index << " at iteration " << j + 1
                << " after " << ls.evaluations << " evaluations (misfit " << value << ")";
            result.failed = true;
            result.diagnostics = msg.str();
            break;
        }
        const RealVector next = objective.admissible(m + ls.alpha * d);
        RealVector g_next;
        const double value_next = objective.value_and_gradient(next, g_next);
        history.push(next - m, g_next - g);
        const double reduction = (value - value_next) / std::abs(value);
        m = next;
        g = std::move(g_next);
        value = value_next;
        ++result.iterations;
        result.log.push_back({group_index, j + 1, value, ls.alpha, g.norm()});
        if (reduction < settings.stop_threshold) {
            break;
        }
    }
    result.model = m;
    result.final_misfit = value;
    return result;
}

InversionResult run_inversion(const ObjectiveFactory& factory, const RealVector& initial,
                              const FrequencySchedule& schedule, const OptimizerSettings& settings,
                              const GroupCallback& on_group)
{
    schedule.validate();
    InversionResult out;
    out.model = initial;
    for (std::size_t i = 0; i < schedule.groups.size(); ++i) {
        auto objective = factory(i, schedule.groups[i]);
        GroupResult group = run_frequency_group(*objective, out.model, settings, static_cast<int>(i));
        out.model = group.model;
        out.log.insert(out.log.end(), group.log.begin(), group.log.end());
        if (group.failed) {
            out.failures.push_back(group.diagnostics);
            if (settings.strict) {
                throw Error(ErrorCode::line_search_failure, group.diagnostics);
            }
        }
        if (on_group) {
            on_group(i, group);
        }
        out.groups.push_back(std::move(group));
    }
    return out;
}

FwiObjective::FwiObjective(const ForwardModel& forward, RecordSet observed, StationLayout layout,
                           ComplexMatrix amplitudes, PreconditionMask mask)
    : forward_(&forward),
      observed_(std::move(observed)),
      layout_(std::move(layout)),
      amplitudes_(std::move(amplitudes)),
      mask_(std::move(mask))
{
    const auto& mesh = forward.mesh();
    if (mask_.factors.size() != mesh.node_count()) {
        throw Error(ErrorCode::dimension_mismatch, "mask does not match the mesh");
    }
    const auto areas = lumped_node_areas(mesh);
    const auto n = static_cast<Eigen::Index>(mesh.node_count());
    scale_.resize(2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double s = mask_.factors[static_cast<std::size_t>(k)] / areas[static_cast<std::size_t>(k)];
        scale_[k] = s;
        scale_[n + k] = s;
    }
}

double FwiObjective::value(const RealVector& m)
{
    ++evaluations_;
    return evaluate_misfit(*forward_, ModelVector::from_eigen(m), observed_, layout_, amplitudes_, false).misfit.value;
}

double FwiObjective::value_and_gradient(const RealVector& m, RealVector& gradient)
{
    ++evaluations_;
    auto r = evaluate_misfit(*forward_, ModelVector::from_eigen(m), observed_, layout_, amplitudes_, true);
    gradient = std::move(r.gradient.raw);
    return r.misfit.value;
}

RealVector FwiObjective::preconditioner(const RealVector& /*m*/) { return scale_; }

RealVector FwiObjective::admissible(const RealVector& m)
{
    return clamp_to_valid(ModelVector::from_eigen(m)).as_eigen();
}

}  // namespace tfwi
