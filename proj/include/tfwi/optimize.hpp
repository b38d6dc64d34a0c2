#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tfwi/adjoint.hpp"
#include "tfwi/forward.hpp"
#include "tfwi/types.hpp"

namespace tfwi {

/// Ordered frequency groups (rad/s). Each group's highest frequency must
/// exceed the previous group's highest frequency.
struct FrequencySchedule {
    std::vector<std::vector<double>> groups;

    void validate() const;
    /// Distinct frequencies over all groups, ascending.
    [[nodiscard]] std::vector<double> all_frequencies() const;

    /// 28 groups: {300} ... {1000}, {600, 1200} ... {2100, 4200},
    /// {1980, 4400} ... {1620, 5000}.
    static FrequencySchedule blind_test();

    friend bool operator==(const FrequencySchedule&, const FrequencySchedule&) = default;
};

struct OptimizerSettings {
    int max_iterations = 20;
    /// Stop once (chi_j - chi_{j+1}) / chi_j drops below this value.
    double stop_threshold = 1e-3;
    /// Stop once ||g|| falls to this value (0 disables).
    double gradient_tolerance = 0.0;
    int history = 5;
    int line_search_rounds = 5;
    int max_backtracks = 30;
    /// First step of a group moves the model by at most this much (0: step 1).
    double first_step = 0.0;
    /// Abort the inversion on a failing group instead of moving on.
    bool strict = false;

    void validate() const;
    friend bool operator==(const OptimizerSettings&, const OptimizerSettings&) = default;
};

/// Limited-memory (s, y) pairs, oldest first.
class LbfgsHistory {
public:
    explicit LbfgsHistory(int capacity = 5);

    /// Stores the pair unless s^T y <= 0; returns whether it was stored.
    bool push(const RealVector& s, const RealVector& y);
    void clear() { pairs_.clear(); }
    [[nodiscard]] std::size_t size() const { return pairs_.size(); }
    [[nodiscard]] int capacity() const { return capacity_; }
    [[nodiscard]] bool empty() const { return pairs_.empty(); }

    struct Pair {
        RealVector s;
        RealVector y;
        double rho;  // 1 / (s^T y)
    };
    [[nodiscard]] const std::deque<Pair>& pairs() const { return pairs_; }

private:
    int capacity_;
    std::deque<Pair> pairs_;
};

/// Two-loop recursion d = -H g with H0 = gamma diag(h0) and
/// gamma = s^T y / (y^T diag(h0) y) from the newest pair (1 when empty).
/// An empty h0 means the identity.
RealVector lbfgs_direction(const LbfgsHistory& history, const RealVector& gradient, const RealVector& h0 = {});

/// Minimizer of the parabola through three points, if it is convex.
std::optional<double> parabola_vertex(double a0, double f0, double a1, double f1, double a2, double f2);

struct LineSearchResult {
    double alpha = 0.0;
    double value = 0.0;
    int evaluations = 0;
    int fits = 0;
    bool success = false;
};

/// Three-point quadratic line search along a descent direction: samples
/// chi at 0, alpha_init and 2 alpha_init (halving first while chi(alpha_init)
/// >= chi(0)), then refits the parabola through the best bracketing triple
/// for up to `rounds` rounds.
LineSearchResult line_search(const std::function<double(double)>& chi, double chi0, double alpha_init, int rounds = 5,
                             int max_backtracks = 30);

/// Function minimized by the optimizer.
class Objective {
public:
    virtual ~Objective() = default;
    virtual double value(const RealVector& m) = 0;
    virtual double value_and_gradient(const RealVector& m, RealVector& gradient) = 0;
    /// Diagonal of the initial inverse-Hessian scaling (empty: identity).
    virtual RealVector preconditioner(const RealVector& /*m*/) { return {}; }
    /// Nearest admissible point; trial models pass through this.
    virtual RealVector admissible(const RealVector& m) { return m; }
};

struct IterationLog {
    int group = 0;
    int iteration = 0;
    double misfit = 0.0;
    double step = 0.0;
    double gradient_norm = 0.0;
};

struct GroupResult {
    RealVector model;
    double initial_misfit = 0.0;
    double final_misfit = 0.0;
    int iterations = 0;
    bool failed = false;
    std::string diagnostics;
    std::vector<IterationLog> log;
};

/// L-BFGS iterations with a fresh history, starting from steepest descent.
GroupResult run_frequency_group(Objective& objective, const RealVector& initial, const OptimizerSettings& settings,
                                int group_index = 0);

struct InversionResult {
    RealVector model;
    std::vector<IterationLog> log;
    std::vector<GroupResult> groups;
    std::vector<std::string> failures;
};

using ObjectiveFactory = std::function<std::unique_ptr<Objective>(std::size_t group, const std::vector<double>& omegas)>;
using GroupCallback = std::function<void(std::size_t group, const GroupResult& result)>;

/// Groups in order, each seeded with the previous result.
InversionResult run_inversion(const ObjectiveFactory& factory, const RealVector& initial,
                              const FrequencySchedule& schedule, const OptimizerSettings& settings,
                              const GroupCallback& on_group = {});

/// Least-squares waveform misfit over one frequency group as an Objective
/// over the nodal velocities.
class FwiObjective : public Objective {
public:
    /// observed must hold exactly the group's frequencies; amplitudes is
    /// frequencies x sources (empty for unit amplitudes).
    FwiObjective(const ForwardModel& forward, RecordSet observed, StationLayout layout, ComplexMatrix amplitudes,
                 PreconditionMask mask);

    double value(const RealVector& m) override;
    double value_and_gradient(const RealVector& m, RealVector& gradient) override;
    /// mask / A_k on both blocks.
    RealVector preconditioner(const RealVector& m) override;
    /// clamp_to_valid.
    RealVector admissible(const RealVector& m) override;

    [[nodiscard]] int evaluations() const { return evaluations_; }

private:
    const ForwardModel* forward_;
    RecordSet observed_;
    StationLayout layout_;
    ComplexMatrix amplitudes_;
    PreconditionMask mask_;
    RealVector scale_;
    int evaluations_ = 0;
};

}  // namespace tfwi
