#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gpcrbo/acquisition.hpp"
#include "gpcrbo/model.hpp"

namespace gpcrbo {

// The four modeling cases: who is GPCR, who is a plain GP, and how failures
// reach the objective dataset.
enum class CaseKind {
    SelfConstrained = 1,  // objective is its own constraint
    BinaryOnly = 2,       // binary constraints absorbed into the objective
    LevelSetOnly = 3,     // standard-GP objective + GPCR level-set constraints
    Mixed = 4,            // GPCR objective + GPCR level-set constraints
};

struct FunctionSpec {
    KernelSpec kernel;
    NoiseSpec noise;
    ThresholdPrior prior;  // threshold hyperprior (used when GPCR-modeled)
};

struct CaseConfig {
    CaseKind kind = CaseKind::SelfConstrained;
    int dim = 0;
    FunctionSpec objective;
    std::vector<FunctionSpec> constraints;  // one per level-set constraint (M_L)
    int n_binary = 0;                       // M_B, absorbed into the objective
    bool evaluate_best_guess = true;        // per-iteration real evaluation of x_bg
    EPConfig ep;

    bool objective_is_gpcr() const { return kind != CaseKind::LevelSetOnly; }
    int n_level_set() const { return static_cast<int>(constraints.size()); }
    int n_constraints_total() const { return n_level_set() + n_binary; }
    void validate() const;
};

// One coupled experiment: the objective yields a value or just the unstable
// label; each constraint (level-set first, then binary) reports satisfaction
// and, for satisfied level-set constraints, a value.
struct ConstraintObservation {
    bool satisfied = true;
    std::optional<double> value;
};

struct CoupledObservation {
    std::optional<double> objective;  // nullopt = unstable
    std::vector<ConstraintObservation> constraints;
};

class Oracle {
public:
    virtual ~Oracle() = default;
    virtual CoupledObservation conduct_experiment(const Vector& x) = 0;
};

struct IterationRecord {
    int iteration = 0;  // 1-based
    Vector x_next;
    CoupledObservation observation;
    double threshold_objective = 0.0;        // NaN when the objective is a plain GP
    std::vector<double> threshold_constraints;
    Vector x_bg;
    double y_bg = std::numeric_limits<double>::quiet_NaN();
    bool ep_converged = true;
};

struct BOState {
    int iterations = 0;
    HybridDataset objective_data;
    std::vector<HybridDataset> constraint_data;
    std::vector<IterationRecord> records;
    std::string error;  // non-empty if an oracle failure aborted the run
};

// Route one coupled observation into the datasets: binary violations and
// objective instability both turn into an unstable objective point; level-set
// constraints always receive their own value-or-label.
void absorb_observation(const CaseConfig& config, const Vector& x, const CoupledObservation& obs,
                        HybridDataset& objective, std::vector<HybridDataset>& constraints);

// Posterior-mean minimizer among candidates meeting the probabilistic
// constraints at confidence 1 - delta; falls back to the most probably
// feasible candidate when none qualifies.
Vector best_guess(const GpcrModel& objective, const std::vector<const GpcrModel*>& constraints,
                  double delta, const Matrix& candidates);

// Incremental ask-tell driver for one optimization run. suggest() computes
// thresholds, refits, and maximizes the acquisition (the first point is
// uniform); observe() absorbs the result and records the best guess.
class BoSession {
public:
    BoSession(CaseConfig config, AcquisitionConfig acq, std::uint64_t seed);

    Vector suggest();
    void observe(const CoupledObservation& obs);

    int iteration() const { return iteration_; }  // completed iterations
    const BOState& state() const { return state_; }
    BOState& mutable_state() { return state_; }
    const CaseConfig& config() const { return config_; }
    const AcquisitionConfig& acquisition_config() const { return acq_; }

    Vector current_best_guess();  // recomputed on demand
    double threshold_objective() const { return threshold_objective_; }
    const std::vector<double>& threshold_constraints() const { return threshold_constraints_; }

private:
    void update_thresholds();
    void refit_models();
    std::vector<const GpcrModel*> constraint_pointers() const;

    CaseConfig config_;
    AcquisitionConfig acq_;
    Rng root_;
    int iteration_ = 0;
    BOState state_;
    double threshold_objective_ = 0.0;
    std::vector<double> threshold_constraints_;
    GpcrModel objective_model_;
    std::vector<GpcrModel> constraint_models_;
    std::optional<Vector> pending_suggestion_;
    std::optional<Matrix> last_grid_;
    double incumbent_y_ = std::numeric_limits<double>::infinity();  // best feasible value
};

// Full Algorithm-1 run against an in-process oracle.
BOState run(const CaseConfig& config, Oracle& oracle, int iterations,
            const AcquisitionConfig& acq, std::uint64_t seed);

}  // namespace gpcrbo
