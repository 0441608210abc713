#include "gpcrbo/bo.hpp"

#include <algorithm>
#include <cmath>

namespace gpcrbo {

void CaseConfig::validate() const {
    if (dim <= 0) {
        throw InvalidArgumentError("case config: dimension must be positive");
    }
    objective.kernel.validate();
    if (objective.kernel.dim() != dim) {
        throw InvalidArgumentError("case config: objective kernel dimension mismatch");
    }
    for (const FunctionSpec& c : constraints) {
        c.kernel.validate();
        if (c.kernel.dim() != dim) {
            throw InvalidArgumentError("case config: constraint kernel dimension mismatch");
        }
        if (!(c.prior.std_dev > 0.0)) {
            throw InvalidArgumentError("case config: constraint threshold prior std must be > 0");
        }
    }
    if (n_binary < 0) {
        throw InvalidArgumentError("case config: negative binary constraint count");
    }
    switch (kind) {
        case CaseKind::SelfConstrained:
            if (n_level_set() != 0 || n_binary != 0) {
                throw InvalidArgumentError("case 1 takes no external constraints");
            }
            break;
        case CaseKind::BinaryOnly:
            if (n_level_set() != 0 || n_binary < 1) {
                throw InvalidArgumentError("case 2 needs binary constraints only");
            }
            break;
        case CaseKind::LevelSetOnly:
            if (n_level_set() < 1 || n_binary != 0) {
                throw InvalidArgumentError("case 3 needs level-set constraints only");
            }
            break;
        case CaseKind::Mixed:
            if (n_level_set() < 1) {
                throw InvalidArgumentError("case 4 needs at least one level-set constraint");
            }
            break;
    }
    if (objective_is_gpcr() && !(objective.prior.std_dev > 0.0)) {
        throw InvalidArgumentError("case config: objective threshold prior std must be > 0");
    }
}

void absorb_observation(const CaseConfig& config, const Vector& x, const CoupledObservation& obs,
                        HybridDataset& objective, std::vector<HybridDataset>& constraints) {
    if (static_cast<int>(obs.constraints.size()) != config.n_constraints_total()) {
        throw InvalidArgumentError("observation: constraint count mismatch");
    }
    if (static_cast<int>(constraints.size()) != config.n_level_set()) {
        throw InvalidArgumentError("observation: constraint dataset count mismatch");
    }
    const bool objective_stable = obs.objective.has_value();
    if (!objective_stable && config.kind == CaseKind::LevelSetOnly) {
        throw InvalidArgumentError("case 3 models the objective as a plain GP; it must yield a value");
    }
    bool binary_violated = false;
    for (int j = config.n_level_set(); j < config.n_constraints_total(); ++j) {
        binary_violated = binary_violated || !obs.constraints[j].satisfied;
    }
    // Validate before touching any dataset so a rejected observation leaves
    // the state unchanged.
    for (int j = 0; j < config.n_level_set(); ++j) {
        if (obs.constraints[j].satisfied && !obs.constraints[j].value.has_value()) {
            throw InvalidArgumentError("satisfied level-set constraint must carry a value");
        }
    }
    // Level-set constraints update their own datasets regardless of the
    // objective outcome; the observations are uncoupled.
    for (int j = 0; j < config.n_level_set(); ++j) {
        const ConstraintObservation& c = obs.constraints[j];
        if (c.satisfied) {
            constraints[j].add_stable(x, *c.value);
        } else {
            constraints[j].add_unstable(x);
        }
    }
    if (!objective_stable || binary_violated) {
        objective.add_unstable(x);
    } else {
        objective.add_stable(x, *obs.objective);
    }
}

Vector best_guess(const GpcrModel& objective, const std::vector<const GpcrModel*>& constraints,
                  double delta, const Matrix& candidates) {
    if (candidates.rows() == 0) {
        throw InvalidArgumentError("best_guess needs at least one candidate");
    }
    double best_mean = std::numeric_limits<double>::infinity();
    Eigen::Index best_index = -1;
    double top_prob = -1.0;
    Eigen::Index top_prob_index = 0;
    for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
        const Vector x = candidates.row(i);
        const double prob = constraint_probability(x, constraints);
        if (prob > top_prob) {
            top_prob = prob;
            top_prob_index = i;
        }
        if (prob >= 1.0 - delta) {
            double mean, variance;
            objective.predict_one(x, mean, variance);
            if (mean < best_mean) {
                best_mean = mean;
                best_index = i;
            }
        }
    }
    return candidates.row(best_index >= 0 ? best_index : top_prob_index);
}

BoSession::BoSession(CaseConfig config, AcquisitionConfig acq, std::uint64_t seed)
    : config_(std::move(config)), acq_(acq), root_(seed) {
    config_.validate();
    state_.objective_data = HybridDataset(config_.dim);
    state_.constraint_data.assign(config_.n_level_set(), HybridDataset(config_.dim));
    threshold_constraints_.assign(config_.n_level_set(), 0.0);
}

std::vector<const GpcrModel*> BoSession::constraint_pointers() const {
    std::vector<const GpcrModel*> out;
    out.reserve(constraint_models_.size());
    for (const GpcrModel& m : constraint_models_) {
        out.push_back(&m);
    }
    return out;
}

void BoSession::update_thresholds() {
    if (config_.objective_is_gpcr()) {
        threshold_objective_ =
            estimate_threshold_map(state_.objective_data, config_.objective.kernel,
                                   config_.objective.noise, config_.objective.prior, config_.ep);
    } else {
        threshold_objective_ = std::numeric_limits<double>::quiet_NaN();
    }
    for (int j = 0; j < config_.n_level_set(); ++j) {
        threshold_constraints_[j] =
            estimate_threshold_map(state_.constraint_data[j], config_.constraints[j].kernel,
                                   config_.constraints[j].noise, config_.constraints[j].prior,
                                   config_.ep);
    }
}

void BoSession::refit_models() {
    const double fit_threshold =
        config_.objective_is_gpcr() ? threshold_objective_ : kNoThreshold;
    objective_model_ = GpcrModel::fit(state_.objective_data, config_.objective.kernel,
                                      config_.objective.noise, fit_threshold, config_.ep);
    constraint_models_.clear();
    constraint_models_.reserve(config_.n_level_set());
    for (int j = 0; j < config_.n_level_set(); ++j) {
        constraint_models_.push_back(
            GpcrModel::fit(state_.constraint_data[j], config_.constraints[j].kernel,
                           config_.constraints[j].noise, threshold_constraints_[j], config_.ep));
    }
}

Vector BoSession::suggest() {
    if (pending_suggestion_) {
        return *pending_suggestion_;
    }
    update_thresholds();
    refit_models();
    const int t = iteration_ + 1;
    Vector x(config_.dim);
    if (iteration_ == 0) {
        Rng init = root_.sub("init");
        for (int d = 0; d < config_.dim; ++d) {
            x[d] = init.uniform();
        }
        last_grid_.reset();
    } else {
        Rng grid_rng = root_.sub("grid", t);
        Matrix grid = candidate_grid(acq_.candidate_grid, config_.dim, grid_rng);
        // The evaluated locations join the candidate set: the probability of
        // feasibility peaks exactly there once data accumulates, and without
        // them the mode test can miss every 1-delta point and lock the
        // search into re-evaluating a known feasible input.
        const Matrix evaluated = state_.objective_data.all_x();
        if (evaluated.rows() > 0) {
            const Eigen::Index rows = grid.rows();
            grid.conservativeResize(rows + evaluated.rows(), config_.dim);
            grid.bottomRows(evaluated.rows()) = evaluated;
        }
        Rng sample_rng = root_.sub("samples", t);
        const std::vector<const GpcrModel*> cons = constraint_pointers();
        const MinValueSamples samples =
            sample_constrained_min(objective_model_, cons, acq_, sample_rng, incumbent_y_);
        const MescoMode mode = determine_mode(grid, cons, acq_.delta);
        const auto surface = [&](const Vector& point) {
            return alpha_mesco(point, objective_model_, cons, samples, mode);
        };
        x = maximize_acquisition(surface, grid, acq_).x;
        last_grid_ = grid;
    }
    pending_suggestion_ = x;
    return x;
}

void BoSession::observe(const CoupledObservation& obs) {
    if (!pending_suggestion_) {
        throw Error("observe called without an outstanding suggestion");
    }
    const int t = iteration_ + 1;
    absorb_observation(config_, *pending_suggestion_, obs, state_.objective_data,
                       state_.constraint_data);
    if (obs.objective.has_value()) {
        bool feasible = true;
        for (const ConstraintObservation& c : obs.constraints) {
            feasible = feasible && c.satisfied;
        }
        if (feasible && *obs.objective < incumbent_y_) {
            incumbent_y_ = *obs.objective;
        }
    }
    refit_models();

    Matrix candidates;
    if (last_grid_) {
        candidates = *last_grid_;
    } else {
        Rng grid_rng = root_.sub("bg_grid", t);
        candidates = candidate_grid(acq_.candidate_grid, config_.dim, grid_rng);
    }
    const int n_stable = state_.objective_data.n_stable();
    if (n_stable > 0) {
        const Eigen::Index rows = candidates.rows();
        candidates.conservativeResize(rows + n_stable, config_.dim);
        candidates.bottomRows(n_stable) = state_.objective_data.stable_x;
    }
    const std::vector<const GpcrModel*> cons = constraint_pointers();
    const Vector x_bg = best_guess(objective_model_, cons, acq_.delta, candidates);

    IterationRecord record;
    record.iteration = t;
    record.x_next = *pending_suggestion_;
    record.observation = obs;
    record.threshold_objective = threshold_objective_;
    record.threshold_constraints = threshold_constraints_;
    record.x_bg = x_bg;
    record.ep_converged = objective_model_.ep_converged() &&
                          std::all_of(constraint_models_.begin(), constraint_models_.end(),
                                      [](const GpcrModel& m) { return m.ep_converged(); });
    state_.records.push_back(std::move(record));
    state_.iterations = t;
    iteration_ = t;
    pending_suggestion_.reset();
}

Vector BoSession::current_best_guess() {
    if (!state_.records.empty()) {
        return state_.records.back().x_bg;
    }
    update_thresholds();
    refit_models();
    Rng grid_rng = root_.sub("bg_grid", 0);
    const Matrix candidates = candidate_grid(acq_.candidate_grid, config_.dim, grid_rng);
    return best_guess(objective_model_, constraint_pointers(), acq_.delta, candidates);
}

BOState run(const CaseConfig& config, Oracle& oracle, int iterations, const AcquisitionConfig& acq,
            std::uint64_t seed) {
    if (iterations < 1) {
        throw InvalidArgumentError("run needs at least one iteration");
    }
    BoSession session(config, acq, seed);
    for (int t = 1; t <= iterations; ++t) {
        const Vector x = session.suggest();
        CoupledObservation obs;
        try {
            obs = oracle.conduct_experiment(x);
        } catch (const std::exception& e) {
            session.mutable_state().error =
                "oracle failure at iteration " + std::to_string(t) + ": " + e.what();
            break;
        }
        session.observe(obs);
        if (config.evaluate_best_guess) {
            IterationRecord& record = session.mutable_state().records.back();
            try {
                const CoupledObservation bg = oracle.conduct_experiment(record.x_bg);
                record.y_bg = bg.objective.value_or(std::numeric_limits<double>::quiet_NaN());
            } catch (const std::exception& e) {
                session.mutable_state().error =
                    "oracle failure evaluating the best guess at iteration " + std::to_string(t) +
                    ": " + e.what();
                break;
            }
        }
    }
    return session.state();
}

}  // namespace gpcrbo
