// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ddarec/dc_core.hpp"
#include "ddarec/denoiser.hpp"
#include "ddarec/transforms.hpp"

namespace dda {

/// Complex soft threshold: u max(0, 1 - lambda/|u|). Kills |u| <= lambda,
/// otherwise shrinks the magnitude and keeps the phase.
inline Complex soft_threshold(Complex u, double lambda_eff) {
    const double mag = std::abs(u);
    if (mag <= lambda_eff) return {0.0, 0.0};
    return u * (1.0 - lambda_eff / mag);
}

/// Where the iteration keeps its internal variables and how the prior sees
/// time: doppler3d transforms to the Doppler domain around the prior step,
/// time3d drops the window-axis DFTs, time2d additionally restricts the
/// prior's receptive field to one snapshot (kernel time-extent 1).
enum class TemporalMode { Doppler3d, Time3d, Time2d };

const char* to_string(TemporalMode m);
TemporalMode temporal_mode_from_string(const std::string& s);

enum class PriorKind { Identity, SoftThreshold, ResidualDenoiser };

const char* to_string(PriorKind k);
PriorKind prior_kind_from_string(const std::string& s);

/// Prior step of one unfolded stage (or of classical ADMM). The soft
/// threshold uses lambda/rho, the standard scaled-ADMM correspondence.
struct PriorOperator {
    PriorKind kind = PriorKind::SoftThreshold;
    double lambda = 0.5;
    std::shared_ptr<const DenoiserWeights> weights; // ResidualDenoiser only

    DdaTensor apply(const DdaTensor& u, double rho) const;

    static PriorOperator identity() { return {PriorKind::Identity, 0.0, nullptr}; }
    static PriorOperator soft(double lambda) { return {PriorKind::SoftThreshold, lambda, nullptr}; }
    static PriorOperator denoiser(std::shared_ptr<const DenoiserWeights> w) {
        return {PriorKind::ResidualDenoiser, 0.0, std::move(w)};
    }
};

/// Algorithm variant: temporal parameterization, stage count, delay
/// oversampling, and the stage prior template.
struct VariantConfig {
    TemporalMode temporal_mode = TemporalMode::Doppler3d;
    int n_iter = 8;
    int k_fd = 3;
    PriorOperator prior;

    void validate() const { require(n_iter >= 1, "VariantConfig: n_iter must be >= 1"); }
};

inline constexpr double kMaxGamma = 1.8;

/// ADMM triple plus scalars, as exposed to iterate observers.
struct SolverState {
    DdaTensor x_tilde, z_tilde, beta_tilde;
    double rho = 0.0, gamma = 0.0, lambda = 0.0;
    int iteration = 0;

    void validate(double gamma_bound = kMaxGamma) const;
};

/// Callback fired after each completed iteration/stage.
using StateObserver = std::function<void(const SolverState&)>;

struct IterStat {
    int iteration = 0;
    double objective = 0.0;  // Eq.-(14)-style: data term + lambda * l1(prior-domain tensor)
    double primal_res = 0.0; // ||X - Z||_F / ||X||_F (ADMM) or relative step (FISTA)
    double dual_res = 0.0;   // rho ||Z - Z_prev||_F (ADMM)
};
using SolverTrace = std::vector<IterStat>;

/// Thrown when a solve trips its divergence guard.
struct SolverDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ReconResult {
    ChannelWindow h_hat;
    SolverTrace trace;
    int iterations = 0;
    bool converged = false;
};

/// Per-snapshot minimum-norm linear estimate X_t = f_sa^H Y_t A_t mapped
/// back through the synthesis model. Reproduces the observed pilot columns
/// exactly in the noiseless case.
ChannelWindow ls_estimate(const ObservationWindow& y, const DictionarySet& dict,
                          const PilotSchedule& sched);

struct AdmmOptions {
    double lambda = 0.5;
    double rho = 0.3;
    double gamma = 1.0;
    int max_iter = 160;
    double tol = 1e-5;
    double sigma_floor = 1e-6;
    double divergence_factor = 10.0; // abort when objective exceeds this times its initial value
};

/// Window-level ADMM with an l1 prior: repeat [map auxiliary state to time,
/// closed-form DC, map back, soft threshold, dual ascent] until the primal
/// residual drops under tol. Returns the synthesis of the last DC output.
/// time3d/time2d keep the state in the time domain (no window-axis DFTs).
ReconResult admm_solve(const ObservationWindow& y, const DictionarySet& dict,
                       const PilotSchedule& sched, const AdmmOptions& opts,
                       TemporalMode mode = TemporalMode::Doppler3d,
                       const StateObserver& observer = {});

struct FistaOptions {
    double lambda = 0.5;
    int max_iter = 160;
    double tol = 1e-5;
    double sigma_floor = 1e-6;
    double divergence_factor = 10.0;
};

/// Accelerated proximal gradient on the Doppler-domain l1 objective, step
/// 1/L with the analytic bound L = max_t 1/sigma_t^2, Nesterov momentum
/// with restart handling on objective increase: an increasing proximal
/// candidate is rejected (the previous iterate is kept) while momentum
/// keeps extrapolating through it, so the accepted objective never grows.
ReconResult fista_solve(const ObservationWindow& y, const DictionarySet& dict,
                        const PilotSchedule& sched, const FistaOptions& opts);

struct UnfoldedParams {
    double rho = 0.3;
    double gamma = 1.0;
    double sigma_floor = 1e-6;
    std::vector<PriorOperator> stage_priors;   // one per stage
    std::optional<PriorOperator> init_prior;   // initialization denoiser slot
};

/// Fixed-depth unfolded forward pass: optional [initial DC + initialization
/// denoiser] seeding of the auxiliary state, n_iter ADMM stages with
/// per-stage priors, a final DC layer from the most recent auxiliary and
/// dual states, then synthesis back to the TFS domain.
///
/// Without an init prior the auxiliary and dual states start at zero, so
/// stage 1's DC center is zero and, with constant soft-threshold priors,
/// the stage iterates coincide with admm_solve's iterates exactly.
ChannelWindow unfolded_forward(const ObservationWindow& y, const DictionarySet& dict,
                               const PilotSchedule& sched, const VariantConfig& variant,
                               const UnfoldedParams& params, const StateObserver& observer = {});

enum class SolverId { Ls, Fista, Admm, Unfolded };

const char* to_string(SolverId s);
SolverId solver_id_from_string(const std::string& s);

/// One bundle describing a reconstruction run; the dispatch point used by
/// the evaluation harness and the CLI.
struct SolverSpec {
    SolverId id = SolverId::Admm;
    TemporalMode temporal_mode = TemporalMode::Doppler3d;
    PriorKind prior = PriorKind::SoftThreshold; // unfolded stage prior kind
    int n_iter = 8;                             // unfolded stage count
    double lambda = 0.5;
    double rho = 0.3;
    double gamma = 1.0;
    int max_iter = 160;
    double tol = 1e-5;
    double sigma_floor = 1e-6;
    bool init_prior = false; // unfolded: seed with initial DC + init denoiser
    std::shared_ptr<const DenoiserWeights> weights;

    VariantConfig variant(int k_fd) const;
};

ReconResult reconstruct(const ObservationWindow& y, const DictionarySet& dict,
                        const SolverSpec& spec);

// --- Hyperparameter sweep -------------------------------------------------

struct DevCase {
    ChannelWindow h;
    ObservationWindow y;
};

struct HyperGrid {
    std::vector<double> lambdas;
    std::vector<double> rhos;
    std::vector<double> gammas;
    std::vector<int> iters;

    /// Brackets the tuned classical ranges (lambda 0.5-0.8, rho 0.2-0.5)
    /// extended one decade each side.
    static HyperGrid defaults(SolverId id);
};

struct TunedParams {
    double lambda = 0.0;
    double rho = 0.0;
    double gamma = 1.0;
    int iters = 0;
    double mean_nmse_db = 0.0;
};

/// Exhaustive grid search minimizing mean linear NMSE over the development
/// set; ties break deterministically toward the smallest lambda, then rho,
/// then gamma, then iteration count. Diverging combinations are skipped.
TunedParams tune_hyperparams(const std::vector<DevCase>& dev_set, SolverId id,
                             const HyperGrid& grid, const DictionarySet& dict,
                             TemporalMode mode = TemporalMode::Doppler3d);

} // namespace dda
