#pragma once
// Marginal estimation (exact enumeration and loopy belief propagation),
// gradient-ascent training of phi, and label prediction.

#include <array>
#include <cstdint>
#include <vector>

#include "fgrec/graph.hpp"

namespace fgrec {

struct Marginals {
    std::vector<double> p_pos;  // per node; clamped nodes are exactly 0 or 1
    bool converged = false;
    int iterations = 0;
    double max_residual = 0.0;
};

enum class EngineKind { exact, lbp, automatic };

struct LbpOptions {
    int max_iters = 100;
    double damping = 0.5;
    double tol = 1e-6;
};

struct EngineOptions {
    EngineKind kind = EngineKind::automatic;
    LbpOptions lbp;
    int threads = 1;  // per-iteration message updates; results are thread-count invariant
};

// Posterior over Y^U by exhaustive per-component enumeration; throws when a
// component exceeds the exact-inference cap.
Marginals exact_marginals(const FactorGraph& graph, const Params& params);

// Damped synchronous sum-product on the pairwise graph. Exact on trees;
// non-convergence is reported, not thrown.
Marginals lbp_marginals(const FactorGraph& graph, const Params& params,
                        const LbpOptions& opts = {}, int threads = 1);

struct LbpEvaluation {
    double log_z = 0.0;  // Bethe approximation
    SufficientStats expected;
    Marginals marginals;
};

// One LBP run (clamped or free distribution) with the Bethe log-partition
// and expected sufficient statistics under the estimated beliefs.
LbpEvaluation lbp_inference(const FactorGraph& graph, const Params& params, bool clamped,
                            const LbpOptions& opts = {}, int threads = 1);

struct Evaluation {
    double omega = 0.0;
    std::array<double, 4> grad{};
};

// Omega and its gradient under the selected engine (automatic picks exact
// when every component fits the enumeration cap).
Evaluation evaluate_objective(const FactorGraph& graph, const Params& params,
                              const EngineOptions& opts = {});

// Posterior marginals under the selected engine.
Marginals posterior_marginals(const FactorGraph& graph, const Params& params,
                              const EngineOptions& opts = {});

struct TrainOptions {
    EngineOptions engine;
    int max_iters = 200;
    double tol = 1e-6;
    double mu = 0.01;  // L2 weight on phi
    Params init{0.5, 0.5, 0.5, 0.5};
};

struct TraceEntry {
    int iter = 0;
    double objective = 0.0;  // regularized: Omega - mu * |phi|^2
    double grad_norm = 0.0;
    double step = 0.0;
    Params phi;
};

struct TrainResult {
    Params params;
    std::vector<TraceEntry> trace;
    bool converged = false;
};

// Gradient ascent on Omega - mu*|phi|^2 with backtracking line search
// (initial step 1.0, halved until the objective improves). Accepted steps
// never decrease the recorded objective.
TrainResult train(const FactorGraph& graph, const TrainOptions& opts = {});

// +1 / -1 / 0 (abstain). p_pos > 0.5 + band predicts +1, p_pos <= 0.5 - band
// predicts -1, anything else abstains; with band = 0 a tie at exactly 0.5
// predicts -1.
std::int8_t predict_label(double p_pos, double band);

std::vector<std::int8_t> predict(const FactorGraph& graph, const Params& params, double band,
                                 const EngineOptions& opts = {});

}  // namespace fgrec
