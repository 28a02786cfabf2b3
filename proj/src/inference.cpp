#include "fgrec/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fgrec/kernels.hpp"
#include "fgrec/parallel.hpp"

namespace fgrec {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp2(double a, double b) {
    double m = std::max(a, b);
    if (m == kNegInf) return kNegInf;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// State index 0 is y = -1, state 1 is y = +1.
inline int label_of(std::size_t state) { return state == 0 ? -1 : 1; }

struct BeliefState {
    // Node beliefs b[2*i + state] and per-edge joint beliefs
    // q[4*e + 2*state_a + state_b].
    std::vector<double> node;
    std::vector<double> edge;
    Marginals marginals;
};

// Node log-potentials: theta_data keeps the model value; theta_infer adds
// the clamp device (-inf on the disallowed state) in clamped mode.
struct Potentials {
    std::vector<double> data;   // 2 per node
    std::vector<double> infer;  // 2 per node
};

Potentials make_potentials(const FactorGraph& graph, const Params& params, bool clamped) {
    Potentials p;
    const std::size_t n = graph.size();
    p.data.resize(2 * n);
    p.infer.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const BehaviorNode& node = graph.nodes()[i];
        for (std::size_t s = 0; s < 2; ++s) {
            double v = node_log_potential(node, label_of(s), params);
            p.data[2 * i + s] = v;
            bool blocked = clamped && node.label != 0 && label_of(s) != node.label;
            p.infer[2 * i + s] = blocked ? kNegInf : v;
        }
    }
    return p;
}

BeliefState run_lbp(const FactorGraph& graph, const Params& params, bool clamped,
                    const LbpOptions& opts, int threads, const Potentials& pot) {
    const std::size_t n = graph.size();
    const std::size_t m = graph.edges().size();
    BeliefState bs;
    bs.node.assign(2 * n, 0.0);
    bs.edge.assign(4 * m, 0.0);
    bs.marginals.p_pos.assign(n, 0.0);

    bool any_free = false;
    for (const auto& node : graph.nodes()) {
        if (!clamped || node.label == 0) {
            any_free = true;
            break;
        }
    }

    const double penalty = -4.0 * params.lambda;  // edge log-potential on disagreement
    std::vector<double> msg(4 * m, -std::log(2.0));
    std::vector<double> next(4 * m, 0.0);
    std::vector<double> sum_in(2 * n, 0.0);

    auto refresh_sum_in = [&]() {
        parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t v = begin; v < end; ++v) {
                double s0 = 0.0, s1 = 0.0;
                for (auto ei : graph.incident_edges(static_cast<std::uint32_t>(v))) {
                    // Direction 2*ei runs a->b, 2*ei+1 runs b->a.
                    std::size_t dir = graph.edges()[ei].node_b == v ? 2 * ei : 2 * ei + 1;
                    s0 += msg[2 * dir + 0];
                    s1 += msg[2 * dir + 1];
                }
                sum_in[2 * v + 0] = s0;
                sum_in[2 * v + 1] = s1;
            }
        });
    };

    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
    if (m == 0 || !any_free) {
        converged = true;
        iterations = 1;
    } else {
        for (iterations = 1; iterations <= opts.max_iters; ++iterations) {
            refresh_sum_in();
            parallel_for(2 * m, threads, [&](std::size_t begin, std::size_t end) {
                for (std::size_t dir = begin; dir < end; ++dir) {
                    const std::size_t ei = dir / 2;
                    const Edge& e = graph.edges()[ei];
                    const std::size_t src = dir % 2 == 0 ? e.node_a : e.node_b;
                    const std::size_t rev = dir % 2 == 0 ? 2 * ei + 1 : 2 * ei;
                    // Source-side log-mass without the reverse message.
                    const double q0 = pot.infer[2 * src + 0] + sum_in[2 * src + 0] - msg[2 * rev + 0];
                    const double q1 = pot.infer[2 * src + 1] + sum_in[2 * src + 1] - msg[2 * rev + 1];
                    double out0 = logsumexp2(q0, q1 + penalty);
                    double out1 = logsumexp2(q0 + penalty, q1);
                    const double norm = logsumexp2(out0, out1);
                    out0 -= norm;
                    out1 -= norm;
                    double d0 = opts.damping * msg[2 * dir + 0] + (1.0 - opts.damping) * out0;
                    double d1 = opts.damping * msg[2 * dir + 1] + (1.0 - opts.damping) * out1;
                    const double dn = logsumexp2(d0, d1);
                    next[2 * dir + 0] = d0 - dn;
                    next[2 * dir + 1] = d1 - dn;
                }
            });
            residual = kernels::max_abs_diff(next, msg);
            msg.swap(next);
            if (residual < opts.tol) {
                converged = true;
                break;
            }
        }
        if (iterations > opts.max_iters) iterations = opts.max_iters;
    }

    refresh_sum_in();

    // Node beliefs.
    for (std::size_t v = 0; v < n; ++v) {
        double b0 = pot.infer[2 * v + 0] + sum_in[2 * v + 0];
        double b1 = pot.infer[2 * v + 1] + sum_in[2 * v + 1];
        const double norm = logsumexp2(b0, b1);
        bs.node[2 * v + 0] = std::exp(b0 - norm);
        bs.node[2 * v + 1] = std::exp(b1 - norm);
        bs.marginals.p_pos[v] = bs.node[2 * v + 1];
    }
    if (clamped) {
        for (std::size_t v = 0; v < n; ++v) {
            if (graph.nodes()[v].label != 0) {
                const double p = graph.nodes()[v].label > 0 ? 1.0 : 0.0;
                bs.marginals.p_pos[v] = p;
                bs.node[2 * v + 0] = 1.0 - p;
                bs.node[2 * v + 1] = p;
            }
        }
    }

    // Edge beliefs.
    for (std::size_t ei = 0; ei < m; ++ei) {
        const Edge& e = graph.edges()[ei];
        const std::size_t a = e.node_a, b = e.node_b;
        double q[4];
        for (std::size_t sa = 0; sa < 2; ++sa) {
            const double qa = pot.infer[2 * a + sa] + sum_in[2 * a + sa] - msg[2 * (2 * ei + 1) + sa];
            for (std::size_t sb = 0; sb < 2; ++sb) {
                const double qb =
                    pot.infer[2 * b + sb] + sum_in[2 * b + sb] - msg[2 * (2 * ei) + sb];
                q[2 * sa + sb] = qa + qb + (sa == sb ? 0.0 : penalty);
            }
        }
        double norm = kNegInf;
        for (double x : q) norm = logsumexp2(norm, x);
        for (std::size_t s = 0; s < 4; ++s) {
            bs.edge[4 * ei + s] = std::exp(q[s] - norm);
        }
    }

    bs.marginals.converged = converged;
    bs.marginals.iterations = iterations;
    bs.marginals.max_residual = residual;
    return bs;
}

}  // namespace

Marginals exact_marginals(const FactorGraph& graph, const Params& params) {
    ExactResult res = exact_inference(graph, params, true);
    Marginals out;
    out.p_pos = std::move(res.p_pos);
    out.converged = true;
    out.iterations = 1;
    out.max_residual = 0.0;
    return out;
}

Marginals lbp_marginals(const FactorGraph& graph, const Params& params, const LbpOptions& opts,
                        int threads) {
    Potentials pot = make_potentials(graph, params, true);
    return run_lbp(graph, params, true, opts, threads, pot).marginals;
}

LbpEvaluation lbp_inference(const FactorGraph& graph, const Params& params, bool clamped,
                            const LbpOptions& opts, int threads) {
    Potentials pot = make_potentials(graph, params, clamped);
    BeliefState bs = run_lbp(graph, params, clamped, opts, threads, pot);

    LbpEvaluation ev;
    const std::size_t n = graph.size();
    const std::size_t m = graph.edges().size();

    // Bethe free energy: energy under the beliefs plus the Bethe entropy.
    double energy = 0.0;
    double entropy = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
        const double deg = static_cast<double>(graph.incident_edges(static_cast<std::uint32_t>(v)).size());
        for (std::size_t s = 0; s < 2; ++s) {
            const double b = bs.node[2 * v + s];
            if (b <= 0.0) continue;
            energy += b * pot.data[2 * v + s];
            entropy += (deg - 1.0) * b * std::log(b);
        }
    }
    const double penalty = -4.0 * params.lambda;
    for (std::size_t ei = 0; ei < m; ++ei) {
        for (std::size_t s = 0; s < 4; ++s) {
            const double b = bs.edge[4 * ei + s];
            if (b <= 0.0) continue;
            const bool disagree = (s == 1 || s == 2);
            energy += b * (disagree ? penalty : 0.0);
            entropy -= b * std::log(b);
        }
    }
    ev.log_z = energy + entropy;

    // Expected sufficient statistics under the beliefs.
    for (std::size_t v = 0; v < n; ++v) {
        const NodeDistances& d = graph.nodes()[v].distances;
        const double e_neg_y = bs.node[2 * v + 0] - bs.node[2 * v + 1];  // E[-y]
        ev.expected.s_f += e_neg_y * d.d_u;
        ev.expected.s_g += e_neg_y * d.d_tp;
        ev.expected.s_h += e_neg_y * d.d_kw;
    }
    for (std::size_t ei = 0; ei < m; ++ei) {
        ev.expected.s_edge += -4.0 * (bs.edge[4 * ei + 1] + bs.edge[4 * ei + 2]);
    }

    ev.marginals = std::move(bs.marginals);
    return ev;
}

namespace {

bool use_exact(const FactorGraph& graph, const EngineOptions& opts) {
    switch (opts.kind) {
        case EngineKind::exact: return true;
        case EngineKind::lbp: return false;
        case EngineKind::automatic: return graph.max_component_size() <= kMaxExactFreeVars;
    }
    return true;
}

}  // namespace

Evaluation evaluate_objective(const FactorGraph& graph, const Params& params,
                              const EngineOptions& opts) {
    Evaluation ev;
    if (use_exact(graph, opts)) {
        ExactResult clamped = exact_inference(graph, params, true);
        ExactResult free = exact_inference(graph, params, false);
        ev.omega = clamped.log_z - free.log_z;
        auto c = clamped.expected.as_array();
        auto f = free.expected.as_array();
        for (int i = 0; i < 4; ++i) ev.grad[i] = c[i] - f[i];
    } else {
        LbpEvaluation clamped = lbp_inference(graph, params, true, opts.lbp, opts.threads);
        LbpEvaluation free = lbp_inference(graph, params, false, opts.lbp, opts.threads);
        ev.omega = clamped.log_z - free.log_z;
        auto c = clamped.expected.as_array();
        auto f = free.expected.as_array();
        for (int i = 0; i < 4; ++i) ev.grad[i] = c[i] - f[i];
    }
    return ev;
}

Marginals posterior_marginals(const FactorGraph& graph, const Params& params,
                              const EngineOptions& opts) {
    if (use_exact(graph, opts)) return exact_marginals(graph, params);
    return lbp_marginals(graph, params, opts.lbp, opts.threads);
}

TrainResult train(const FactorGraph& graph, const TrainOptions& opts) {
    if (graph.clamped_count() == 0) {
        throw std::invalid_argument("train: graph has no clamped (known-label) node");
    }

    auto regularized = [&](const Params& p, double omega) {
        const auto a = p.as_array();
        return omega - opts.mu * (a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]);
    };

    TrainResult result;
    Params phi = opts.init;
    Evaluation ev = evaluate_objective(graph, phi, opts.engine);
    double obj = regularized(phi, ev.omega);

    auto ascent_direction = [&](const Params& p, const std::array<double, 4>& grad_omega) {
        std::array<double, 4> g = grad_omega;
        const auto a = p.as_array();
        for (int i = 0; i < 4; ++i) g[i] -= 2.0 * opts.mu * a[i];
        return g;
    };

    std::array<double, 4> g = ascent_direction(phi, ev.grad);
    double gnorm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
    result.trace.push_back({0, obj, gnorm, 0.0, phi});

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        // Backtracking line search from step 1.0.
        double step = 1.0;
        Params accepted = phi;
        Evaluation accepted_ev = ev;
        double accepted_obj = obj;
        bool improved = false;
        while (step > 1e-12) {
            auto a = phi.as_array();
            Params trial = Params::from_array(
                {a[0] + step * g[0], a[1] + step * g[1], a[2] + step * g[2], a[3] + step * g[3]});
            Evaluation trial_ev = evaluate_objective(graph, trial, opts.engine);
            double trial_obj = regularized(trial, trial_ev.omega);
            if (trial_obj > accepted_obj) {
                accepted = trial;
                accepted_ev = trial_ev;
                accepted_obj = trial_obj;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            result.converged = true;
            break;
        }

        const double delta = accepted_obj - obj;
        phi = accepted;
        ev = accepted_ev;
        obj = accepted_obj;
        g = ascent_direction(phi, ev.grad);
        gnorm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
        result.trace.push_back({iter, obj, gnorm, step, phi});
        if (delta < opts.tol) {
            result.converged = true;
            break;
        }
    }

    result.params = phi;
    return result;
}

std::int8_t predict_label(double p_pos, double band) {
    if (p_pos > 0.5 + band) return 1;
    if (p_pos <= 0.5 - band) return -1;
    return 0;
}

std::vector<std::int8_t> predict(const FactorGraph& graph, const Params& params, double band,
                                 const EngineOptions& opts) {
    Marginals m = posterior_marginals(graph, params, opts);
    std::vector<std::int8_t> out(m.p_pos.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = predict_label(m.p_pos[i], band);
    return out;
}

}  // namespace fgrec
