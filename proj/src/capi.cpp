#include "storval/storval.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "dispatch.hpp"
#include "dp_oracle.hpp"
#include "errors.hpp"
#include "formats.hpp"
#include "network.hpp"
#include "scenario.hpp"
#include "valuation.hpp"
#include "verify.hpp"

using namespace storval;

struct storval_network {
    Network net;
    FlowOperators ops;
};

struct storval_tree {
    ScenarioTree tree;
};

struct storval_model {
    Network net;
    FlowOperators ops;
    ScenarioTree tree;
    Config config;
    PriceLattice lattice;
};

struct storval_audit {
    std::vector<AuditRow> rows;
};

namespace {

thread_local std::string g_last_error;

storval_status fail(storval_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

// Maps the exception currently in flight to a status code.
storval_status translate() {
    try {
        throw;
    } catch (const ParseError& e) {
        return fail(STORVAL_ERR_PARSE, e.what());
    } catch (const InvalidInput& e) {
        return fail(STORVAL_ERR_INVALID_ARGUMENT, e.what());
    } catch (const SingularMatrix& e) {
        return fail(STORVAL_ERR_SINGULAR, e.what());
    } catch (const LpFailure& e) {
        return fail(STORVAL_ERR_LP, e.what());
    } catch (const BoundaryPoint& e) {
        return fail(STORVAL_ERR_BOUNDARY, e.what());
    } catch (const BudgetExceeded& e) {
        return fail(STORVAL_ERR_BUDGET, e.what());
    } catch (const StructuralViolation& e) {
        return fail(STORVAL_ERR_STRUCTURE, e.what());
    } catch (const std::bad_alloc&) {
        return fail(STORVAL_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(STORVAL_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(STORVAL_ERR_INTERNAL, "unknown error");
    }
}

template <class F>
storval_status guarded(F&& body) {
    try {
        body();
        return STORVAL_OK;
    } catch (...) {
        return translate();
    }
}

Config to_config(const storval_config* c) {
    Config out;
    if (!c) return out;
    out.tol.balance = c->tol_balance;
    out.tol.flow = c->tol_flow;
    out.tol.probe_delta = c->tol_probe;
    out.tol.price_match = c->tol_price;
    out.tol.verify = c->tol_verify;
    out.node_budget = c->node_budget;
    out.table_budget = c->table_budget;
    out.workers = c->workers ? c->workers : 1;
    return out;
}

void require(bool condition, const char* what) {
    if (!condition) throw InvalidInput(what);
}

Vector view(const double* data, size_t n) {
    return Eigen::Map<const Vector>(data, static_cast<Eigen::Index>(n));
}

void copy_out(const Vector& v, double* out) {
    if (out) std::memcpy(out, v.data(), sizeof(double) * static_cast<size_t>(v.size()));
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

storval_network* make_network(Network net) {
    auto h = std::make_unique<storval_network>();
    h->ops = build_flow_operators(net);
    h->net = std::move(net);
    return h.release();
}

}  // namespace

extern "C" {

void storval_config_default(storval_config* config) {
    if (!config) return;
    const Config d;
    config->tol_balance = d.tol.balance;
    config->tol_flow = d.tol.flow;
    config->tol_probe = d.tol.probe_delta;
    config->tol_price = d.tol.price_match;
    config->tol_verify = d.tol.verify;
    config->node_budget = d.node_budget;
    config->table_budget = d.table_budget;
    config->workers = d.workers;
}

const char* storval_last_error(void) { return g_last_error.c_str(); }

const char* storval_status_name(storval_status status) {
    switch (status) {
        case STORVAL_OK: return "ok";
        case STORVAL_ERR_INVALID_ARGUMENT: return "invalid argument";
        case STORVAL_ERR_PARSE: return "parse error";
        case STORVAL_ERR_IO: return "i/o error";
        case STORVAL_ERR_SINGULAR: return "singular matrix";
        case STORVAL_ERR_LP: return "lp failure";
        case STORVAL_ERR_BOUNDARY: return "boundary point";
        case STORVAL_ERR_BUDGET: return "budget exceeded";
        case STORVAL_ERR_STRUCTURE: return "structural violation";
        case STORVAL_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* storval_version(void) { return "0.3.0"; }

void storval_string_free(char* text) { std::free(text); }

// ---- network

storval_status storval_network_load(const char* path, storval_network** out) {
    if (!path || !out) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    if (!std::ifstream(path)) return fail(STORVAL_ERR_IO, std::string("cannot open '") + path + "'");
    return guarded([&] { *out = make_network(load_network(path)); });
}

storval_status storval_network_parse(const char* text, storval_network** out) {
    if (!text || !out) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *out = make_network(parse_network(text)); });
}

void storval_network_free(storval_network* net) { delete net; }

size_t storval_network_node_count(const storval_network* net) { return net ? net->net.node_count : 0; }

size_t storval_network_line_count(const storval_network* net) { return net ? net->net.lines.size() : 0; }

int storval_network_is_acyclic(const storval_network* net) { return net && is_acyclic(net->net) ? 1 : 0; }

int storval_network_is_homogeneous(const storval_network* net) {
    return net && net->net.homogeneous_costs() ? 1 : 0;
}

storval_status storval_network_costs(const storval_network* net, double* alpha, double* beta) {
    if (!net || !alpha || !beta) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    std::copy(net->net.alpha.begin(), net->net.alpha.end(), alpha);
    std::copy(net->net.beta.begin(), net->net.beta.end(), beta);
    return STORVAL_OK;
}

storval_status storval_network_ptdf(const storval_network* net, double* ptdf) {
    if (!net || !ptdf) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    const Matrix& h = net->ops.ptdf;
    for (Eigen::Index r = 0; r < h.rows(); ++r)
        for (Eigen::Index c = 0; c < h.cols(); ++c) ptdf[r * h.cols() + c] = h(r, c);
    return STORVAL_OK;
}

storval_status storval_network_injection_feasible(const storval_network* net, const double* x, size_t n,
                                                  const storval_config* config, int* feasible) {
    if (!net || !x || !feasible) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        require(n == net->net.node_count, "injection has the wrong dimension");
        *feasible = injection_feasible(net->ops, net->net, view(x, n), to_config(config).tol) ? 1 : 0;
    });
}

storval_status storval_network_to_string(const storval_network* net, char** text) {
    if (!net || !text) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *text = dup_string(format_network(net->net)); });
}

// ---- scenario tree

storval_status storval_tree_load(const char* path, size_t node_budget, storval_tree** out) {
    if (!path || !out) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    if (!std::ifstream(path)) return fail(STORVAL_ERR_IO, std::string("cannot open '") + path + "'");
    return guarded([&] { *out = new storval_tree{load_tree(path, node_budget)}; });
}

storval_status storval_tree_parse(const char* text, size_t node_budget, storval_tree** out) {
    if (!text || !out) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *out = new storval_tree{parse_tree(text, "<tree>", node_budget)}; });
}

storval_status storval_tree_build_iid(const double* points, size_t point_count, size_t dimension,
                                      const double* probs, size_t horizon, size_t node_budget,
                                      storval_tree** out) {
    if (!points || !probs || !out) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::vector<Vector> support;
        for (size_t s = 0; s < point_count; ++s) support.push_back(view(points + s * dimension, dimension));
        *out = new storval_tree{build_iid(support, std::vector<double>(probs, probs + point_count), horizon,
                                          node_budget)};
    });
}

storval_status storval_tree_build_markov(const double* states, size_t state_count, size_t dimension,
                                         const double* transition, const double* initial, size_t horizon,
                                         size_t node_budget, storval_tree** out) {
    if (!states || !transition || !initial || !out) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::vector<Vector> support;
        for (size_t s = 0; s < state_count; ++s) support.push_back(view(states + s * dimension, dimension));
        const auto k = static_cast<Eigen::Index>(state_count);
        const Matrix p = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            transition, k, k);
        *out = new storval_tree{build_markov(support, p, std::vector<double>(initial, initial + state_count),
                                             horizon, node_budget)};
    });
}

void storval_tree_free(storval_tree* tree) { delete tree; }

size_t storval_tree_horizon(const storval_tree* tree) { return tree ? tree->tree.horizon() : 0; }

size_t storval_tree_dimension(const storval_tree* tree) { return tree ? tree->tree.dimension() : 0; }

size_t storval_tree_node_count(const storval_tree* tree) { return tree ? tree->tree.size() : 0; }

storval_status storval_tree_to_string(const storval_tree* tree, char** text) {
    if (!tree || !text) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *text = dup_string(format_tree(tree->tree)); });
}

storval_status storval_tree_save(const storval_tree* tree, const char* path) {
    if (!tree || !path) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    std::ofstream out(path, std::ios::binary);
    if (!out) return fail(STORVAL_ERR_IO, std::string("cannot write '") + path + "'");
    out << format_tree(tree->tree);
    if (!out) return fail(STORVAL_ERR_IO, std::string("write to '") + path + "' failed");
    return STORVAL_OK;
}

// ---- dispatch

storval_status storval_ed_solve(const storval_network* net, const double* xi, size_t n, double* dispatch,
                                double* angles, double* prices, double* flows, double* cost) {
    if (!net || !xi) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        require(n == net->net.node_count, "xi has the wrong dimension");
        const DispatchSolution sol = solve_ed(net->net, net->ops, view(xi, n));
        copy_out(sol.dispatch, dispatch);
        copy_out(sol.angles, angles);
        copy_out(sol.prices, prices);
        copy_out(sol.line_flows, flows);
        if (cost) *cost = sol.cost;
    });
}

storval_status storval_ed_interiority(const storval_network* net, const double* xi, size_t n,
                                      const storval_config* config, int* interior, int* coordinate) {
    if (!net || !xi || !interior) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        require(n == net->net.node_count, "xi has the wrong dimension");
        const Config c = to_config(config);
        const InteriorityProbe p =
            probe_interiority(net->net, net->ops, view(xi, n), c.tol.probe_delta, c.tol.price_match);
        *interior = p.interior ? 1 : 0;
        if (coordinate) *coordinate = p.coordinate;
    });
}

storval_status storval_ed_gradient_check(const storval_network* net, const double* xi, size_t n,
                                         const storval_config* config, double* gaps) {
    if (!net || !xi || !gaps) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        require(n == net->net.node_count, "xi has the wrong dimension");
        const Config c = to_config(config);
        copy_out(gradient_check(net->net, net->ops, view(xi, n), c.tol.probe_delta, c.tol.price_match), gaps);
    });
}

// ---- valuation

storval_status storval_model_create(const storval_network* net, const storval_tree* tree,
                                    const storval_config* config, storval_model** out) {
    if (!net || !tree || !out) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        require(tree->tree.dimension() == net->net.node_count, "tree dimension does not match the network");
        auto m = std::unique_ptr<storval_model>(
            new storval_model{net->net, net->ops, tree->tree, to_config(config), {}});
        m->lattice = build_price_lattice(m->net, m->ops, m->tree, m->config);
        *out = m.release();
    });
}

void storval_model_free(storval_model* model) { delete model; }

size_t storval_model_node_count(const storval_model* model) { return model ? model->net.node_count : 0; }

storval_status storval_model_prices(const storval_model* model, double* prices) {
    if (!model || !prices) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    const size_t m = model->net.node_count;
    for (size_t t = 0; t < model->lattice.prices.size(); ++t) copy_out(model->lattice.prices[t], prices + t * m);
    return STORVAL_OK;
}

storval_status storval_lmv(const storval_model* model, double* lmv_out, double* upper_bound,
                           double* tv_expectation, double* terminal_drift, int* tight) {
    if (!model) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const LmvReport r = lmv(model->lattice, model->tree);
        copy_out(r.lmv, lmv_out);
        copy_out(r.upper_bound, upper_bound);
        copy_out(r.tv_expectation, tv_expectation);
        copy_out(r.terminal_drift, terminal_drift);
        if (tight)
            for (size_t i = 0; i < r.tight.size(); ++i) tight[i] = r.tight[i] ? 1 : 0;
    });
}

storval_status storval_lmv_dissipative(const storval_model* model, double gamma, double* lmv_out) {
    if (!model || !lmv_out) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { copy_out(lmv_dissipative(model->lattice, model->tree, gamma), lmv_out); });
}

storval_status storval_acyclic_diagnostics(const storval_model* model, int* applicable,
                                           double* transition_value, double* lmv_out, double* upper_bound,
                                           int* coincide) {
    if (!model || !applicable) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const AcyclicDiagnostics d = acyclic_diagnostics(model->net, model->lattice, model->tree,
                                                       model->config.tol.price_match);
        *applicable = d.applicable ? 1 : 0;
        if (!d.applicable) return;
        copy_out(d.transition_value, transition_value);
        copy_out(d.lmv, lmv_out);
        copy_out(d.upper_bound, upper_bound);
        if (coincide)
            for (size_t i = 0; i < d.coincide.size(); ++i) coincide[i] = d.coincide[i] ? 1 : 0;
    });
}

storval_status storval_two_node_limits(const storval_network* net, const storval_tree* tree, double* lmv_f0,
                                       double* lmv_finf) {
    if (!net || !tree || !lmv_f0 || !lmv_finf) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        require(net->net.node_count == 2, "two-node limits need a two-node network");
        require(net->net.homogeneous_costs(), "two-node limits need homogeneous costs");
        require(tree->tree.dimension() == 2, "tree dimension must be 2");
        const TwoNodeLimits l = two_node_limits(net->net.alpha[0], net->net.beta[0], tree->tree);
        copy_out(l.lmv_f0, lmv_f0);
        copy_out(l.lmv_finf, lmv_finf);
    });
}

// ---- DP oracle

storval_status storval_epsilon_bar(const storval_model* model, double* eps_bar) {
    if (!model || !eps_bar) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        EpsilonBarOptions o;
        o.initial_step = model->config.tol.probe_delta;
        o.price_tol = model->config.tol.price_match;
        o.workers = model->config.workers;
        *eps_bar = epsilon_bar(model->net, model->ops, model->tree, o).value;
    });
}

storval_status storval_dp_single_device(const storval_model* model, size_t bus, double eps,
                                        double* value_without, double* value_with) {
    if (!model) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const SingleDeviceTable t = solve_dp_single_device(model->net, model->ops, model->tree, bus, eps,
                                                           std::nullopt, model->config.workers);
        if (value_without) *value_without = t.value_without_storage;
        if (value_with) *value_with = t.value_with_storage;
    });
}

storval_status storval_dp_grid(const storval_model* model, const double* capacity, size_t n,
                               size_t grid_points, double* value) {
    if (!model || !capacity || !value) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        require(n == model->net.node_count, "capacity has the wrong dimension");
        *value = solve_dp_grid(model->net, model->ops, model->tree, view(capacity, n), grid_points,
                               model->config.table_budget, model->config.workers)
                     .value;
    });
}

storval_status storval_threshold_revenue(const storval_model* model, size_t bus, double capacity, double gamma,
                                         double* revenue) {
    if (!model || !revenue) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        *revenue = simulate_threshold_arbitrage(model->lattice, model->tree, bus, capacity, gamma);
    });
}

storval_status storval_foresight_revenue(const storval_model* model, size_t bus, double capacity,
                                         double* revenue) {
    if (!model || !revenue) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *revenue = perfect_foresight_revenue(model->lattice, model->tree, bus, capacity); });
}

// ---- verification

storval_status storval_verify(const storval_model* model, storval_audit** out, int* all_ok) {
    if (!model || !out) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        VerifyOptions o;
        o.config = model->config;
        auto a = std::make_unique<storval_audit>();
        a->rows = run_verification(model->net, model->tree, o);
        if (all_ok) *all_ok = all_passed(a->rows) ? 1 : 0;
        *out = a.release();
    });
}

void storval_audit_free(storval_audit* audit) { delete audit; }

size_t storval_audit_row_count(const storval_audit* audit) { return audit ? audit->rows.size() : 0; }

storval_status storval_audit_get_row(const storval_audit* audit, size_t index, storval_audit_row* row) {
    if (!audit || !row) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    if (index >= audit->rows.size()) return fail(STORVAL_ERR_INVALID_ARGUMENT, "audit row index out of range");
    const AuditRow& r = audit->rows[index];
    *row = {r.check.c_str(), r.bus, r.node, r.eps, r.value, r.reference, r.residual, r.tolerance, r.passed ? 1 : 0};
    return STORVAL_OK;
}

storval_status storval_audit_to_csv(const storval_audit* audit, char** text) {
    if (!audit || !text) return fail(STORVAL_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *text = dup_string(audit_csv(audit->rows)); });
}

}  // extern "C"
