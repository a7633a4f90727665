// storval command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "storval/storval.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitInput = 2;

// Raised for a failed library call; carries the CLI exit code.
struct CommandError : std::runtime_error {
    int code;
    CommandError(int c, const std::string& what) : std::runtime_error(what), code(c) {}
};

int exit_code_for(storval_status s) {
    switch (s) {
        case STORVAL_OK: return kExitOk;
        case STORVAL_ERR_INVALID_ARGUMENT:
        case STORVAL_ERR_PARSE:
        case STORVAL_ERR_IO:
        case STORVAL_ERR_SINGULAR:
        case STORVAL_ERR_BUDGET: return kExitInput;
        default: return kExitFailed;
    }
}

void check(storval_status s) {
    if (s != STORVAL_OK)
        throw CommandError(exit_code_for(s), std::string(storval_status_name(s)) + ": " + storval_last_error());
}

struct NetworkDeleter { void operator()(storval_network* p) const { storval_network_free(p); } };
struct TreeDeleter { void operator()(storval_tree* p) const { storval_tree_free(p); } };
struct ModelDeleter { void operator()(storval_model* p) const { storval_model_free(p); } };
struct AuditDeleter { void operator()(storval_audit* p) const { storval_audit_free(p); } };
using NetworkPtr = std::unique_ptr<storval_network, NetworkDeleter>;
using TreePtr = std::unique_ptr<storval_tree, TreeDeleter>;
using ModelPtr = std::unique_ptr<storval_model, ModelDeleter>;
using AuditPtr = std::unique_ptr<storval_audit, AuditDeleter>;

std::string take_string(char* text) {
    std::string out(text);
    storval_string_free(text);
    return out;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size())
            throw CommandError(kExitInput, flag + ": '" + item + "' is not a number");
        out.push_back(v);
    }
    if (out.empty()) throw CommandError(kExitInput, flag + ": empty list");
    return out;
}

// "a,b;c,d" -> rows of equal length.
std::vector<std::vector<double>> parse_rows(const std::string& text, const std::string& flag) {
    std::vector<std::vector<double>> rows;
    std::stringstream in(text);
    for (std::string row; std::getline(in, row, ';');) rows.push_back(parse_list(row, flag));
    if (rows.empty()) throw CommandError(kExitInput, flag + ": empty matrix");
    for (const auto& r : rows)
        if (r.size() != rows.front().size()) throw CommandError(kExitInput, flag + ": ragged rows");
    return rows;
}

struct Options {
    std::string net_path;
    std::string tree_path;
    std::string out_path;
    storval_config config{};
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw CommandError(kExitInput, "cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

NetworkPtr open_network(const Options& o) {
    storval_network* net = nullptr;
    check(storval_network_load(o.net_path.c_str(), &net));
    return NetworkPtr(net);
}

TreePtr open_tree(const Options& o) {
    storval_tree* tree = nullptr;
    check(storval_tree_load(o.tree_path.c_str(), o.config.node_budget, &tree));
    return TreePtr(tree);
}

ModelPtr open_model(const Options& o, const storval_network* net, const storval_tree* tree) {
    storval_model* model = nullptr;
    check(storval_model_create(net, tree, &o.config, &model));
    return ModelPtr(model);
}

int run_ed(const Options& o, const std::string& xi_text) {
    NetworkPtr net = open_network(o);
    const std::size_t m = storval_network_node_count(net.get());
    const std::size_t l = storval_network_line_count(net.get());
    const std::vector<double> xi = parse_list(xi_text, "--xi");
    if (xi.size() != m) throw CommandError(kExitInput, "--xi needs " + std::to_string(m) + " entries");

    std::vector<double> v(m), theta(m), lambda(m), flows(l);
    double cost = 0.0;
    check(storval_ed_solve(net.get(), xi.data(), m, v.data(), theta.data(), lambda.data(), flows.data(), &cost));
    int interior = 0, coordinate = -1;
    check(storval_ed_interiority(net.get(), xi.data(), m, &o.config, &interior, &coordinate));

    Output out(o.out_path);
    std::ostream& s = out.stream();
    s << "quantity,index,value\n";
    for (std::size_t i = 0; i < m; ++i) s << "v," << i + 1 << "," << num(v[i]) << "\n";
    for (std::size_t i = 0; i < m; ++i) s << "theta," << i + 1 << "," << num(theta[i]) << "\n";
    for (std::size_t i = 0; i < m; ++i) s << "lambda," << i + 1 << "," << num(lambda[i]) << "\n";
    for (std::size_t k = 0; k < l; ++k) s << "flow," << k + 1 << "," << num(flows[k]) << "\n";
    s << "Q,0," << num(cost) << "\n";
    s << "interior,0," << interior << "\n";
    if (!interior)
        std::cerr << "warning: xi is within the probe step of a price boundary (coordinate " << coordinate + 1
                  << ")\n";
    return kExitOk;
}

int run_lmv(const Options& o, double gamma, bool with_gamma) {
    NetworkPtr net = open_network(o);
    TreePtr tree = open_tree(o);
    ModelPtr model = open_model(o, net.get(), tree.get());
    const std::size_t m = storval_model_node_count(model.get());
    std::vector<double> lmv(m), ub(m), tv(m), drift(m), diss(m);
    std::vector<int> tight(m);
    check(storval_lmv(model.get(), lmv.data(), ub.data(), tv.data(), drift.data(), tight.data()));
    if (with_gamma) check(storval_lmv_dissipative(model.get(), gamma, diss.data()));

    Output out(o.out_path);
    std::ostream& s = out.stream();
    s << "bus,lmv,upper_bound,tv_expectation,terminal_drift,tight" << (with_gamma ? ",lmv_dissipative" : "")
      << "\n";
    for (std::size_t i = 0; i < m; ++i) {
        s << i + 1 << "," << num(lmv[i]) << "," << num(ub[i]) << "," << num(tv[i]) << "," << num(drift[i]) << ","
          << tight[i];
        if (with_gamma) s << "," << num(diss[i]);
        s << "\n";
    }
    return kExitOk;
}

// Spec "lo:hi:count" for one axis.
std::vector<double> parse_axis(const std::string& text, const std::string& flag) {
    std::vector<double> parts;
    std::stringstream in(text);
    for (std::string item; std::getline(in, item, ':');) parts.push_back(parse_list(item, flag).at(0));
    if (parts.size() != 3 || parts[2] < 1 || parts[2] != static_cast<long>(parts[2]))
        throw CommandError(kExitInput, flag + ": expected lo:hi:count");
    const auto count = static_cast<long>(parts[2]);
    std::vector<double> out;
    for (long k = 0; k < count; ++k)
        out.push_back(count == 1 ? parts[0] : parts[0] + (parts[1] - parts[0]) * k / static_cast<double>(count - 1));
    return out;
}

int run_grid(const Options& o, const std::string& grid_text, const std::string& base_text,
             const std::string& axes_text) {
    NetworkPtr net = open_network(o);
    const std::size_t m = storval_network_node_count(net.get());
    std::vector<double> xi(m, 0.0);
    if (!base_text.empty()) xi = parse_list(base_text, "--xi");
    if (xi.size() != m) throw CommandError(kExitInput, "--xi needs " + std::to_string(m) + " entries");

    std::size_t a0 = 0, a1 = m > 1 ? 1 : 0;
    if (!axes_text.empty()) {
        const std::vector<double> axes = parse_list(axes_text, "--axes");
        if (axes.size() != 2) throw CommandError(kExitInput, "--axes takes two bus numbers");
        a0 = static_cast<std::size_t>(axes[0]) - 1;
        a1 = static_cast<std::size_t>(axes[1]) - 1;
    }
    if (m < 2 || a0 >= m || a1 >= m || a0 == a1)
        throw CommandError(kExitInput, "region maps need two distinct buses");

    const std::size_t split = grid_text.find(',');
    if (split == std::string::npos) throw CommandError(kExitInput, "--grid: expected lo:hi:n,lo:hi:n");
    const std::vector<double> xs = parse_axis(grid_text.substr(0, split), "--grid");
    const std::vector<double> ys = parse_axis(grid_text.substr(split + 1), "--grid");

    Output out(o.out_path);
    std::ostream& s = out.stream();
    s << "xi" << a0 + 1 << ",xi" << a1 + 1 << ",lambda" << a0 + 1 << ",lambda" << a1 + 1 << ",interior\n";
    std::vector<double> lambda(m);
    for (double y : ys)
        for (double x : xs) {
            xi[a0] = x;
            xi[a1] = y;
            check(storval_ed_solve(net.get(), xi.data(), m, nullptr, nullptr, lambda.data(), nullptr, nullptr));
            int interior = 0;
            check(storval_ed_interiority(net.get(), xi.data(), m, &o.config, &interior, nullptr));
            s << num(x) << "," << num(y) << "," << num(lambda[a0]) << "," << num(lambda[a1]) << "," << interior
              << "\n";
        }
    return kExitOk;
}

int run_verify(const Options& o) {
    NetworkPtr net = open_network(o);
    TreePtr tree = open_tree(o);
    ModelPtr model = open_model(o, net.get(), tree.get());
    storval_audit* raw = nullptr;
    int all_ok = 0;
    check(storval_verify(model.get(), &raw, &all_ok));
    AuditPtr audit(raw);

    Output out(o.out_path);
    out.stream() << take_string([&] {
        char* text = nullptr;
        check(storval_audit_to_csv(audit.get(), &text));
        return text;
    }());

    const std::size_t rows = storval_audit_row_count(audit.get());
    std::size_t failed = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        storval_audit_row row;
        check(storval_audit_get_row(audit.get(), r, &row));
        if (!row.passed) {
            ++failed;
            std::cerr << "FAILED " << row.check << " bus=" << row.bus << " node=" << row.node
                      << " residual=" << num(row.residual) << " tol=" << num(row.tolerance) << "\n";
        }
    }
    std::cerr << rows - failed << "/" << rows << " checks passed\n";
    return all_ok ? kExitOk : kExitFailed;
}

int run_dp(const Options& o, const std::string& cap_text, std::size_t samples, long bus, double eps) {
    NetworkPtr net = open_network(o);
    TreePtr tree = open_tree(o);
    ModelPtr model = open_model(o, net.get(), tree.get());
    const std::size_t m = storval_model_node_count(model.get());
    Output out(o.out_path);
    std::ostream& s = out.stream();

    if (bus > 0) {
        if (static_cast<std::size_t>(bus) > m) throw CommandError(kExitInput, "--bus out of range");
        double j0 = 0.0, j1 = 0.0, eps_bar = 0.0;
        std::vector<double> lmv(m);
        check(storval_epsilon_bar(model.get(), &eps_bar));
        check(storval_dp_single_device(model.get(), static_cast<std::size_t>(bus - 1), eps, &j0, &j1));
        check(storval_lmv(model.get(), lmv.data(), nullptr, nullptr, nullptr, nullptr));
        s << "bus,eps,eps_bar,J0,J_eps,decrease,eps_lmv\n";
        s << bus << "," << num(eps) << "," << num(eps_bar) << "," << num(j0) << "," << num(j1) << ","
          << num(j0 - j1) << "," << num(eps * lmv[static_cast<std::size_t>(bus - 1)]) << "\n";
        if (eps >= eps_bar)
            std::cerr << "warning: eps is not below eps_bar, the decrease need not equal eps * lmv\n";
        return kExitOk;
    }

    const std::vector<double> cap = parse_list(cap_text, "--cap");
    if (cap.size() != m) throw CommandError(kExitInput, "--cap needs " + std::to_string(m) + " entries");
    if (samples < 2) throw CommandError(kExitInput, "--grid needs at least 2 samples");
    s << "sample";
    for (std::size_t i = 0; i < m; ++i) s << ",b" << i + 1;
    s << ",J\n";
    // Sample j uses levels {0, b_j/j, ..., b_j}: every coarser grid is nested in
    // the finer one, so the grid values are comparable along the path.
    for (std::size_t j = 0; j < samples; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(samples - 1);
        std::vector<double> b(m);
        for (std::size_t i = 0; i < m; ++i) b[i] = t * cap[i];
        double value = 0.0;
        check(storval_dp_grid(model.get(), b.data(), m, j + 1, &value));
        s << j;
        for (double bi : b) s << "," << num(bi);
        s << "," << num(value) << "\n";
    }
    return kExitOk;
}

int run_limits(const Options& o) {
    NetworkPtr net = open_network(o);
    TreePtr tree = open_tree(o);
    double f0[2] = {0, 0}, finf[2] = {0, 0};
    check(storval_two_node_limits(net.get(), tree.get(), f0, finf));
    Output out(o.out_path);
    std::ostream& s = out.stream();
    s << "bus,lmv_f0,lmv_finf\n";
    for (int i = 0; i < 2; ++i) s << i + 1 << "," << num(f0[i]) << "," << num(finf[i]) << "\n";
    return kExitOk;
}

int run_gen_iid(const Options& o, const std::string& support_text, const std::string& probs_text,
                std::size_t horizon) {
    const auto rows = parse_rows(support_text, "--support");
    const std::vector<double> probs = parse_list(probs_text, "--probs");
    if (probs.size() != rows.size()) throw CommandError(kExitInput, "--probs must match the support size");
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    storval_tree* raw = nullptr;
    check(storval_tree_build_iid(flat.data(), rows.size(), rows.front().size(), probs.data(), horizon,
                                 o.config.node_budget, &raw));
    TreePtr tree(raw);
    char* text = nullptr;
    check(storval_tree_to_string(tree.get(), &text));
    Output out(o.out_path);
    out.stream() << take_string(text);
    return kExitOk;
}

int run_gen_markov(const Options& o, const std::string& states_text, const std::string& transition_text,
                   const std::string& initial_text, std::size_t horizon) {
    const auto states = parse_rows(states_text, "--states");
    const auto transition = parse_rows(transition_text, "--transition");
    const std::vector<double> initial = parse_list(initial_text, "--initial");
    if (transition.size() != states.size() || transition.front().size() != states.size() ||
        initial.size() != states.size())
        throw CommandError(kExitInput, "--transition and --initial must match the number of states");
    std::vector<double> flat_states, flat_p;
    for (const auto& r : states) flat_states.insert(flat_states.end(), r.begin(), r.end());
    for (const auto& r : transition) flat_p.insert(flat_p.end(), r.begin(), r.end());
    storval_tree* raw = nullptr;
    check(storval_tree_build_markov(flat_states.data(), states.size(), states.front().size(), flat_p.data(),
                                    initial.data(), horizon, o.config.node_budget, &raw));
    TreePtr tree(raw);
    char* text = nullptr;
    check(storval_tree_to_string(tree.get(), &text));
    Output out(o.out_path);
    out.stream() << take_string(text);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"storval: locational marginal value of storage on DC networks"};
    app.require_subcommand(1);

    Options o;
    storval_config_default(&o.config);
    app.add_option("--workers", o.config.workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--node-budget", o.config.node_budget, "maximum scenario-tree size")->check(CLI::PositiveNumber);
    app.add_option("--table-budget", o.config.table_budget, "maximum grid DP table size")
        ->check(CLI::PositiveNumber);
    app.add_option("--tol-balance", o.config.tol_balance)->check(CLI::PositiveNumber);
    app.add_option("--tol-flow", o.config.tol_flow)->check(CLI::PositiveNumber);
    app.add_option("--tol-probe", o.config.tol_probe, "axis step for price-constancy probes")
        ->check(CLI::PositiveNumber);
    app.add_option("--tol-price", o.config.tol_price)->check(CLI::PositiveNumber);
    app.add_option("--tol-verify", o.config.tol_verify)->check(CLI::PositiveNumber);

    auto add_net = [&](CLI::App* sub) { sub->add_option("--net", o.net_path, "network file")->required(); };
    auto add_tree = [&](CLI::App* sub) { sub->add_option("--tree", o.tree_path, "scenario tree file")->required(); };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out_path, "output file (default stdout)"); };

    std::string xi_text, grid_text, axes_text, cap_text;
    double gamma = 1.0, eps = 0.0;
    long bus = 0;
    std::size_t samples = 5;

    CLI::App* ed = app.add_subcommand("ed", "single-period dispatch and prices");
    add_net(ed);
    ed->add_option("--xi", xi_text, "net demand, comma separated")->required();
    add_out(ed);

    CLI::App* lmv = app.add_subcommand("lmv", "per-bus valuation report");
    add_net(lmv);
    add_tree(lmv);
    CLI::Option* gamma_opt = lmv->add_option("--gamma", gamma, "also report the dissipative value");
    add_out(lmv);

    CLI::App* grid = app.add_subcommand("grid", "sample prices on a 2-D grid of net demands");
    add_net(grid);
    grid->add_option("--grid", grid_text, "lo:hi:n,lo:hi:n")->required();
    grid->add_option("--xi", xi_text, "base net demand for the other buses");
    grid->add_option("--axes", axes_text, "two bus numbers to vary (default 1,2)");
    add_out(grid);

    CLI::App* verify = app.add_subcommand("verify", "cross-check valuation against the DP oracle");
    add_net(verify);
    add_tree(verify);
    add_out(verify);

    CLI::App* dp = app.add_subcommand("dp", "storage DP: J*(b) along a capacity path, or one device");
    add_net(dp);
    add_tree(dp);
    dp->add_option("--cap", cap_text, "capacity at the end of the path, comma separated");
    dp->add_option("--grid", samples, "number of samples along the path")->check(CLI::PositiveNumber);
    dp->add_option("--bus", bus, "single-device mode: bus number")->check(CLI::PositiveNumber);
    dp->add_option("--eps", eps, "single-device capacity")->check(CLI::NonNegativeNumber);
    add_out(dp);

    CLI::App* limits = app.add_subcommand("limits", "two-node small- and large-capacity limits");
    add_net(limits);
    add_tree(limits);
    add_out(limits);

    std::string support_text, probs_text, states_text, transition_text, initial_text;
    std::size_t horizon = 0;
    CLI::App* gen = app.add_subcommand("gen-tree", "generate a scenario tree");
    gen->require_subcommand(1);
    CLI::App* iid = gen->add_subcommand("iid", "i.i.d. stages");
    iid->add_option("--support", support_text, "points as a,b;c,d")->required();
    iid->add_option("--probs", probs_text, "probabilities, comma separated")->required();
    iid->add_option("--horizon", horizon)->required()->check(CLI::PositiveNumber);
    add_out(iid);
    CLI::App* markov = gen->add_subcommand("markov", "Markov chain on a finite state set");
    markov->add_option("--states", states_text, "states as a,b;c,d")->required();
    markov->add_option("--transition", transition_text, "row-stochastic matrix as p,q;r,s")->required();
    markov->add_option("--initial", initial_text, "initial distribution")->required();
    markov->add_option("--horizon", horizon)->required()->check(CLI::PositiveNumber);
    add_out(markov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*ed) return run_ed(o, xi_text);
        if (*lmv) return run_lmv(o, gamma, gamma_opt->count() > 0);
        if (*grid) return run_grid(o, grid_text, xi_text, axes_text);
        if (*verify) return run_verify(o);
        if (*dp) {
            if (bus == 0 && cap_text.empty()) throw CommandError(kExitInput, "dp needs --cap or --bus/--eps");
            return run_dp(o, cap_text, samples, bus, eps);
        }
        if (*limits) return run_limits(o);
        if (*iid) return run_gen_iid(o, support_text, probs_text, horizon);
        if (*markov) return run_gen_markov(o, states_text, transition_text, initial_text, horizon);
    } catch (const CommandError& e) {
        std::cerr << "storval: " << e.what() << "\n";
        return e.code;
    }
    return kExitInput;
}
