/*
 * storval: locational marginal value of energy storage on DC networks.
 *
 * C interface over opaque handles. Every function that can fail returns a
 * storval_status; on failure storval_last_error() describes the cause (the
 * message is thread-local and valid until the next failing call on the same
 * thread). Output arrays are caller-allocated and sized as documented.
 * Node (bus) indices are 0-based here; files and the CLI use 1-based ids.
 */
#ifndef STORVAL_STORVAL_H
#define STORVAL_STORVAL_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(STORVAL_BUILDING)
#    define STORVAL_API __declspec(dllexport)
#  else
#    define STORVAL_API __declspec(dllimport)
#  endif
#else
#  define STORVAL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum storval_status {
    STORVAL_OK = 0,
    STORVAL_ERR_INVALID_ARGUMENT = 1, /* bad pointer, size, or parameter */
    STORVAL_ERR_PARSE = 2,            /* malformed storval-net/1 or storval-tree/1 input */
    STORVAL_ERR_IO = 3,               /* file could not be read or written */
    STORVAL_ERR_SINGULAR = 4,         /* flow operators could not be built */
    STORVAL_ERR_LP = 5,               /* dispatch LP failed */
    STORVAL_ERR_BOUNDARY = 6,         /* support point on a price-region boundary */
    STORVAL_ERR_BUDGET = 7,           /* node or table budget exceeded */
    STORVAL_ERR_STRUCTURE = 8,        /* structural claim violated */
    STORVAL_ERR_INTERNAL = 9
} storval_status;

typedef struct storval_network storval_network;
typedef struct storval_tree storval_tree;
typedef struct storval_model storval_model; /* network + tree + price lattice */
typedef struct storval_audit storval_audit;

typedef struct storval_config {
    double tol_balance;
    double tol_flow;
    double tol_probe;  /* axis step used to probe price constancy */
    double tol_price;  /* two price vectors compare equal within this */
    double tol_verify; /* headline identity, relative to max(1, |J*(0)|) */
    size_t node_budget;
    size_t table_budget;
    unsigned workers;
} storval_config;

STORVAL_API void storval_config_default(storval_config* config);

STORVAL_API const char* storval_last_error(void);
STORVAL_API const char* storval_status_name(storval_status status);
STORVAL_API const char* storval_version(void);

/* Strings returned through char** are owned by the caller. */
STORVAL_API void storval_string_free(char* text);

/* ---- network ---------------------------------------------------------- */

STORVAL_API storval_status storval_network_load(const char* path, storval_network** out);
STORVAL_API storval_status storval_network_parse(const char* text, storval_network** out);
STORVAL_API void storval_network_free(storval_network* net);
STORVAL_API size_t storval_network_node_count(const storval_network* net);
STORVAL_API size_t storval_network_line_count(const storval_network* net);
STORVAL_API int storval_network_is_acyclic(const storval_network* net);
STORVAL_API int storval_network_is_homogeneous(const storval_network* net);
/* alpha, beta: node_count entries each. */
STORVAL_API storval_status storval_network_costs(const storval_network* net, double* alpha, double* beta);
/* ptdf: line_count x node_count, row-major. */
STORVAL_API storval_status storval_network_ptdf(const storval_network* net, double* ptdf);
STORVAL_API storval_status storval_network_injection_feasible(const storval_network* net, const double* x,
                                                              size_t n, const storval_config* config,
                                                              int* feasible);
STORVAL_API storval_status storval_network_to_string(const storval_network* net, char** text);

/* ---- scenario tree ---------------------------------------------------- */

STORVAL_API storval_status storval_tree_load(const char* path, size_t node_budget, storval_tree** out);
STORVAL_API storval_status storval_tree_parse(const char* text, size_t node_budget, storval_tree** out);
/* points: point_count x dimension row-major; probs: point_count. */
STORVAL_API storval_status storval_tree_build_iid(const double* points, size_t point_count, size_t dimension,
                                                  const double* probs, size_t horizon, size_t node_budget,
                                                  storval_tree** out);
/* states: state_count x dimension row-major; transition: state_count x state_count row-major. */
STORVAL_API storval_status storval_tree_build_markov(const double* states, size_t state_count, size_t dimension,
                                                     const double* transition, const double* initial,
                                                     size_t horizon, size_t node_budget, storval_tree** out);
STORVAL_API void storval_tree_free(storval_tree* tree);
STORVAL_API size_t storval_tree_horizon(const storval_tree* tree);
STORVAL_API size_t storval_tree_dimension(const storval_tree* tree);
STORVAL_API size_t storval_tree_node_count(const storval_tree* tree);
STORVAL_API storval_status storval_tree_to_string(const storval_tree* tree, char** text);
STORVAL_API storval_status storval_tree_save(const storval_tree* tree, const char* path);

/* ---- single-period dispatch --------------------------------------------- */

/* dispatch, angles, prices: node_count entries; flows: line_count entries
 * (any output pointer may be NULL). */
STORVAL_API storval_status storval_ed_solve(const storval_network* net, const double* xi, size_t n,
                                            double* dispatch, double* angles, double* prices, double* flows,
                                            double* cost);
/* interior = 1 if the price vector is constant under +-delta axis probes;
 * otherwise *coordinate receives the first failing 0-based coordinate. */
STORVAL_API storval_status storval_ed_interiority(const storval_network* net, const double* xi, size_t n,
                                                  const storval_config* config, int* interior, int* coordinate);
/* gaps: node_count entries |dQ/dxi_i - lambda_i|. */
STORVAL_API storval_status storval_ed_gradient_check(const storval_network* net, const double* xi, size_t n,
                                                     const storval_config* config, double* gaps);

/* ---- valuation -------------------------------------------------------- */

/* Builds the price lattice; fails with STORVAL_ERR_BOUNDARY when a support
 * point is not interior. The model keeps its own copies of net and tree. */
STORVAL_API storval_status storval_model_create(const storval_network* net, const storval_tree* tree,
                                                const storval_config* config, storval_model** out);
STORVAL_API void storval_model_free(storval_model* model);
STORVAL_API size_t storval_model_node_count(const storval_model* model);
/* prices: tree_node_count x node_count row-major, in tree storage order. */
STORVAL_API storval_status storval_model_prices(const storval_model* model, double* prices);

/* Each output: node_count entries (tight: 0/1). Any pointer may be NULL. */
STORVAL_API storval_status storval_lmv(const storval_model* model, double* lmv, double* upper_bound,
                                       double* tv_expectation, double* terminal_drift, int* tight);
STORVAL_API storval_status storval_lmv_dissipative(const storval_model* model, double gamma, double* lmv);

/* applicable = 0 when the network is cyclic or costs are heterogeneous; then
 * the arrays are left untouched. */
STORVAL_API storval_status storval_acyclic_diagnostics(const storval_model* model, int* applicable,
                                                       double* transition_value, double* lmv,
                                                       double* upper_bound, int* coincide);

/* Homogeneous two-node network required; outputs have 2 entries. */
STORVAL_API storval_status storval_two_node_limits(const storval_network* net, const storval_tree* tree,
                                                   double* lmv_f0, double* lmv_finf);

/* ---- DP oracle -------------------------------------------------------- */

STORVAL_API storval_status storval_epsilon_bar(const storval_model* model, double* eps_bar);
STORVAL_API storval_status storval_dp_single_device(const storval_model* model, size_t bus, double eps,
                                                    double* value_without, double* value_with);
/* capacity: node_count entries. */
STORVAL_API storval_status storval_dp_grid(const storval_model* model, const double* capacity, size_t n,
                                           size_t grid_points, double* value);
STORVAL_API storval_status storval_threshold_revenue(const storval_model* model, size_t bus, double capacity,
                                                     double gamma, double* revenue);
STORVAL_API storval_status storval_foresight_revenue(const storval_model* model, size_t bus, double capacity,
                                                     double* revenue);

/* ---- verification audit ------------------------------------------------ */

typedef struct storval_audit_row {
    const char* check; /* owned by the audit */
    int bus;           /* 1-based; 0 for instance-wide checks */
    long node;         /* scenario node id or -1 */
    double eps;
    double value;
    double reference;
    double residual;
    double tolerance;
    int passed;
} storval_audit_row;

STORVAL_API storval_status storval_verify(const storval_model* model, storval_audit** out, int* all_passed);
STORVAL_API void storval_audit_free(storval_audit* audit);
STORVAL_API size_t storval_audit_row_count(const storval_audit* audit);
STORVAL_API storval_status storval_audit_get_row(const storval_audit* audit, size_t index, storval_audit_row* row);
/* CSV with header, 17 significant digits. */
STORVAL_API storval_status storval_audit_to_csv(const storval_audit* audit, char** text);

#ifdef __cplusplus
}
#endif

#endif /* STORVAL_STORVAL_H */
