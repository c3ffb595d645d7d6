/*
 * netdelay C API.
 *
 * Every object is an opaque handle created by an nd_*_new / nd_*_load /
 * generator call and released with the matching nd_*_free. Every fallible
 * call returns an nd_status; on failure nd_last_error() describes the
 * problem (the message is thread-local and valid until the next failing
 * call on the same thread). Output pointers are only written on ND_OK.
 */
#ifndef NETDELAY_H
#define NETDELAY_H

#include <stddef.h>
#include <stdint.h>

#if defined(NETDELAY_BUILDING_LIBRARY)
#define ND_API __attribute__((visibility("default")))
#else
#define ND_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nd_status {
    ND_OK = 0,
    ND_ERR_INVALID_ARGUMENT = 1,
    ND_ERR_INVALID_SIZE = 2,
    ND_ERR_IO = 3,
    ND_ERR_PARSE = 4,
    ND_ERR_DISCONNECTED = 5,
    ND_ERR_DUPLICATE_LINK = 6,
    ND_ERR_INFEASIBLE_BOTTLENECK = 7,
    ND_ERR_UNSTABLE_QUEUE = 8,
    ND_ERR_DIVERGED = 9,
    ND_ERR_DIMENSION_MISMATCH = 10,
    ND_ERR_TOO_SMALL = 11,
    ND_ERR_CHECK_FAILED = 12,
    ND_ERR_VALIDATION = 13,
    ND_ERR_INTERNAL = 99
} nd_status;

typedef struct nd_config nd_config;
typedef struct nd_topology nd_topology;
typedef struct nd_routing nd_routing;
typedef struct nd_dataset nd_dataset;
typedef struct nd_model nd_model;
typedef struct nd_oracle_report nd_oracle_report;

typedef struct nd_evaluation {
    double raw_mse;        /* tu^2 */
    double nu;             /* subtracted measurement variance, tu^2 */
    double learning_error; /* max(raw_mse - nu, 0) */
    double relative_error; /* sqrt(learning_error) / mean delay */
    double mean_delay;     /* tu */
    size_t samples;
} nd_evaluation;

typedef struct nd_oracle_cell {
    const char* dist; /* static string */
    double rho;
    double simulated;
    double expected;
    double deviation;
    double tolerance;
    uint64_t packets;
    int passed;
} nd_oracle_cell;

ND_API const char* nd_version(void);
ND_API const char* nd_last_error(void);
ND_API const char* nd_status_name(nd_status status);

/* Configuration: INI text with [section] headers; keys are "section.key". */
ND_API nd_status nd_config_new(nd_config** out);
ND_API nd_status nd_config_load(const char* path, nd_config** out);
ND_API nd_status nd_config_set(nd_config* cfg, const char* key, const char* value);
ND_API void nd_config_free(nd_config* cfg);

/* Topologies. */
ND_API nd_status nd_topology_ring(size_t nodes, nd_topology** out);
ND_API nd_status nd_topology_star(size_t nodes, nd_topology** out);
ND_API nd_status nd_topology_scale_free(size_t nodes, size_t attachment, uint64_t seed, nd_topology** out);
ND_API nd_status nd_topology_load(const char* path, nd_topology** out);
/* Builds the topology described by the [topology] section. */
ND_API nd_status nd_topology_from_config(const nd_config* cfg, nd_topology** out);
ND_API nd_status nd_topology_save(const nd_topology* topo, const char* path);
ND_API nd_status nd_topology_node_count(const nd_topology* topo, size_t* out);
ND_API nd_status nd_topology_link_count(const nd_topology* topo, size_t* out);
ND_API nd_status nd_topology_link(const nd_topology* topo, size_t index, uint32_t* src, uint32_t* dst,
                                  double* capacity);
ND_API void nd_topology_free(nd_topology* topo);

/* Routing. Policies: "SP", "MAN", "POOR". */
ND_API nd_status nd_routing_shortest_path(const nd_topology* topo, nd_routing** out);
/* Uses [routing] and [traffic] sections (policy, bottleneck, rho_max). */
ND_API nd_status nd_routing_from_config(const nd_topology* topo, const nd_config* cfg, nd_routing** out);
ND_API nd_status nd_routing_next_hop(const nd_routing* table, uint32_t node, uint32_t dst, uint32_t* out);
ND_API nd_status nd_routing_save(const nd_routing* table, const nd_topology* topo, const char* path);
/* Offered load per link (bits/tu) for a row-major N*N traffic matrix. */
ND_API nd_status nd_link_loads(const nd_topology* topo, const nd_routing* table, const double* traffic,
                               size_t traffic_len, double* loads_out, size_t loads_len);
ND_API void nd_routing_free(nd_routing* table);

/* Simulation. `dist` names the packet length distribution. Writes the
 * row-major N*N mean delay matrix. */
ND_API nd_status nd_simulate(const nd_topology* topo, const nd_routing* table, const double* traffic,
                             size_t traffic_len, const char* dist, double horizon, uint64_t seed,
                             double* delays_out, size_t delays_len);
ND_API nd_status nd_pk_sojourn(double arrival_rate, double mean_service, double service_variance, double* out);

/* Datasets. Generation reads [topology], [routing], [traffic], [dataset]. */
ND_API nd_status nd_dataset_generate(const nd_config* cfg, uint64_t seed, nd_dataset** out);
ND_API nd_status nd_dataset_load(const char* path, nd_dataset** out);
ND_API nd_status nd_dataset_save(const nd_dataset* ds, const char* path);
ND_API nd_status nd_dataset_sample_count(const nd_dataset* ds, size_t* out);
ND_API nd_status nd_dataset_node_count(const nd_dataset* ds, size_t* out);
ND_API nd_status nd_dataset_sample(const nd_dataset* ds, size_t index, double* traffic_out, double* delay_out,
                                   size_t len);
/* Sizes of the 60/20/20 split produced with `seed`. */
ND_API nd_status nd_dataset_split_sizes(const nd_dataset* ds, uint64_t seed, size_t* train, size_t* validation,
                                        size_t* test);
ND_API void nd_dataset_free(nd_dataset* ds);
/* Measurement variance for the configuration in `cfg`. */
ND_API nd_status nd_variance_estimate(const nd_config* cfg, uint64_t seed, double* nu_out);

/* Models. Training splits `ds` with `seed` and reads [network], [training]. */
ND_API nd_status nd_model_train(const nd_dataset* ds, const nd_config* cfg, uint64_t seed, nd_model** out);
ND_API nd_status nd_model_load(const char* path, nd_model** out);
ND_API nd_status nd_model_save(const nd_model* model, const char* path);
/* CSV: epoch,train_loss,validation_mse. Only for trained (not loaded) models. */
ND_API nd_status nd_model_save_history(const nd_model* model, const char* path);
ND_API nd_status nd_model_best_epoch(const nd_model* model, size_t* out);
ND_API nd_status nd_model_predict(const nd_model* model, const double* traffic, size_t traffic_len,
                                  double* delay_out, size_t delay_len);
/* Evaluates on the test split for `seed` (whole dataset when test_only is 0). */
ND_API nd_status nd_model_evaluate(const nd_model* model, const nd_dataset* ds, uint64_t seed, int test_only,
                                   double nu, nd_evaluation* out);
ND_API void nd_model_free(nd_model* model);

/* Experiments. Kinds: saturation-sweep, topology-size-sweep, routing-compare,
 * neuron-sweep, activation-compare, realistic. Writes <out_dir>/<kind>.csv
 * and <out_dir>/<kind>_timing.csv. */
ND_API nd_status nd_sweep_run(const char* kind, const nd_config* cfg, uint64_t seed, const char* out_dir,
                              size_t* rows_out);

ND_API nd_status nd_oracle_check(double horizon, uint64_t seed, nd_oracle_report** out);
ND_API nd_status nd_oracle_report_cell_count(const nd_oracle_report* report, size_t* out);
ND_API nd_status nd_oracle_report_cell(const nd_oracle_report* report, size_t index, nd_oracle_cell* out);
ND_API int nd_oracle_report_passed(const nd_oracle_report* report);
/* CSV text owned by the report. */
ND_API const char* nd_oracle_report_text(const nd_oracle_report* report);
ND_API void nd_oracle_report_free(nd_oracle_report* report);

#ifdef __cplusplus
}
#endif

#endif /* NETDELAY_H */
