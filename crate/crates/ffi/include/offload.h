/* SPDX-License-Identifier: Apache-2.0 */

#ifndef OFFLOAD_H
#define OFFLOAD_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OffloadStatus {
  OFFLOAD_STATUS_OK = 0,
  OFFLOAD_STATUS_INVALID_ARGUMENT = 1,
  OFFLOAD_STATUS_NOT_FOUND = 2,
  OFFLOAD_STATUS_CONFLICT = 3,
  OFFLOAD_STATUS_CORRUPT = 4,
  OFFLOAD_STATUS_LAYOUT_INFEASIBLE = 5,
  OFFLOAD_STATUS_PROTOCOL = 6,
  OFFLOAD_STATUS_FRAGMENT_FAILED = 7,
  OFFLOAD_STATUS_IO = 8,
  OFFLOAD_STATUS_PANIC = 9,
} OffloadStatus;

typedef enum OffloadLayout {
  OFFLOAD_LAYOUT_STRIPED = 0,
  OFFLOAD_LAYOUT_SPLIT = 1,
} OffloadLayout;

typedef enum OffloadMode {
  OFFLOAD_MODE_LOCAL = 0,
  OFFLOAD_MODE_OFFLOAD = 1,
} OffloadMode;

typedef enum OffloadBottleneck {
  OFFLOAD_BOTTLENECK_CLIENT_CPU = 0,
  OFFLOAD_BOTTLENECK_STORAGE_CPU = 1,
  OFFLOAD_BOTTLENECK_NETWORK = 2,
} OffloadBottleneck;

/**
 * A discovered dataset; valid only with the store it was opened from.
 */
typedef struct OffloadDataset OffloadDataset;

/**
 * A namespace and the object pool it lives in.
 */
typedef struct OffloadStore OffloadStore;

typedef struct OffloadTable OffloadTable;

/**
 * Totals for one scan plus the modeled latency under the default cost model.
 */
typedef struct OffloadScanMetrics {
  uint64_t rows_returned;
  uint64_t fragments_total;
  uint64_t fragments_scanned;
  uint64_t bytes_transferred;
  uint64_t bytes_read_storage;
  uint64_t client_cpu_ticks;
  uint64_t client_decode_filter_ticks;
  uint64_t storage_cpu_ticks_total;
  uint64_t storage_decode_filter_ticks;
  double modeled_latency_ticks;
  enum OffloadBottleneck bottleneck;
} OffloadScanMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a
 * success. Valid until the next call into this library on the same thread.
 */
const char *offload_last_error(void);

/**
 * Creates an empty in-memory store with `nodes` storage nodes.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum OffloadStatus offload_store_new(size_t nodes, uint64_t seed, struct OffloadStore **out);

/**
 * Loads a store directory written by [`offload_store_save`] or the CLI.
 * `nodes` of 0 keeps the saved node count.
 *
 * # Safety
 * `dir` is a NUL-terminated path; `out` must be valid for writes.
 */
enum OffloadStatus offload_store_load(const char *dir, size_t nodes, struct OffloadStore **out);

/**
 * # Safety
 * `store` is a live handle; `dir` is a NUL-terminated path.
 */
enum OffloadStatus offload_store_save(const struct OffloadStore *store, const char *dir);

/**
 * # Safety
 * `store` is NULL or a handle not yet freed.
 */
void offload_store_free(struct OffloadStore *store);

/**
 * Generates the synthetic trip table and writes it under `layout` at
 * `path` (a file path when striped, a prefix when split).
 *
 * # Safety
 * `store` is a live handle; `path` is NUL-terminated.
 */
enum OffloadStatus offload_store_generate(const struct OffloadStore *store,
                                          enum OffloadLayout layout,
                                          const char *path,
                                          uint64_t rows,
                                          uint64_t seed,
                                          uint64_t stripe_unit,
                                          uint64_t rows_per_group);

/**
 * Discovers a dataset from its footer or index.
 *
 * # Safety
 * `store` is a live handle; `root` is NUL-terminated; `out` valid for writes.
 */
enum OffloadStatus offload_dataset_open(const struct OffloadStore *store,
                                        enum OffloadLayout layout,
                                        const char *root,
                                        struct OffloadDataset **out);

/**
 * # Safety
 * `dataset` is a live handle.
 */
size_t offload_dataset_row_groups(const struct OffloadDataset *dataset);

/**
 * # Safety
 * `dataset` is a live handle.
 */
uint64_t offload_dataset_total_rows(const struct OffloadDataset *dataset);

/**
 * # Safety
 * `dataset` is NULL or a handle not yet freed.
 */
void offload_dataset_free(struct OffloadDataset *dataset);

/**
 * Scans `dataset` once.
 *
 * `predicate` uses the CLI grammar (NULL or "" selects all rows).
 * `columns` is a comma-separated projection (NULL or "" keeps all).
 * `metrics` may be NULL.
 *
 * # Safety
 * Handles are live and `dataset` came from `store`; strings are
 * NUL-terminated; `out` is valid for writes; `metrics` is NULL or valid
 * for writes.
 */
enum OffloadStatus offload_scan(const struct OffloadStore *store,
                                const struct OffloadDataset *dataset,
                                enum OffloadMode mode,
                                const char *predicate,
                                const char *columns,
                                size_t queue_depth,
                                struct OffloadTable **out,
                                struct OffloadScanMetrics *metrics);

/**
 * # Safety
 * `table` is a live handle.
 */
uint64_t offload_table_row_count(const struct OffloadTable *table);

/**
 * # Safety
 * `table` is a live handle.
 */
size_t offload_table_column_count(const struct OffloadTable *table);

/**
 * Serializes the table as one result batch (ordinal 0). Release the
 * buffer with [`offload_bytes_free`].
 *
 * # Safety
 * `table` is a live handle; `data` and `len` are valid for writes.
 */
enum OffloadStatus offload_table_encode(const struct OffloadTable *table,
                                        uint8_t **data,
                                        size_t *len);

/**
 * # Safety
 * `data`/`len` come from [`offload_table_encode`] and are freed once.
 */
void offload_bytes_free(uint8_t *data, size_t len);

/**
 * # Safety
 * `table` is NULL or a handle not yet freed.
 */
void offload_table_free(struct OffloadTable *table);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OFFLOAD_H */
