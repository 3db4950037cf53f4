#ifndef POLYSEP_H
#define POLYSEP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PolysepStatus {
  POLYSEP_STATUS_OK = 0,
  POLYSEP_STATUS_NULL_POINTER = 1,
  POLYSEP_STATUS_INVALID_UTF8 = 2,
  POLYSEP_STATUS_PARSE = 3,
  POLYSEP_STATUS_INVALID_PARAMETER = 4,
  POLYSEP_STATUS_SIZE_LIMIT = 5,
  POLYSEP_STATUS_DEGENERATE = 6,
  POLYSEP_STATUS_VALIDATION = 7,
  POLYSEP_STATUS_NUMERIC = 8,
  POLYSEP_STATUS_PROMISE_VIOLATED = 9,
  POLYSEP_STATUS_INTERNAL = 10,
} PolysepStatus;

typedef enum PolysepSeparatorAlgorithm {
  /*
   Exhaustive minimum order; small graphs only.
   */
  POLYSEP_SEPARATOR_ALGORITHM_ORACLE = 0,
  /*
   BFS level sweep.
   */
  POLYSEP_SEPARATOR_ALGORITHM_SWEEP = 1,
  /*
   Region growing with `l = 2`, `h = 8`; a sweep when it finds a minor.
   */
  POLYSEP_SEPARATOR_ALGORITHM_REGION_GROWING = 2,
} PolysepSeparatorAlgorithm;

/*
 Opaque graph handle.
 */
typedef struct PolysepGraph PolysepGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null. Owned by the
 library; valid until the next call.
 */
const char *polysep_last_error(void);

/*
 Parses a graph in edge-list text (`n m` header, then one edge per line).

 # Safety
 `text` must be a nul-terminated string and `out` valid for writing.
 */
enum PolysepStatus polysep_graph_from_text(const char *text, struct PolysepGraph **out);

/*
 Graph with `n` vertices and the `m` edges `(edges[2i], edges[2i+1])`.

 # Safety
 `edges` must point to `2 * m` values (or be null when `m == 0`) and `out`
 must be valid for writing.
 */
enum PolysepStatus polysep_graph_from_edges(size_t n,
                                            const size_t *edges,
                                            size_t m,
                                            struct PolysepGraph **out);

/*
 # Safety
 `g` must come from this library and not be freed twice. Null is ignored.
 */
void polysep_graph_free(struct PolysepGraph *g);

/*
 Vertex count, or 0 for null.

 # Safety
 `g` must be null or a live handle.
 */
size_t polysep_graph_vertex_count(const struct PolysepGraph *g);

/*
 Edge count, or 0 for null.

 # Safety
 `g` must be null or a live handle.
 */
size_t polysep_graph_edge_count(const struct PolysepGraph *g);

/*
 Balanced separator as JSON `{"a":[..],"b":[..],"order":k,"balanced":true}`.

 # Safety
 `g` must be a live handle and `out` valid for writing. The string is freed
 with [`polysep_string_free`].
 */
enum PolysepStatus polysep_separator(const struct PolysepGraph *g,
                                     enum PolysepSeparatorAlgorithm algorithm,
                                     char **out);

/*
 Region growing with explicit parameters. The JSON has `"outcome"` set to
 `"separator"` (with `separator` and `budget`) or `"minor"` (with `model`).

 # Safety
 `g` must be a live handle and `out` valid for writing.
 */
enum PolysepStatus polysep_region_growing(const struct PolysepGraph *g,
                                          size_t l,
                                          size_t h,
                                          double budget_const,
                                          char **out);

/*
 Exact treewidth. `out_json` may be null; otherwise it receives the
 decomposition as `{"bags":..,"tree":..,"width":w}`.

 # Safety
 `g` must be a live handle, `width` valid for writing, and `out_json` null
 or valid for writing.
 */
enum PolysepStatus polysep_exact_treewidth(const struct PolysepGraph *g,
                                           size_t *width,
                                           char **out_json);

/*
 Greedy lower bound on `nabla_r` as the exact fraction `edges / vertices`.

 # Safety
 `g` must be a live handle; `edges` and `vertices` valid for writing.
 */
enum PolysepStatus polysep_nabla_greedy(const struct PolysepGraph *g,
                                        size_t r,
                                        uint64_t seed,
                                        size_t *edges,
                                        size_t *vertices);

/*
 Root of `a^delta = 4c ln^2(e a)` to absolute residual `tol`.

 # Safety
 `out` must be valid for writing.
 */
enum PolysepStatus polysep_solve_a(double delta, double c, double tol, double *out);

/*
 Bound table row for `(c, delta, r)` as JSON, with magnitudes in log form.

 # Safety
 `out` must be valid for writing.
 */
enum PolysepStatus polysep_bound_row(double c, double delta, uint64_t r, char **out);

/*
 # Safety
 `s` must be null or a string returned by this library, freed once.
 */
void polysep_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYSEP_H */
