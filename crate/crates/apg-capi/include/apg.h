/* C interface for the algebraic plumbing graph library. */

#ifndef APG_H
#define APG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Identifies the ABI described by the committed header. Bump on any
 * breaking change to the exported functions or types.
 */
#define APG_ABI_VERSION 1

/**
 * Outcome of a call through the C ABI.
 */
typedef enum {
  /**
   * The call succeeded and all out parameters are populated.
   */
  APG_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  APG_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  APG_STATUS_INVALID_UTF8 = 2,
  /**
   * The input text is not a well-formed graph description.
   */
  APG_STATUS_PARSE = 3,
  /**
   * The arguments were readable but the operation is not defined for
   * them, for example a cyclic graph where a forest is required.
   */
  APG_STATUS_DOMAIN = 4,
  /**
   * The library caught an internal panic; the handle arguments are
   * still valid but the out parameters are untouched.
   */
  APG_STATUS_PANIC = 5,
} ApgStatus;

/**
 * Opaque handle to a parsed graph.
 */
typedef struct ApgGraph ApgGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the ABI version of this library build. Compare against the
 * `APG_ABI_VERSION` constant in the header you compiled against.
 */
uint32_t apg_abi_version(void);

/**
 * Returns the message for the most recent non-`Ok` status on this thread.
 *
 * The pointer stays valid until the next failing call on the same thread;
 * copy the string if you need to keep it. Never returns NULL.
 */
const char *apg_last_error_message(void);

/**
 * Parses a graph from its text form and writes a new handle to `out`.
 *
 * The text uses one declaration per line: `u ID [alpha=A] [kplus=P]
 * [kminus=M]`, `v ID`, `e UID VID`, and optionally `k N` to suggest a
 * degree for later invariant calls.
 *
 * # Safety
 *
 * `text` must be NULL or point to a NUL-terminated string. `out` must be
 * NULL or valid for writing a pointer. NULL arguments are reported as
 * `NullArgument`, never dereferenced.
 */
ApgStatus apg_graph_parse(const char *text, ApgGraph **out);

/**
 * Writes an independent copy of `graph` to `out`.
 *
 * # Safety
 *
 * `graph` must be NULL or a live handle from this library. `out` must be
 * NULL or valid for writing a pointer.
 */
ApgStatus apg_graph_clone(const ApgGraph *graph, ApgGraph **out);

/**
 * Releases a handle returned by this library. NULL is ignored.
 *
 * # Safety
 *
 * `graph` must be NULL or a handle from this library that has not been
 * freed yet; it must not be used after this call.
 */
void apg_graph_free(ApgGraph *graph);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 *
 * `text` must be NULL or a string returned by this library that has not
 * been freed yet; it must not be used after this call.
 */
void apg_string_free(char *text);

/**
 * Writes the canonical text form of `graph` to `out`.
 *
 * # Safety
 *
 * `graph` must be NULL or a live handle from this library. `out` must be
 * NULL or valid for writing a pointer.
 */
ApgStatus apg_graph_serialize(const ApgGraph *graph, char **out);

/**
 * Writes a Graphviz rendering of `graph` to `out`.
 *
 * # Safety
 *
 * `graph` must be NULL or a live handle from this library. `out` must be
 * NULL or valid for writing a pointer.
 */
ApgStatus apg_graph_export_dot(const ApgGraph *graph, char **out);

/**
 * Writes the rank of the lattice determined by `graph` to `out`.
 *
 * # Safety
 *
 * `graph` must be NULL or a live handle from this library. `out` must be
 * NULL or valid for writing a `uint64_t`.
 */
ApgStatus apg_graph_rank(const ApgGraph *graph, uint64_t *out);

/**
 * Rewrites `graph` to its normal form and writes a new handle to `out`.
 *
 * Fails with `Domain` if the graph is not a forest.
 *
 * # Safety
 *
 * `graph` must be NULL or a live handle from this library. `out` must be
 * NULL or valid for writing a pointer.
 */
ApgStatus apg_graph_reduce(const ApgGraph *graph, ApgGraph **out);

/**
 * Writes the canonical encoding of the normal form of `graph` to `out`.
 *
 * Two graphs share this string exactly when the rewriting moves connect
 * them, so it is a ready-made hash key for equivalence classes.
 *
 * # Safety
 *
 * `graph` must be NULL or a live handle from this library. `out` must be
 * NULL or valid for writing a pointer.
 */
ApgStatus apg_graph_canonical_encoding(const ApgGraph *graph, char **out);

/**
 * Writes the full invariant system of `graph` at degree `k` as JSON.
 *
 * Pass `k = 0` to use the advisory degree from the input, defaulting to 1.
 *
 * # Safety
 *
 * `graph` must be NULL or a live handle from this library. `out` must be
 * NULL or valid for writing a pointer.
 */
ApgStatus apg_graph_invariants_json(const ApgGraph *graph, uint32_t k, char **out);

/**
 * Writes the Betti numbers and Euler characteristic of the manifold
 * associated to `graph` at degree `k` as JSON. Pass `k = 0` for the
 * advisory degree.
 *
 * # Safety
 *
 * `graph` must be NULL or a live handle from this library. `out` must be
 * NULL or valid for writing a pointer.
 */
ApgStatus apg_graph_betti_json(const ApgGraph *graph, uint32_t k, char **out);

/**
 * Writes the mod-48 realizability verdict for `graph` as JSON. Only
 * degree 1 supports this check; pass `k = 0` for the advisory degree.
 *
 * # Safety
 *
 * `graph` must be NULL or a live handle from this library. `out` must be
 * NULL or valid for writing a pointer.
 */
ApgStatus apg_graph_admissible_json(const ApgGraph *graph, uint32_t k, char **out);

/**
 * Writes the sphere-bundle exclusion report for `graph` at degree `k`
 * as JSON. Pass `k = 0` for the advisory degree.
 *
 * # Safety
 *
 * `graph` must be NULL or a live handle from this library. `out` must be
 * NULL or valid for writing a pointer.
 */
ApgStatus apg_graph_obstructions_json(const ApgGraph *graph, uint32_t k, char **out);

/**
 * Decides whether two graphs have isomorphic invariant systems and
 * writes the verdict as JSON.
 *
 * With `k = 0` each graph supplies its own advisory degree; those must
 * agree. The verdict is one of `equivalent` with a witness,
 * `inequivalent` with a certificate, or `unknown` with a description of
 * the exhausted search.
 *
 * # Safety
 *
 * `left` and `right` must each be NULL or a live handle from this
 * library. `out` must be NULL or valid for writing a pointer.
 */
ApgStatus apg_equivalence_json(const ApgGraph *left, const ApgGraph *right, uint32_t k, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APG_H */
