#ifndef HOLODYN_H
#define HOLODYN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Opaque handle to a truncated vector field.
 */
typedef struct HolodynField HolodynField;

/**
 * Opaque handle to a truncated tangent-to-identity map.
 */
typedef struct HolodynMap HolodynMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for this thread; valid until the next library call.
 */
const char *holodyn_last_error(void);

/**
 * Last status code for this thread (see `HolodynStatus`).
 */
int32_t holodyn_last_code(void);

/**
 * Parse a vector field from two component expressions in x, y.
 *
 * # Safety
 * `jx` and `jy` must be NUL-terminated strings or null.
 */
struct HolodynField *holodyn_field_parse(const char *jx, const char *jy, uint32_t trunc);

/**
 * Parse a map from two component expressions in x, y.
 *
 * # Safety
 * `fx` and `fy` must be NUL-terminated strings or null.
 */
struct HolodynMap *holodyn_map_parse(const char *fx, const char *fy, uint32_t trunc);

/**
 * Release a field handle. Null is a no-op.
 *
 * # Safety
 * `p` must be a pointer returned by this library, not yet freed.
 */
void holodyn_field_free(struct HolodynField *p);

/**
 * Release a map handle. Null is a no-op.
 *
 * # Safety
 * `p` must be a pointer returned by this library, not yet freed.
 */
void holodyn_map_free(struct HolodynMap *p);

/**
 * Release a string returned by this library. Null is a no-op.
 *
 * # Safety
 * `p` must be a string returned by this library, not yet freed.
 */
void holodyn_string_free(char *p);

/**
 * Time-`t` flow of a field; `time` is an exact scalar expression
 * (e.g. "1", "1/2", "tau").
 *
 * # Safety
 * `x` must be a live field handle; `time` a NUL-terminated string.
 */
struct HolodynMap *holodyn_exp(const struct HolodynField *x, const char *time);

/**
 * Infinitesimal generator of a tangent-to-identity map.
 *
 * # Safety
 * `f` must be a live map handle.
 */
struct HolodynField *holodyn_log(const struct HolodynMap *f);

/**
 * Bracket of two fields (engine orientation, adapted to left composition).
 *
 * # Safety
 * `a` and `b` must be live field handles.
 */
struct HolodynField *holodyn_bracket(const struct HolodynField *a, const struct HolodynField *b);

/**
 * Group commutator `F G F^{-1} G^{-1}`.
 *
 * # Safety
 * `f` and `g` must be live map handles.
 */
struct HolodynMap *holodyn_commutator(const struct HolodynMap *f, const struct HolodynMap *g);

/**
 * Composition `F` after `G`.
 *
 * # Safety
 * `f` and `g` must be live map handles.
 */
struct HolodynMap *holodyn_compose(const struct HolodynMap *f, const struct HolodynMap *g);

/**
 * Compositional inverse.
 *
 * # Safety
 * `f` must be a live map handle.
 */
struct HolodynMap *holodyn_invert(const struct HolodynMap *f);

/**
 * Serialize a field to JSON (free with `holodyn_string_free`).
 *
 * # Safety
 * `x` must be a live field handle.
 */
char *holodyn_field_to_json(const struct HolodynField *x);

/**
 * Serialize a map to JSON (free with `holodyn_string_free`).
 *
 * # Safety
 * `f` must be a live map handle.
 */
char *holodyn_map_to_json(const struct HolodynMap *f);

/**
 * Rebuild a field from JSON produced by `holodyn_field_to_json`.
 *
 * # Safety
 * `json` must be a NUL-terminated string or null.
 */
struct HolodynField *holodyn_field_from_json(const char *json);

/**
 * Rebuild a map from JSON produced by `holodyn_map_to_json`.
 *
 * # Safety
 * `json` must be a NUL-terminated string or null.
 */
struct HolodynMap *holodyn_map_from_json(const char *json);

/**
 * Holonomy of the foliation defined by components `a`, `b` (expressions in
 * x, y, z) up to degree `trunc`; `convention` is 0 for the return-map sign,
 * 1 for the flow sign. Returns a JSON report `{diffeo, xy_invariant,
 * dicritical}` (free with `holodyn_string_free`).
 *
 * # Safety
 * `a` and `b` must be NUL-terminated strings or null.
 */
char *holodyn_holonomy(const char *a, const char *b, uint32_t trunc, int32_t convention);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOLODYN_H */
