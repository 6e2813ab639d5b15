#ifndef STORYLOOP_H
#define STORYLOOP_H

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_ARGUMENT = 1,
  SL_STATUS_INVALID_UTF8 = 2,
  SL_STATUS_EMPTY_INPUT = 3,
  SL_STATUS_INVALID_ARGUMENT = 4,
  SL_STATUS_PARSE_ERROR = 5,
  SL_STATUS_INFEASIBLE = 6,
  SL_STATUS_PANIC = 7,
} SlStatus;

/**
 * Parsed packing policy handle.
 */
typedef struct SlPolicy SlPolicy;

/**
 * Stopword list handle.
 */
typedef struct SlStopwords SlStopwords;

typedef struct SlScore {
  double precision;
  double recall;
  double f1;
} SlScore;

typedef struct SlPairScores {
  struct SlScore user;
  struct SlScore rouge_l;
  struct SlScore rouge_w;
  size_t matched_tokens;
} SlPairScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a
 * success. Valid until the next call on the same thread.
 */
const char *sl_last_error(void);

/**
 * The bundled English stopword list.
 */
struct SlStopwords *sl_stopwords_english(void);

/**
 * Parses a stopword list: a `# version: <id>` line, then one word per
 * line.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SlStatus sl_stopwords_parse(const char *text, struct SlStopwords **out);

/**
 * # Safety
 * `list` must come from this library and not be used afterwards.
 */
void sl_stopwords_free(struct SlStopwords *list);

/**
 * USER, ROUGE-L and ROUGE-W for one generated/published pair.
 *
 * `stopwords` may be null for the English list. `alpha` is the ROUGE-W
 * exponent; `rouge_remove_stopwords` drops stopwords before ROUGE.
 *
 * # Safety
 * String arguments must be NUL-terminated; `stopwords` null or a live
 * handle; `out` writable.
 */
enum SlStatus sl_score_pair(const char *generated,
                            const char *published,
                            const struct SlStopwords *stopwords,
                            double alpha,
                            bool rouge_remove_stopwords,
                            struct SlPairScores *out);

/**
 * Copies the longest prefix of `text` holding at most `max_sentences`
 * sentences into a new string.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` writable. Free the result with
 * [`sl_string_free`].
 */
enum SlStatus sl_truncate_sentences(const char *text, size_t max_sentences, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void sl_string_free(char *s);

/**
 * Parses a packing policy document.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` writable.
 */
enum SlStatus sl_policy_parse(const char *text, struct SlPolicy **out);

/**
 * The bundled generation policy.
 */
struct SlPolicy *sl_policy_default(void);

/**
 * Context budget declared by the policy.
 *
 * # Safety
 * `policy` must be a live handle.
 */
uint32_t sl_policy_budget(const struct SlPolicy *policy);

/**
 * # Safety
 * `policy` must come from this library and not be used afterwards.
 */
void sl_policy_free(struct SlPolicy *policy);

/**
 * Allocates `budget` tokens across `count` named segments with the given
 * available lengths. `out_lengths[i]` receives the length for `names[i]`.
 *
 * # Safety
 * `names` and `available` must hold `count` elements, `out_lengths` must
 * have room for `count`.
 */
enum SlStatus sl_policy_solve(const struct SlPolicy *policy,
                              const char *const *names,
                              const uint32_t *available,
                              size_t count,
                              uint32_t budget,
                              uint32_t *out_lengths);

/**
 * Sample Pearson correlation of two series of length `n`.
 *
 * # Safety
 * `a` and `b` must hold `n` values; `out_r` writable.
 */
enum SlStatus sl_pearson(const double *a, const double *b, size_t n, double *out_r);

/**
 * Fleiss' kappa of a row-major `items` × `categories` count table.
 *
 * # Safety
 * `counts` must hold `items * categories` values; `out_kappa` writable.
 */
enum SlStatus sl_fleiss_kappa(const uint64_t *counts,
                              size_t items,
                              size_t categories,
                              double *out_kappa);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STORYLOOP_H */
