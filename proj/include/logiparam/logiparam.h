#ifndef LOGIPARAM_H
#define LOGIPARAM_H

/* C interface to the logic-parametric verification engine.
 *
 * Every fallible call returns an lgp_status and records a human-readable message
 * retrievable through lgp_last_error on the engine it was given. Strings returned
 * through char** parameters are heap copies owned by the caller; release them with
 * lgp_string_free. Strings returned as const char* stay owned by the object they
 * came from and remain valid until that object is freed.
 *
 * An engine and the objects created through it are not synchronized; share nothing
 * across threads, or give each thread its own engine. lgp_evaluate parallelizes
 * internally according to the "jobs" option.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lgp_status {
  LGP_OK = 0,
  LGP_PARSE_ERROR = 1,
  LGP_INVALID_ARGUMENT = 2,
  LGP_IO_ERROR = 3,
  LGP_INTERNAL_ERROR = 4,
} lgp_status;

typedef struct lgp_engine lgp_engine;
typedef struct lgp_verdict lgp_verdict;
typedef struct lgp_case_result lgp_case_result;
typedef struct lgp_report lgp_report;

const char* lgp_version(void);

lgp_engine* lgp_engine_new(void);
void lgp_engine_free(lgp_engine* engine);

/* Message from the most recent failing call on this engine; empty, never null. */
const char* lgp_last_error(const lgp_engine* engine);

/* Engine configuration, all values passed as text.
 *   max-worlds-kd, max-worlds-ddle, max-worlds-cj   world bounds per logic family
 *   check-budget-ms                                 budget for one logical check
 *   case-budget-ms                                  budget for one full case
 *   refinements                                     refinement rounds per case
 *   deterministic-timing                            on/off: charge solver work, not wall time
 *   jobs                                            parallel workers for lgp_evaluate
 *   seed                                            recorded in run bookkeeping
 *   gap-index                                       theory formula the gap mock withholds
 *   prompt-dir, llm-url, llm-key, llm-model         remote formalizer settings
 *   max-in-flight, retries, backoff-ms              remote transport settings
 */
lgp_status lgp_set_option(lgp_engine* engine, const char* name, const char* value);

/* Parses one formula against the logic ("fol", "kd", "ddle", "ddl-cj"). On success and
 * when pretty_out is non-null, stores the canonical rendering there. */
lgp_status lgp_check_formula(lgp_engine* engine, const char* logic, const char* source,
                             char** pretty_out);

/* theory_text holds one formula per line; '#' starts a comment, blank lines are skipped. */
lgp_status lgp_consistency(lgp_engine* engine, const char* logic, const char* theory_text,
                           lgp_verdict** verdict_out);
lgp_status lgp_entailment(lgp_engine* engine, const char* logic, const char* theory_text,
                          const char* goal_source, lgp_verdict** verdict_out);

const char* lgp_verdict_name(const lgp_verdict* verdict);
const char* lgp_verdict_detail(const lgp_verdict* verdict);
/* 1 for Entailed, EntailedUpToBound and Consistent; 0 otherwise. */
int lgp_verdict_is_positive(const lgp_verdict* verdict);
int lgp_verdict_has_model(const lgp_verdict* verdict);
/* Model dump; empty when there is none. */
const char* lgp_verdict_model(const lgp_verdict* verdict);
int lgp_verdict_worlds(const lgp_verdict* verdict);
void lgp_verdict_free(lgp_verdict* verdict);

/* Runs one case from the problem file through the formalize / check / refine loop.
 * formalizer is one of "gold-mock", "gap-injecting-mock", "remote-llm". case_id may be
 * null when the file holds exactly one case. */
lgp_status lgp_verify_case(lgp_engine* engine, const char* problem_path, const char* logic,
                           const char* formalizer, const char* case_id,
                           lgp_case_result** result_out);

const char* lgp_case_status_name(const lgp_case_result* result);
int lgp_case_iterations(const lgp_case_result* result);
int64_t lgp_case_solving_ms(const lgp_case_result* result);
/* Parse error category of the final attempt; empty unless the status is SyntacticError. */
const char* lgp_case_error_category(const lgp_case_result* result);
/* Full iteration-by-iteration trace, ready to print. */
const char* lgp_case_trace(const lgp_case_result* result);
void lgp_case_result_free(lgp_case_result* result);

/* Runs the whole (case, logic, formalizer) grid over a dataset file or directory.
 * logics_csv and formalizers_csv are comma-separated name lists. */
lgp_status lgp_evaluate(lgp_engine* engine, const char* dataset_path,
                        const char* logics_csv, const char* formalizers_csv,
                        lgp_report** report_out);

/* format is "csv", "json", "markdown" (or "md"). */
lgp_status lgp_report_render(lgp_engine* engine, const lgp_report* report,
                             const char* format, char** text_out);
/* One line per case, in grid order. */
lgp_status lgp_report_case_log(lgp_engine* engine, const lgp_report* report,
                               char** text_out);
int lgp_report_case_count(const lgp_report* report);
/* Trace of one grid entry. id_out receives "<case>__<logic>__<formalizer>", a slug that
 * is unique within the report; either output may be null when not wanted. */
lgp_status lgp_report_case_trace(lgp_engine* engine, const lgp_report* report, int index,
                                 char** id_out, char** text_out);
void lgp_report_free(lgp_report* report);

void lgp_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* LOGIPARAM_H */
