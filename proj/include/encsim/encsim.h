#ifndef ENCSIM_ENCSIM_H
#define ENCSIM_ENCSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returning int returns one of these; details of the last
   failure on the calling thread are available from encsim_last_error(). */
enum {
  ENCSIM_OK = 0,
  ENCSIM_E_ADDRESS_OVERFLOW = 1,
  ENCSIM_E_OVERLAP = 2,
  ENCSIM_E_LAYOUT = 3,
  ENCSIM_E_NO_READ = 4,
  ENCSIM_E_STUCK = 5,
  ENCSIM_E_UNCLASSIFIABLE = 6,
  ENCSIM_E_MALFORMED_TRACE = 7,
  ENCSIM_E_UNROLL_TOO_LARGE = 8,
  ENCSIM_E_ANCHOR_COLLISION = 9,
  ENCSIM_E_BUDGET = 10,
  ENCSIM_E_UNKNOWN_MNEMONIC = 11,
  ENCSIM_E_ODD_ADDRESS = 12,
  ENCSIM_E_LABEL = 13,
  ENCSIM_E_SECTION_OVERFLOW = 14,
  ENCSIM_E_PARSE = 15,
  ENCSIM_E_IO = 16,
  ENCSIM_E_INVALID_ARGUMENT = 100,
  ENCSIM_E_INTERNAL = 101
};

enum { ENCSIM_POLICY_SH = 0, ENCSIM_POLICY_SL = 1, ENCSIM_POLICY_NAIVE = 2, ENCSIM_POLICY_CONSTLAT = 3 };

enum { ENCSIM_RUN_TERMINATED = 0, ENCSIM_RUN_OUT_OF_FUEL = 1, ENCSIM_RUN_STUCK = 2 };

enum {
  ENCSIM_FA_EQUIVALENT = 0, /* no distinguisher within the budget */
  ENCSIM_FA_CONFIRMED = 1,  /* distinguished, and every backtranslation replayed under SH */
  ENCSIM_FA_COUNTEREXAMPLE = 2,
  ENCSIM_FA_LOW_ONLY = 3    /* distinguished under the low policy only */
};

typedef struct encsim_program encsim_program;
typedef struct encsim_device encsim_device;
typedef struct encsim_machine encsim_machine;

const char* encsim_last_error(void);
const char* encsim_status_name(int status);
int encsim_policy_from_name(const char* name, int* policy);

/* Strings and buffers handed out by the library. */
void encsim_string_free(char* s);
void encsim_buffer_free(uint8_t* b);

/* Assembler. Symbols are optional (n = 0). */
int encsim_program_assemble(const char* text, const char* const* names, const uint16_t* values, size_t n,
                            encsim_program** out);
int encsim_program_assemble_file(const char* path, const char* const* names, const uint16_t* values, size_t n,
                                 encsim_program** out);
void encsim_program_free(encsim_program* p);
/* ts, te, ds, de, isr. */
int encsim_program_layout(const encsim_program* p, uint16_t out[5]);
int encsim_program_label(const encsim_program* p, const char* name, uint16_t* addr);
/* Whole 64 KiB image. */
int encsim_program_image(const encsim_program* p, uint8_t out[65536]);
int encsim_program_disassemble(const encsim_program* p, uint16_t from, uint32_t to, char** text);

/* Devices. */
int encsim_device_parse(const char* script, encsim_device** out);
int encsim_device_timer(const uint64_t* int_times, size_t n, encsim_device** out);
void encsim_device_free(encsim_device* d);

/* Machines. */
int encsim_machine_new(const encsim_program* p, const encsim_device* d, int policy, encsim_machine** out);
void encsim_machine_free(encsim_machine* m);
int encsim_machine_step(encsim_machine* m);
int encsim_machine_run(encsim_machine* m, uint64_t fuel, int* outcome, uint64_t* steps);
int encsim_machine_registers(const encsim_machine* m, uint16_t out[16]);
int encsim_machine_time(const encsim_machine* m, uint64_t* t);
int encsim_machine_halted(const encsim_machine* m, int* halted);
int encsim_machine_read_word(const encsim_machine* m, uint16_t addr, uint16_t* w);
int encsim_machine_checkpoint(const encsim_machine* m, uint8_t** buf, size_t* len);
int encsim_machine_restore(encsim_machine* m, const uint8_t* buf, size_t len);
/* Runs up to fuel steps and returns the fine observables, one per line. */
int encsim_machine_trace(encsim_machine* m, uint64_t fuel, char** text);

/* Scenario files. all_ok receives 1 when every expectation held. */
int encsim_scenarios_run(const char* const* paths, size_t n, int csv, char** report, int* all_ok);
int encsim_scenario_trace_csv(const char* path, char** csv);

/* Searches for contexts telling the protected parts of a and b apart. */
int encsim_fa_check(const encsim_program* a, const encsim_program* b, int low_policy, size_t budget, uint64_t fuel,
                    int csv, char** report, int* outcome);

#ifdef __cplusplus
}
#endif

#endif
