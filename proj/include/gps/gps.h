/* Copyright 2026 The GPS Scanner Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the GPS scanner library. Every function returns a
 * gps_status; on failure gps_last_error() describes the problem for the
 * calling thread. Handles are opaque and released with their _free function.
 * Strings returned through char** are released with gps_string_free().
 */

#ifndef GPS_GPS_H
#define GPS_GPS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef GPS_BUILDING_LIBRARY
#    define GPS_API __declspec(dllexport)
#  else
#    define GPS_API __declspec(dllimport)
#  endif
#else
#  define GPS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gps_status {
  GPS_OK = 0,
  GPS_ERR_IO = 1,
  GPS_ERR_PARSE = 2,
  GPS_ERR_INVALID_ARGUMENT = 3,
  GPS_ERR_CAPACITY = 4,
  GPS_ERR_REJECTED = 5,
  GPS_ERR_UNAVAILABLE = 6,
  GPS_ERR_UNDEFINED_METRIC = 7,
  GPS_ERR_INTERNAL = 8
} gps_status;

typedef struct gps_corpus gps_corpus;
typedef struct gps_model gps_model;
typedef struct gps_config gps_config;

typedef enum gps_condition_class {
  GPS_PORT_ONLY = 0,
  GPS_PORT_APP = 1,
  GPS_PORT_NET = 2,
  GPS_PORT_APP_NET = 3
} gps_condition_class;

/* Feature kinds and values use the names of the corpus format, e.g.
 * app_kind "ssh_banner", net_kind "subnet16" with value "10.1.0.0/16" or
 * net_kind "asn" with value "64512". Unused members may be NULL. */
typedef struct gps_condition {
  gps_condition_class cls;
  uint16_t port;
  const char* app_kind;
  const char* app_value;
  const char* net_kind;
  const char* net_value;
} gps_condition;

GPS_API const char* gps_version(void);
GPS_API const char* gps_last_error(void);
GPS_API const char* gps_status_name(gps_status status);
GPS_API void gps_string_free(char* s);

/* corpus */
GPS_API gps_status gps_corpus_load(const char* path, const char* universe, gps_corpus** out);
GPS_API gps_status gps_corpus_generate(const char* spec_path, gps_corpus** out);
GPS_API gps_status gps_corpus_filter(const gps_corpus* corpus, size_t max_services_per_host,
                                     int keep_representative, gps_corpus** out);
GPS_API gps_status gps_corpus_write(const gps_corpus* corpus, const char* path);
GPS_API size_t gps_corpus_service_count(const gps_corpus* corpus);
GPS_API size_t gps_corpus_host_count(const gps_corpus* corpus);
GPS_API void gps_corpus_free(gps_corpus* corpus);

/* config: a JSON file plus dotted-key overrides */
GPS_API gps_status gps_config_load(const char* path, gps_config** out);
GPS_API gps_status gps_config_new(gps_config** out);
GPS_API gps_status gps_config_set(gps_config* config, const char* key, const char* value);
GPS_API void gps_config_free(gps_config* config);

/* model; asn_path may be NULL */
GPS_API gps_status gps_model_build(const gps_corpus* seed, const char* net_kinds_csv,
                                   const char* asn_path, uint32_t min_support, unsigned partitions,
                                   gps_model** out);
GPS_API gps_status gps_model_probability(const gps_model* model, const gps_condition* condition,
                                         uint16_t target_port, double* out);
GPS_API gps_status gps_model_write(const gps_model* model, const char* path);
GPS_API gps_status gps_model_read(const char* path, const char* asn_path, gps_model** out);
GPS_API size_t gps_model_entry_count(const gps_model* model);
GPS_API void gps_model_free(gps_model* model);

/* pipeline */
GPS_API gps_status gps_generate(const char* spec_path, const char* out_path, const char* asn_out_path);
GPS_API gps_status gps_run(const gps_config* config, const char* out_dir);
GPS_API gps_status gps_eval(const gps_config* config, const char* run_dir, int* curve_matches);
GPS_API gps_status gps_sweep(const gps_config* config, const char* out_dir, size_t* failed_cells);
GPS_API gps_status gps_report(const char* run_dir, char** out);
GPS_API gps_status gps_rank_net_features(const gps_config* config, char** out);

#ifdef __cplusplus
}
#endif

#endif /* GPS_GPS_H */
