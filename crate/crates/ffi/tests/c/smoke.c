#include <stdio.h>
#include <string.h>

#include "pfilter.h"

#define CHECK(expr)                                                   \
  do {                                                                \
    PfStatus s_ = (expr);                                             \
    if (s_ != PF_STATUS_OK) {                                         \
      fprintf(stderr, "%s: %s\n", #expr, pf_status_message(s_));      \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  PfFilter *f = NULL;
  CHECK(pf_cuckoo_new(10, 4, 16, 500, 7, &f));
  char key[32];
  for (int i = 0; i < 1000; i++) {
    snprintf(key, sizeof key, "key-%d", i);
    CHECK(pf_insert(f, (const uint8_t *)key, strlen(key)));
  }

  uint8_t *buf = NULL;
  size_t len = 0;
  CHECK(pf_serialize(f, &buf, &len));
  PfFilter *g = NULL;
  CHECK(pf_deserialize(buf, len, &g));
  pf_buffer_free(buf, len);

  for (int i = 0; i < 1000; i++) {
    bool hit = false;
    snprintf(key, sizeof key, "key-%d", i);
    CHECK(pf_contains(g, (const uint8_t *)key, strlen(key), &hit));
    if (!hit) {
      fprintf(stderr, "missing %s\n", key);
      return 1;
    }
  }

  bool found = false;
  CHECK(pf_remove(g, (const uint8_t *)"key-0", 5, &found));
  uint64_t n = 0;
  CHECK(pf_len(g, &n));
  if (!found || n != 999) {
    fprintf(stderr, "remove failed\n");
    return 1;
  }
  if (pf_bloom_new(0, 5, 1, &g) != PF_STATUS_INVALID_PARAMETER) {
    return 1;
  }

  uint32_t h = 0;
  CHECK(pf_optimal_hash_count(1.0 / 1024.0, &h));
  printf("ok h=%u\n", h);
  pf_filter_free(f);
  pf_filter_free(g);
  return 0;
}
