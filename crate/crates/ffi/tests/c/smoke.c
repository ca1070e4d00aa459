#include <stdio.h>
#include "seqc.h"

#define CHECK(call)                                                     \
    do {                                                                \
        SeqcStatus s_ = (call);                                         \
        if (s_ != SEQC_STATUS_OK) {                                     \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,           \
                    seqc_last_error() ? seqc_last_error() : "?");       \
            return 1;                                                   \
        }                                                               \
    } while (0)

int main(void) {
    SeqcBackend *b = NULL;
    SeqcCircuit *c = NULL;
    SeqcCompiled *cc = NULL;
    SeqcMetrics m;
    CHECK(seqc_backend_generate(2, 10, 4.0, &b));
    CHECK(seqc_circuit_bench("ghz", 20, 0, &c));
    CHECK(seqc_compile(c, b, SEQC_PIPELINE_SEQC, 2, 7, &cc));
    CHECK(seqc_verify(c, cc, b));
    CHECK(seqc_compiled_metrics(cc, b, false, &m));
    printf("esp=%.6f inter=%llu\n", m.esp, (unsigned long long)m.inter_chiplet_gates);
    if (seqc_verify(NULL, cc, b) != SEQC_STATUS_NULL_POINTER) return 2;
    seqc_compiled_free(cc);
    seqc_circuit_free(c);
    seqc_backend_free(b);
    return 0;
}
