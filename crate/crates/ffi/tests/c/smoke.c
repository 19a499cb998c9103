#include <math.h>
#include <stdio.h>
#include "anhosc.h"

int main(void) {
    AnhoscModel *m = NULL;
    if (anhosc_model_new(0.0, 0.5, 1.0, 1.0, 0.5, &m) != ANHOSC_STATUS_OK) return 10;
    AnhoscPropagator r;
    if (anhosc_propagate(m, &r) != ANHOSC_STATUS_OK) return 11;
    double expect = exp(r.harmonic_exponent) * r.harmonic_prefactor;
    if (fabs(r.value - expect) > 1e-12 * expect) return 12;

    AnhoscModel *bad = NULL;
    if (anhosc_model_new(0.0, 0.5, -1.0, 1.0, 0.5, &bad) != ANHOSC_STATUS_INVALID_ARGUMENT) return 13;
    if (bad != NULL) return 14;
    char buf[256];
    if (anhosc_last_error_message(buf, sizeof buf) == 0) return 15;

    anhosc_model_free(m);
    printf("%.17g\n", r.value);
    return 0;
}
