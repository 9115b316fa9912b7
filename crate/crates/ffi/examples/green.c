/* Build: cc green.c -I../include ../../../target/release/libtwistqft_ffi.a -lm -lpthread -ldl */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "twistqft.h"

static int check(TqStatus s) {
    if (s != TQ_STATUS_OK) {
        char msg[256];
        tq_last_error_message(msg, sizeof msg);
        fprintf(stderr, "twistqft error %d: %s\n", (int)s, msg);
        exit((int)s);
    }
    return 0;
}

int main(void) {
    size_t n[3] = {8, 4, 1};
    double len[3] = {6.0, 4.0, 1.0};
    size_t nt = 256;
    TqGrid *grid = NULL;
    check(tq_grid_new(1.0, 3.0, nt, n, len, &grid));

    size_t total = tq_grid_samples(grid);
    double *samples = calloc(total, sizeof *samples);
    double ds = log(3.0) / (double)(nt - 1);
    for (size_t i = 0; i < total; i++) {
        double s = (double)(i / 32) * ds, u = (s - 0.5) / 0.3;
        double x = -3.0 + 0.75 * (double)(i % 8);
        samples[i] = fabs(u) < 1.0 ? exp(-1.0 / (1.0 - u * u)) * exp(-x * x) : 0.0;
    }

    TqField *src = NULL, *ret = NULL, *back = NULL;
    check(tq_field_from_position(grid, samples, total, &src));
    check(tq_field_green(src, 0.25, true, &ret));
    check(tq_field_wave(ret, 0.25, &back));
    double err = 0.0;
    check(tq_field_relative_distance(back, src, &err));
    printf("twistqft %s: |P G f - f| / |f| = %.3e\n", tq_version(), err);

    tq_field_free(back);
    tq_field_free(ret);
    tq_field_free(src);
    tq_grid_free(grid);
    free(samples);
    return err < 1e-5 ? 0 : 1;
}
