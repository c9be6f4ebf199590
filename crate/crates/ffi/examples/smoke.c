/* Build after `cargo build -p thzmix-ffi`:
 *   cc crates/ffi/examples/smoke.c -Icrates/ffi/include -Ltarget/debug -lthzmix_ffi -o smoke
 *   LD_LIBRARY_PATH=target/debug ./smoke
 */
#include <stdio.h>
#include "thzmix.h"

int main(void) {
    ThzScenario *s = NULL;
    if (thz_scenario_from_preset("mg-fig2", &s) != THZ_STATUS_OK) {
        fprintf(stderr, "%s\n", thz_last_error());
        return 1;
    }
    ThzTrajectory *t = NULL;
    if (thz_scenario_run(s, THZ_MODE_REDUCED, &t) != THZ_STATUS_OK) {
        fprintf(stderr, "%s\n", thz_last_error());
        thz_scenario_free(s);
        return 1;
    }
    double best = 0.0, tau = 0.0;
    for (size_t i = 0; i < thz_trajectory_len(t); i++) {
        ThzSample row;
        thz_trajectory_sample(t, i, &row);
        if (row.it_w_cm2 > best) {
            best = row.it_w_cm2;
            tau = row.tau;
        }
    }
    printf("thzmix %s: peak I_T = %.4e W/cm2 at tau = %.4e\n", thz_version(), best, tau);
    thz_trajectory_free(t);
    thz_scenario_free(s);
    return 0;
}
