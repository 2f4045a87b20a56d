#include <math.h>
#include <stdio.h>
#include <string.h>

#include "autotherm.h"

static int fail(const char *what) {
    char msg[256];
    at_last_error(msg, sizeof msg);
    fprintf(stderr, "%s: %s\n", what, msg);
    return 1;
}

int main(void) {
    AtScenario *sc = NULL;
    if (at_scenario_builtin(AT_WERNER_ZX, 0.6, 0.7, false, &sc) != AT_OK) return fail("builtin");

    AtCheck checks[16];
    size_t count = 0;
    bool ok = false;
    if (at_verify(sc, 1.0, 4, checks, 16, &count, &ok) != AT_OK || !ok) return fail("verify");

    AtLedger l;
    if (at_ledger(sc, 0.8, &l) != AT_OK) return fail("ledger");
    if (fabs(l.first_law_residual) > 1e-10) return fail("first law");

    AtQtsl q;
    if (at_qtsl(sc, 1.0, 0.8, 0.0, &q) != AT_OK || !(q.t_star > 0.0)) return fail("qtsl");

    double rho[8];
    size_t d = 0;
    if (at_reduced_state(sc, 0.8, "system", rho, 8, &d) != AT_OK || d != 2) return fail("state");
    if (fabs(rho[0] + rho[6] - 1.0) > 1e-12) return fail("trace");

    at_scenario_free(sc);

    if (at_scenario_from_toml("[layout]\n", &sc) != AT_INVALID_INPUT) return fail("bad toml accepted");
    printf("ok %s %zu\n", at_version(), count);
    return 0;
}
