/* Minimal C client: OU gap, a short run, the envelope. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "pmelab.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        PmeStatus s_ = (call);                                             \
        if (s_ != PME_STATUS_OK) {                                         \
            fprintf(stderr, "%s failed (%d): %s\n", #call, (int)s_,        \
                    pme_last_error() ? pme_last_error() : "");             \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    PmeMesh *mesh = NULL;
    CHECK(pme_mesh_new("gaussian", NULL, 0, 6.0, 256, &mesh));
    size_t n = pme_mesh_cells(mesh);

    double lambda = 0.0;
    CHECK(pme_poincare(mesh, &lambda));

    double *x = malloc(n * sizeof *x);
    double *w = malloc(n * sizeof *w);
    double *mu = malloc(n * sizeof *mu);
    CHECK(pme_mesh_geometry(mesh, x, w, n));
    double h = 12.0 / (double)n, mass = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mu[i] = exp(-(x[i] - 1.0) * (x[i] - 1.0) / 0.5);
        mass += h * mu[i] * w[i];
    }
    for (size_t i = 0; i < n; ++i) mu[i] /= mass;

    PmeSolverOptions opts = pme_solver_options_default(1.0);
    double times[] = {0.5, 1.0, 2.0};
    PmeTrajectory *traj = NULL;
    CHECK(pme_run(mesh, &opts, mu, n, 2.0, times, 3, 2.0, &traj));

    PmeDiagnostics first, last;
    size_t len = pme_trajectory_len(traj);
    CHECK(pme_trajectory_diagnostics(traj, 0, &first));
    CHECK(pme_trajectory_diagnostics(traj, len - 1, &last));
    double env = 0.0;
    CHECK(pme_decay_envelope(lambda, 1.0, 2.0, 1.0, first.dp, last.time, -1.0, 0.0, &env));

    if (pme_mesh_new("nope", NULL, 0, 1.0, 8, &mesh) != PME_STATUS_INVALID_ARGUMENT) return 2;
    printf("version %s lambda %.6f snapshots %zu mass %.12f dp %.6f envelope %.6f\n", pme_version(), lambda,
           len, last.mass, last.dp, env);
    int ok = fabs(last.mass - 1.0) < 1e-10 && last.dp <= env + 0.05 && len == 4;

    pme_trajectory_free(traj);
    pme_mesh_free(mesh);
    free(x);
    free(w);
    free(mu);
    return ok ? 0 : 3;
}
