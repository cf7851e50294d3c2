/* Build: cc crates/ffi/examples/smoke.c -Icrates/ffi/include -Ltarget/release -lquanta_abm_ffi */
#include <stdio.h>
#include "quanta_abm.h"

int main(void) {
    QabmConfig *cfg = NULL;
    QabmSimulation *sim = NULL;
    if (qabm_config_parse("n_agents = 10\nduration_s = 600\n", &cfg) != QABM_STATUS_OK) {
        fprintf(stderr, "config: %s\n", qabm_last_error());
        return 1;
    }
    if (qabm_simulation_new(cfg, 42, &sim) != QABM_STATUS_OK || qabm_simulation_run(sim) != QABM_STATUS_OK) {
        fprintf(stderr, "sim: %s\n", qabm_last_error());
        return 1;
    }
    double total = 0.0;
    size_t n = 0;
    qabm_simulation_quanta(sim, &total, NULL, NULL);
    qabm_simulation_agent_count(sim, &n);
    printf("quanta-abm %s: %zu agents, %.1f mq airborne\n", qabm_version(), n, total);
    for (size_t i = 1; i < n; i++) {
        QabmAgentRecord r;
        qabm_simulation_agent(sim, i, &r);
        printf("  agent %u class %u dose %.3f mq%s\n", r.agent_id, r.weight_class, r.dose_mq,
               r.in_cough_zone ? " (cough zone)" : "");
    }
    qabm_simulation_free(sim);
    qabm_config_free(cfg);
    return 0;
}
