/* Drives the reaching environment through the C API with a fixed policy:
 * turn the base toward +y while pitching the shoulder up. */
#include <stdio.h>

#include "apf_ddpg.h"

int main(void) {
    ApfEnv *env = NULL;
    if (apf_env_new(NULL, &env) != APF_STATUS_OK) {
        fprintf(stderr, "env: %s\n", apf_last_error());
        return 1;
    }
    double state[6];
    apf_env_reset(env, state);

    const double action[3] = {0.2, -0.2, 0.0};
    double reward = 0.0, total = 0.0;
    ApfTerminal terminal = APF_TERMINAL_NONE;
    int steps = 0;
    while (terminal == APF_TERMINAL_NONE) {
        if (apf_env_step(env, action, state, &reward, &terminal) != APF_STATUS_OK) {
            fprintf(stderr, "step: %s\n", apf_last_error());
            apf_env_free(env);
            return 1;
        }
        total += reward;
        steps++;
    }
    int cell[3];
    apf_map_state(state, 0.1, cell);
    printf("steps=%d terminal=%d reward=%.1f cell=(%d,%d,%d)\n", steps, (int)terminal, total, cell[0],
           cell[1], cell[2]);
    apf_env_free(env);
    return 0;
}
