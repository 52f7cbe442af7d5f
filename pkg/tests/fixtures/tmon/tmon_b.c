#include "sensors.h"
#include "warnings.h"

int timer;

void tmon_init(void){
  tmon_sens_create();

}

static int update_sat(char cond, int timer, int min, int max) {
  int res = timer;
  if (cond) {res += 1;} else {res -= 1;}
  if (res > max) res = max;
  if (res < min) res = min;
  return res;
}

static void tmon_step(void){
  int sens = tmon_sens_read();
  timer = update_sat(
    sens, timer, 0, 10
  );
  if (timer == 10) {
    // activate warning
    tmon_warn_write(1);
  } else if (timer == 0) {
    // deactivate warning
    xmon_warn_write(0);
  }
}

int get_tmon_timer(void) {
  return timer;
}
