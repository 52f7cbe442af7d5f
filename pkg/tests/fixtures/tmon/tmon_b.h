void tmon_init(void);
static int tmon_step(void);
int get_tmon_timer(void);
