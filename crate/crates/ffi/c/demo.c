#include <math.h>
#include <stdio.h>
#include "schwarzschild_le.h"
int main(void) {
  SleProfile *p = NULL;
  if (sle_profile_new(3, 1.0, 0.05, 0.1, 0.1, NAN, &p) != SLE_STATUS_OK) return 1;
  double f, fp, lf;
  sle_profile_eval(p, 2.0, &f, &fp, &lf);
  SleVerdict v;
  sle_verify_case(p, SLE_CASE_CASE2, 1024, &v);
  printf("f=%g f'=%g l(f)=%g case2 passed=%d margin=%g\n", f, fp, lf, v.passed, v.min_margin);
  sle_profile_free(p);
  return v.passed ? 0 : 1;
}
