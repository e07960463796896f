# Printed slope/intercept arrangements y = m (x - c) and the tables they induce.

import math

from kobon.published import TAN_FORM, TAN_FORM_TRIANGLES, tan_form
from kobon.straighten import geometric_triangles, induced_table, lineset_to_tan, tan_form_fit, tan_to_lineset
from kobon.table import canonicalize, count_triangles

for name in sorted(TAN_FORM):
    m, c = tan_form(name)
    lines = tan_to_lineset(m, c)
    t = induced_table(lines)
    print(f"{name}: n={t.n} triangles table={len(count_triangles(t))} "
          f"plane={len(geometric_triangles(lines))} printed={TAN_FORM_TRIANGLES[name]}")

# %% keep the intercepts, refit only the slopes
m, c = tan_form("A3")
t = induced_table(tan_to_lineset(m, c))
res = tan_form_fit(t, c)
m2, c2 = lineset_to_tan(res.lines, math.pi / (4 * t.n))
print("refit ok:", res.satisfied)
for a, b in zip(m, m2):
    print(f"  {a:12.5f} -> {b:12.5f}")
print("same class as printed:", canonicalize(induced_table(res.lines)) == canonicalize(t))
