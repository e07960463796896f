# Enumerate the optimal 5-line and 9-line arrangements.
#
# Every table the solver returns is blocked together with its relabelings,
# so each printed table stands for one arrangement up to symmetry.

from kobon import sat
from kobon.cnf import SearchConfig, encode
from kobon.table import count_triangles, format_table

# the CNF for n=5: 200 variables, 2200 clauses before any blocking
formula = encode(SearchConfig(5))
print(formula.var_count, len(formula))
for fam, count in formula.family_counts().items():
    print(f"  {fam:>4} {count}")

# %% the built-in DPLL handles small n on its own
res = sat.enumerate_tables(SearchConfig(5), backend="embedded")
print(len(res.tables), "table(s); search exhaustive:", res.exhaustive)
t = res.tables[0]
print(format_table(t))
print("triangles:", sorted(count_triangles(t)))

# %% n=9 wants kissat (pip install 'artifact[kissat]' or KOBON_SOLVER=/path/to/solver)
backend = "external" if sat.backend_available() else "embedded"
res = sat.enumerate_tables(SearchConfig(9), backend=backend)
print(backend, len(res.tables), "table(s),", res.clause_count, "clauses at the final UNSAT call")
print(len(count_triangles(res.tables[0])), "triangles, the bound n(n-2)/3 =", 9 * 7 // 3)
