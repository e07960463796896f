# Even n from odd: put a new line between lines 1 and 2 of the 23-line table.

from kobon.published import load_table
from kobon.table import add_line_1_2, canonicalize, count_triangles, orbit, validate

c23 = load_table("c23")
print(len(count_triangles(c23)), "triangles on 23 lines")

# the new line crosses the old ones in the order 2, 3, ..., 23, 1
c24 = add_line_1_2(c23, list(range(2, 24)) + [1])
print("valid:", validate(c24).ok, "|", len(count_triangles(c24)), "triangles on 24 lines")

# %% the printed 24-line table uses another labeling of the 23 lines;
# some relabeling of c23 gives exactly that arrangement
target = canonicalize(load_table("c24"))
hits = [g for g in orbit(c23) if canonicalize(add_line_1_2(g, list(range(2, 24)) + [1])) == target]
print(len(hits), "of", len(orbit(c23)), "relabelings reproduce the printed 24-line table")
