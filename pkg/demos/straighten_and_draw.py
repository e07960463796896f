# Straighten a 13-line table from the published figure and draw it.

from pathlib import Path

from kobon.published import load_table
from kobon.render import RenderConfig, ZoomRegion, crossing_radius, detect_small_triangles, render_svg
from kobon.straighten import PenaltyConfig, fit, format_lines, geometric_triangles

out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)

table = load_table("fig4_1")
res = fit(table, PenaltyConfig(restarts=20))
print(res.message, "after", res.restarts, "restart(s)")
print(res.report.summary())
print(format_lines(res.lines))
print(len(geometric_triangles(res.lines)), "triangles in the plane")

# %% plain drawing: the outer triangles dwarf the inner ones
(out / "fig4_1_plain.svg").write_text(render_svg(res.lines, table))

# fisheye pulls the far crossings in; the triangle set is unchanged
R = crossing_radius(res.lines)
(out / "fig4_1_fisheye.svg").write_text(render_svg(res.lines, table, RenderConfig(fisheye=R / 2)))

# %% magnify the clusters of tiny triangles before the fisheye
clusters = detect_small_triangles(res.lines, table, threshold=0.1)
for c in clusters:
    print(f"cluster at ({c.center[0]:.3f}, {c.center[1]:.3f}) r={c.radius:.3g}: {len(c.triangles)} triangles")
zoom = [ZoomRegion(c.center, 2 * c.radius, 1.5) for c in clusters[:3]]
cfg = RenderConfig(fisheye=R / 2, local_zoom=zoom, labels=True)
(out / "fig4_1_zoom.svg").write_text(render_svg(res.lines, table, cfg))
print("wrote", sorted(p.name for p in out.glob("fig4_1_*.svg")))
