"""Sequential forward block selection and contribution maps.

Runs the greedy block selector with a ridge scorer on a reduced dataset,
prints the score curve, and renders the per-grid channel contribution maps
as ASCII heatmaps with their centroids.
"""

from emgdecode import RunConfig, SynthConfig, iter_tasks
from emgdecode.evaluation import run_sfbs

synth = SynthConfig(seed=13, duration_s=8.0)
config = RunConfig(seed=13, crop_s=(0.5, 7.5), block_size=3, block_step=2)

result, maps, plan, _ = run_sfbs(config, iter_tasks(synth))

print("greedy selection (first 10 steps):")
print("  step  block  grid  origin   r2_vw")
for i in range(10):
    b = result.order[i]
    g = plan.grids[plan.grid_index[b]]
    print(f"  {i + 1:4d}  {b:5d}  {g.name:4s}  {plan.origins[b]}  {result.scores[i]:.4f}")
best = max(range(len(result.scores)), key=lambda i: result.scores[i])
print(f"peak r2_vw {result.scores[best]:.4f} at {best + 1} blocks of {len(result.order)}")

shades = " .:-=+*#%@"
for name, grid_map, centroid in zip(maps.grids, maps.maps, maps.centroids):
    print(f"\n{name} contribution map (rows 1-8 top to bottom), centroid {centroid}:")
    for row in grid_map:
        print("   " + "".join(shades[min(int(v * (len(shades) - 1)), len(shades) - 1)] for v in row))
