"""Distributed max-id agreement through the shared (key, value) store.

Ten robots each write their own id under one key; conflicting writes at
equal logical clocks go through the resolver, and the maximum floods the
network one hop per step.  The flooding oracle predicts the exact
convergence step for lossless delivery.
Run:  python3 demos/04_shared_store.py
"""

from swarmlang.sim import (SimulationConfig, Topology, build_consensus,
                           consensus_expected_step, place_robots, run)

for drop_prob in (0.0, 0.5, 0.75):
    cfg = SimulationConfig(n_robots=10, drop_prob=drop_prob, seed=7,
                           max_steps=60)
    result = run(cfg, build_consensus())
    line = f"P={drop_prob:4.2f}: consensus at step {result.converged_step}"
    if drop_prob == 0.0:
        topo = Topology.build(cfg, place_robots(cfg))
        oracle = consensus_expected_step(topo, cfg.n_robots - 1)
        line += f" (flooding oracle predicts {oracle})"
    print(line)

print("\nper-step maximum known id on robot 0 (P=0.75 run):")
cfg = SimulationConfig(n_robots=10, drop_prob=0.75, seed=7, max_steps=60)
result = run(cfg, build_consensus())
for m in result.metrics:
    print(f"  step {m.step:2d}: {m.readouts}")
    if m.converged:
        break
