"""Built-in experiments with their independent convergence oracles.

consensus: every robot's stored value must equal the highest robot id.
  At P=0 the exact convergence step is eccentricity(max-id robot) + 1
  hops of synchronous flooding (the oracle below).
gradient: every robot's estimate must equal the relaxation fixpoint of
  shortest path sums over the comm graph (Bellman-Ford to fixpoint,
  summing in the same w + d order the script uses, so equality is exact).
barrier: every robot must observe the quorum; at P=0 robot i passes at
  step h_T(i) + 1 where h_T(i) is the T-th smallest hop distance from i.
"""

import math
from dataclasses import dataclass, field

from .. import behaviors
from ..compiler import compile_source
from ..linker import link
from ..values import Table

GRADIENT_INF = 50000.0


@dataclass
class Experiment:
    name: str
    sources: list                      # [(origin, text)] linked in order
    readout: str
    convergence: str                   # key into CONVERGENCE
    payload_budget: int = 200
    globals_setup: dict = field(default_factory=dict)
    bindings: tuple = ()               # host function names to mock
    sense: object = None               # callable(vm, rid, ctx, step) or None
    _image: object = field(default=None, repr=False)

    def image(self):
        if self._image is None:
            units = [compile_source(text, origin)
                     for origin, text in self.sources]
            self._image = link(units)
        return self._image

    def setup_vm(self, vm, rid, ctx):
        for name in self.bindings:
            vm.register_function(name, _mock_binding(name), actuator=True)
        for name, value in self.globals_setup.items():
            vm.set_global(name,
                          value(ctx, rid) if callable(value) else value)

    def prepare(self, ctx):
        PREPARE[self.convergence](ctx)

    def converged(self, ctx, readouts):
        return CONVERGENCE[self.convergence](ctx, readouts)


def _mock_binding(name):
    def fn(vm, args):
        return None
    fn.__name__ = name
    return fn


# --- oracles ---------------------------------------------------------------

def consensus_expected_step(topology, max_rid):
    """P=0 oracle: synchronous max-flooding finishes one step after the
    value has covered the graph, i.e. eccentricity(source) + 1."""
    hops = topology.hop_counts(max_rid)
    if any(h is None for h in hops):
        return None  # disconnected: consensus unreachable
    return max(hops) + 1


def gradient_fixpoint(topology, source=0, inf=GRADIENT_INF):
    """Relaxation fixpoint of w + d over the comm graph (Bellman-Ford)."""
    n = len(topology.poses)
    dist = [inf] * n
    dist[source] = 0.0
    changed = True
    while changed:
        changed = False
        for i in range(n):
            best = dist[i]
            for j, w in topology.neighbors[i]:
                cand = w + dist[j]
                if cand < best:
                    best = cand
                    changed = True
            dist[i] = best
    return dist


def barrier_pass_steps(topology, threshold):
    """P=0 oracle: step at which each robot first observes the quorum."""
    n = len(topology.poses)
    out = []
    for i in range(n):
        hops = topology.hop_counts(i)
        known = sorted(h for h in hops if h is not None)
        if len(known) < threshold:
            out.append(None)
        else:
            out.append(known[threshold - 1] + 1)
    return out


# --- convergence predicates -------------------------------------------------

def _prepare_consensus(ctx):
    ctx.extra["max_rid"] = ctx.cfg.n_robots - 1


def _converged_consensus(ctx, readouts):
    target = ctx.extra["max_rid"]
    return all(r == target for r in readouts)


def _prepare_gradient(ctx):
    ctx.extra["fixpoint"] = gradient_fixpoint(ctx.topology)


def _converged_gradient(ctx, readouts):
    fixpoint = ctx.extra["fixpoint"]
    return all(r == f for r, f in zip(readouts, fixpoint))


def _prepare_barrier(ctx):
    pass


def _converged_barrier(ctx, readouts):
    return all(r == 1 for r in readouts)


def _prepare_none(ctx):
    pass


def _converged_none(ctx, readouts):
    return False


def _converged_all_ones(ctx, readouts):
    return all(r == 1 for r in readouts)


PREPARE = {
    "max-id-consensus": _prepare_consensus,
    "gradient-fixpoint": _prepare_gradient,
    "barrier-passed": _prepare_barrier,
    "all-ones": _prepare_none,
    "none": _prepare_none,
}

CONVERGENCE = {
    "max-id-consensus": _converged_consensus,
    "gradient-fixpoint": _converged_gradient,
    "barrier-passed": _converged_barrier,
    "all-ones": _converged_all_ones,
    "none": _converged_none,
}


# --- built-in experiment builders -------------------------------------------

BARRIER_DRIVER = """
function init() {
  barrier_set()
  barrier_ready()
  passed = 0
}
function step() {
  if(passed == 0) {
    if(barrier_wait(THRESHOLD)) passed = 1
  }
}
"""


def build_consensus():
    return Experiment(
        name="consensus",
        sources=[("consensus.swl", behaviors.load_script("consensus"))],
        readout="vs_value",
        convergence="max-id-consensus",
    )


def build_gradient():
    return Experiment(
        name="gradient",
        sources=[("gradient.swl", behaviors.load_script("gradient"))],
        readout="mydist",
        convergence="gradient-fixpoint",
    )


def build_barrier(threshold=None):
    return Experiment(
        name="barrier",
        sources=[("barrier.swl", behaviors.load_script("barrier")),
                 ("barrier_driver.swl", BARRIER_DRIVER)],
        readout="passed",
        convergence="barrier-passed",
        payload_budget=4096,  # tuple re-propagation bursts at larger N
        globals_setup={"THRESHOLD": (lambda ctx, rid: ctx.cfg.n_robots)
                       if threshold is None else threshold},
    )


COLOR_RED = 1
COLOR_BLUE = 2


def build_target_select(targets=((0.0, 0.0, COLOR_RED),),
                        visibility=0.5):
    """Target relay demo with a synthetic camera sensor.

    Robots within `visibility` meters of a target point get a
    camera.targetdata table {dist (cm), color} refreshed every step;
    everybody else sees an empty camera table.
    """

    def sense(vm, rid, ctx, step):
        x, y = ctx.poses[rid]
        best = None
        for tx, ty, color in targets:
            d = math.hypot(x - tx, y - ty)
            if d <= visibility and (best is None or d < best[0]):
                best = (d, color)
        if best is None:
            vm.set_table("camera", [])
        else:
            data = Table({"dist": best[0] * 100.0, "color": best[1]})
            vm.set_table("camera", [("targetdata", data)])

    return Experiment(
        name="target_select",
        sources=[("target_select.swl",
                  behaviors.load_script("target_select"))],
        readout="targetfound",
        convergence="all-ones",
        payload_budget=4096,
        bindings=("goto",),
        globals_setup={
            "NUM_ROBOTS": lambda ctx, rid: ctx.cfg.n_robots,
            "COLOR_RED": COLOR_RED,
            "COLOR_BLUE": COLOR_BLUE,
        },
        sense=sense,
    )


def build_custom(script_path, readout, convergence="none"):
    with open(script_path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return Experiment(
        name="custom",
        sources=[(script_path, text)],
        readout=readout,
        convergence=convergence,
        bindings=("goto",),
    )


BUILDERS = {
    "consensus": build_consensus,
    "gradient": build_gradient,
    "barrier": build_barrier,
}
