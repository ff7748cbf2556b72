"""Swarm objects: select by predicate, set operations, scoped execution.

Six simulated robots split into even/odd teams; each team runs its own
closure under exec() and the swarm stack drives kin()/nonkin().
Run:  python3 demos/03_swarm_teams.py
"""

from swarmlang import Vm, compile_and_link

SOURCE = """
evens = swarm.create(1)
evens.select(id % 2 == 0)
odds = evens.others(2)
both = swarm.union(3, evens, odds)

function step() {
  evens.exec(function() { team = "even"\ncurrent = swarm.id() })
  odds.exec(function() { team = "odd"\ncurrent = swarm.id() })
}
"""

image = compile_and_link(SOURCE, origin="teams.swl")
for rid in range(6):
    vm = Vm(image, rid)
    vm.step([])
    print(f"robot {rid}: team={vm.get_global('team')} "
          f"swarm.id()={vm.get_global('current')} "
          f"in union={bool(vm.swarm_registry.is_member(3))}")
