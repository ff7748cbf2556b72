"""Embed one VM in a host loop: sensors in, actuators out.

The host owns the loop: it writes the proximity table before every step
(phase 1), steps the VM, and reads the actuation snapshot (phase 5).
Run:  python3 demos/02_single_robot.py
"""

from swarmlang import Vm, compile_and_link

SOURCE = """
function step() {
  if(prox[0] > 100 or prox[7] > 100) {
    # obstacle in front, turn around
    set_wheels(-5.0, 5.0)
  }
  else set_wheels(10.0, 10.0)
}
function inc(x) { return x + 1 }
"""

vm = Vm(compile_and_link(SOURCE, origin="epuck.swl"), robot_id=7)
vm.register_function("set_wheels", lambda _vm, args: None, actuator=True)

readings = [
    [10, 0, 0, 0, 0, 0, 0, 0],     # clear path
    [220, 0, 0, 0, 0, 0, 0, 15],   # wall ahead
]
for step, prox in enumerate(readings, start=1):
    vm.set_table("prox", list(enumerate(prox)))
    _outbox, actuation = vm.step([])
    print(f"step {step}: prox[0]={prox[0]:3d} -> wheels "
          f"{actuation['set_wheels']}")

# calling a script function from the host
print("inc(5) from the host:", vm.call_function("inc", [5]))
