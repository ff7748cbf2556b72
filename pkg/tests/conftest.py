import pytest

from swarmlang.linker import compile_and_link
from swarmlang.vm import Vm, VmConfig


@pytest.fixture
def run_script():
    """Compile a script, run one empty-inbox step, return the VM."""

    def _run(text, robot_id=0, steps=1, config=None, sink=None):
        image = compile_and_link(text)
        vm = Vm(image, robot_id, config or VmConfig(),
                print_sink=sink or (lambda s: None))
        for _ in range(steps):
            vm.step([])
        return vm

    return _run


def build_vm(text, robot_id=0, config=None, sink=None):
    image = compile_and_link(text)
    return Vm(image, robot_id, config or VmConfig(),
              print_sink=sink or (lambda s: None))
