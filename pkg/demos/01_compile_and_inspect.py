"""Compile a script, inspect its bytecode, round-trip the listing.

Run:  python3 demos/01_compile_and_inspect.py
"""

from swarmlang import assemble, disassemble, compile_and_link

SOURCE = """
# Virtual force magnitude
DELTA   = 50.
EPSILON = 2700.
function force_mag(dist, delta, epsilon) {
  return -(epsilon / dist) *
         ((delta / dist)^4 - (delta / dist)^2)
}
sample = force_mag(25., DELTA, EPSILON)
"""

image = compile_and_link(SOURCE, origin="force.swl")
print(f"image: {len(image.code)} bytes of code, "
      f"{len(image.strings)} strings, {len(image.consts)} constants")
print(f"functions: {image.function_offsets()}")

listing = disassemble(image)
print("\nfirst lines of the listing:")
for line in listing.splitlines()[:16]:
    print(" ", line)

rebuilt = assemble(listing)
print("\nassemble(disassemble(image)) byte-identical:",
      rebuilt.encode() == image.encode())
