"""
The build gate
==============

Declared types are checked before any data moves. Reflection works on live
classes; the source check reads a module without importing it.
"""

import tempfile
from dataclasses import dataclass
from pathlib import Path

from shapegate import GateError, Policy, check_paths, static_assert_conforms


@dataclass
class Customer:
    id: int
    email: str


@dataclass
class CustomerContract:
    id: int
    email: str
    country: str = "NZ"


witness = static_assert_conforms(Customer, CustomerContract, Policy.BACKWARD)
print("backward:", witness)

try:
    static_assert_conforms(Customer, CustomerContract, Policy.EXACT)
except GateError as err:
    print("exact rejected:")
    print(err)

# the same pair written as a module; it would fail loudly if imported
module = '''
from dataclasses import dataclass
from shapegate import Policy, static_assert_conforms

@dataclass
class Customer:
    id: int
    email: str

@dataclass
class CustomerContract:
    id: int
    email: str
    country: str = "NZ"

PROOF = static_assert_conforms(Customer, CustomerContract, Policy.EXACT)
raise SystemExit("not imported by the gate")
'''

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "customers.py"
    path.write_text(module)
    for diagnostic in check_paths([path]):
        print(diagnostic.render())
