"""
Shapes, drift and policies
==========================

A record type becomes a canonical shape. Two shapes are compared under a
policy, which yields either a witness or a drift report.
"""

from dataclasses import dataclass, field
from typing import Optional

from shapegate import Policy, conforms, fingerprint, shape_for
from shapegate.shapes import describe


@dataclass
class Order:
    id: int
    amount: float
    tags: list[Optional[str]]
    nick: Optional[str] = None


@dataclass
class OrderContract:
    ID: int
    amount: float
    tags: list[str] = field(default_factory=list)


producer = shape_for(Order)
contract = shape_for(OrderContract)
print(describe(producer))
print(describe(contract))
print(f"fingerprint {fingerprint(producer):016x}")

# Optional at the field root is a flag; inside the list it stays in the type
for policy in Policy:
    result = conforms(producer, contract, policy)
    verdict = "ok" if not hasattr(result, "items") else f"{len(result.items)} drift item(s)"
    print(f"{policy.value:>22}: {verdict}")

# a full report lists every problem, not just the first one
print()
print(conforms(producer, contract, Policy.EXACT).render())
