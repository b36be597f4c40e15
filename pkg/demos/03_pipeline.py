"""
A pinned pipeline
=================

A sink needs a witness for its contract. At run time the data schema is
checked again, and a sink whose check fails writes nothing.
"""

import json
import tempfile
from dataclasses import dataclass
from pathlib import Path

from shapegate import Policy, new_pipeline, static_assert_conforms


@dataclass
class Order:
    id: int
    amount: float
    tags: list[str]


@dataclass
class OrderContract:
    id: int
    amount: float
    tags: list[str]


proof = static_assert_conforms(Order, OrderContract, Policy.EXACT)

rows = [
    {"id": 1, "amount": 10.5, "tags": ["a"]},
    {"id": 2, "amount": 3.25, "tags": []},
]

tmp = Path(tempfile.mkdtemp())
good = tmp / "good.jsonl"
good.write_text("".join(json.dumps(r) + "\n" for r in rows))

report = new_pipeline().source(good, Order).add_sink(tmp / "good-out.jsonl", OrderContract, Policy.EXACT, proof).run()
print(report.summary())

# same declared types, but the data now carries a null inside tags
rows[1]["tags"] = ["x", None]
bad = tmp / "bad.jsonl"
bad.write_text("".join(json.dumps(r) + "\n" for r in rows))

report = new_pipeline().source(bad, Order).add_sink(tmp / "bad-out.jsonl", OrderContract, Policy.EXACT, proof).run()
print(report.summary())
print("bad-out.jsonl exists:", (tmp / "bad-out.jsonl").exists())
