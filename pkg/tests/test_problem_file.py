import json
import random
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ascendopt.costs import DSeparable, PhiKind, PiecewiseLinear, PowerP, Quadratic
from ascendopt.errors import ProblemFileError
from ascendopt.problem import Instance
from ascendopt.problem_file import dumps, load, loads, save
from helpers import continuous_instance, any_cost


def test_round_trip_every_kind(tmp_path):
    inst = Instance(
        (0.1, 2, 0.30000000000000004, 1),
        (1.5, 3, 2, 4),
        (Quadratic(1.25, -0.1), PowerP(2, 2.5), PiecewiseLinear([(0, -1), (1, 1)], offset=1.0, domain_upper=5),
         DSeparable(0.7, PhiKind.HYPOT)),
    )
    assert loads(dumps(inst)) == inst
    path = tmp_path / "p.json"
    save(inst, path)
    assert load(path) == inst


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_random(seed):
    rng = random.Random(seed)
    inst = continuous_instance(rng, rng.randint(1, 6), any_cost)
    text = dumps(inst)
    assert loads(text) == inst
    assert dumps(loads(text)) == text


def test_minimal_file():
    inst = loads('{"alpha": [1], "beta": [2], "costs": [{"kind": "quadratic", "a": 1}]}')
    assert inst.costs[0] == Quadratic(1, 0)


@pytest.mark.parametrize("text, where", [
    ('{"alpha": [1], "beta": [2]', "line 1"),
    ('[1, 2]', "top level"),
    ('{"alpha": [1], "beta": [2]}', "costs"),
    ('{"alpha": [1, 2], "beta": [2], "costs": [{"kind": "quadratic", "a": 1}]}', "lengths"),
    ('{"alpha": ["x"], "beta": [2], "costs": [{"kind": "quadratic", "a": 1}]}', "alpha[0]"),
    ('{"alpha": [1], "beta": [2], "costs": [{"kind": "cubic"}]}', "costs[0].kind"),
    ('{"alpha": [1], "beta": [2], "costs": [{"kind": "quadratic"}]}', "costs[0]: missing field 'a'"),
    ('{"alpha": [1], "beta": [2], "costs": [{"kind": "power", "lambda": true, "p": 2}]}', "costs[0].lambda"),
    ('{"alpha": [1], "beta": [2], "costs": [{"kind": "pwl", "points": [[0]]}]}', "costs[0].points"),
    ('{"alpha": [1], "beta": [2], "costs": [{"kind": "pwl", "points": [[0, 2], [1, 1]]}]}', "costs[0]"),
    ('{"alpha": [1], "beta": [2], "costs": [{"kind": "dsep", "d": 1, "phi": "cube"}]}', "costs[0].phi"),
    ('{"alpha": [-1], "beta": [2], "costs": [{"kind": "quadratic", "a": 1}]}', "alpha(1)"),
])
def test_parse_errors_name_the_field(text, where):
    with pytest.raises(ProblemFileError, match=re.escape(where)):
        loads(text)


def test_json_error_position():
    with pytest.raises(ProblemFileError, match="line 3"):
        loads('{\n "alpha": [1],\n "beta": [2,,]\n}')


def test_missing_file(tmp_path):
    with pytest.raises(ProblemFileError):
        load(tmp_path / "nope.json")


def test_numbers_use_shortest_repr():
    inst = Instance((0.1,), (0.30000000000000004,), (Quadratic(1),))
    doc = json.loads(dumps(inst))
    assert doc["beta"] == [0.30000000000000004]
    assert "0.10000000000000001" not in dumps(inst)
