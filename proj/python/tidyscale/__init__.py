"""Scale functions and tidy subgroups, exactly.

Reports come back as dicts in the same shape as `tidyscale --out`.
"""

import json

from ._core import ResourceCapError, examples, newton_polygon, padic_scale
from . import _core

__all__ = ["run", "example", "examples", "padic_scale", "newton_polygon", "ResourceCapError"]


def run(command, config_text, *, origin="<string>", depth=8, cap=1e6, word_len=6, prime=None):
    return json.loads(_core.run_config(command, config_text, origin, depth, cap, word_len, prime))


def example(name, *, depth=8, cap=1e6, word_len=6, prime=None):
    return json.loads(_core.run_example(name, depth, cap, word_len, prime))
