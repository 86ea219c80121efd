"""Optimal stopping by the pure-dual expansion."""

import json

from ._core import *  # noqa: F401,F403
from ._core import cli as _cli
from ._core import verify_tree as _verify_tree


def verify(tree, K=20, name="tree"):
    """Oracle-equivalence report for a tree, as a dict."""
    return json.loads(_verify_tree(tree, K, name))


def run_cli(*args):
    """Run a CLI command; returns (exit code, parsed record or None, stderr)."""
    code, out, log = _cli([str(a) for a in args])
    record = json.loads(out) if out.strip().startswith("{") else None
    return code, record, log
