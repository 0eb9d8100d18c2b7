"""Construction strings.

Grammar::

    spec    := factor ("x" factor)*       (only inside prod:)
    polar:<kind>:<dim>:<q>                kind in sp, o+, o, o-
    A:<n>:<k>:<q>
    Bgr:<kind>:<dim>:<q>:k=<k>
    dualpolar:<kind>:<dim>:<q>
    halfspin:o+:<dim>:<q>[:family=<0|1>]
    line:<s>
    segre:<n1>:<n2>:<q>
    prod:(<spec>)x(<spec>)[x(<spec>)...]
    <path>.plg
"""

from __future__ import annotations

import os
from functools import lru_cache

from .geometry import Geometry, read_plg
from .lie import dual_polar, grassmannian_A, half_spin, polar_grassmannian, product, segre, thick_line
from .polar import FormSpec, PolarSpace, build_classical


class ConstructionParseError(ValueError):
    def __init__(self, text: str, position: int, msg: str):
        super().__init__(f"{msg} at position {position} in {text!r}")
        self.text = text
        self.position = position


def _ints(text: str, offset: int, parts: list[str], names: list[str]) -> list[int]:
    out = []
    pos = offset
    for part, name in zip(parts, names):
        try:
            out.append(int(part))
        except ValueError:
            raise ConstructionParseError(text, pos, f"expected integer {name}, got {part!r}") from None
        pos += len(part) + 1
    return out


def _split_factors(full: str, text: str, base: int) -> list[tuple[str, int]]:
    """Split ``(a)x(b)x(c)`` into (factor, offset in ``full``) pairs; ``text`` starts at ``base``."""
    out = []
    i = 0
    while True:
        if i >= len(text) or text[i] != "(":
            raise ConstructionParseError(full, base + i, "expected '('")
        depth, j = 0, i
        while j < len(text):
            if text[j] == "(":
                depth += 1
            elif text[j] == ")":
                depth -= 1
                if depth == 0:
                    break
            j += 1
        if depth:
            raise ConstructionParseError(full, base + i, "unbalanced parenthesis")
        out.append((text[i + 1:j], base + i + 1))
        i = j + 1
        if i == len(text):
            return out
        if text[i] != "x":
            raise ConstructionParseError(full, base + i, "expected 'x' between product factors")
        i += 1


def _form(text: str, offset: int, parts: list[str]) -> FormSpec:
    if len(parts) < 3:
        raise ConstructionParseError(text, offset, "expected <kind>:<dim>:<q>")
    dim, q = _ints(text, offset + len(parts[0]) + 1, parts[1:3], ["dim", "q"])
    try:
        return FormSpec(parts[0], dim, q)
    except ValueError as exc:
        raise ConstructionParseError(text, offset, str(exc)) from None


@lru_cache(maxsize=16)
def classical(spec: FormSpec) -> PolarSpace:
    return build_classical(spec)


def _build(text: str, sub: str, offset: int) -> Geometry:
    if sub.endswith(".plg"):
        if not os.path.exists(sub):
            raise ConstructionParseError(text, offset, f"no such file {sub!r}")
        return read_plg(sub)
    head, sep, rest = sub.partition(":")
    if not sep:
        raise ConstructionParseError(text, offset, f"unknown construction {sub!r}")
    body = offset + len(head) + 1
    if head == "prod":
        factors = [_build(text, f, o) for f, o in _split_factors(text, rest, body)]
        if len(factors) < 2:
            raise ConstructionParseError(text, body, "a product needs at least two factors")
        g = factors[0]
        for f in factors[1:]:
            g = product(g, f)
        return g
    parts = rest.split(":")
    try:
        if head == "polar":
            return classical(_form(text, body, parts)).geometry
        if head == "A":
            if len(parts) != 3:
                raise ConstructionParseError(text, body, "expected A:<n>:<k>:<q>")
            n, k, q = _ints(text, body, parts, ["n", "k", "q"])
            return grassmannian_A(n, k, q)
        if head == "Bgr":
            if len(parts) != 4 or not parts[3].startswith("k="):
                raise ConstructionParseError(text, body, "expected Bgr:<kind>:<dim>:<q>:k=<k>")
            kpos = body + len(":".join(parts[:3])) + 3
            (k,) = _ints(text, kpos, [parts[3][2:]], ["k"])
            return polar_grassmannian(classical(_form(text, body, parts[:3])), k)
        if head == "dualpolar":
            return dual_polar(classical(_form(text, body, parts)))
        if head == "halfspin":
            family = 0
            if len(parts) == 4:
                if not parts[3].startswith("family="):
                    raise ConstructionParseError(text, body, "expected family=<0|1>")
                family = int(parts[3][7:])
            return half_spin(classical(_form(text, body, parts[:3])), family)
        if head == "line":
            (s,) = _ints(text, body, parts, ["size"])
            return thick_line(s)
        if head == "segre":
            n1, n2, q = _ints(text, body, parts, ["n1", "n2", "q"])
            return segre(n1, n2, q)
    except ConstructionParseError:
        raise
    except ValueError as exc:
        raise ConstructionParseError(text, offset, str(exc)) from None
    raise ConstructionParseError(text, offset, f"unknown construction {head!r}")


def build(text: str) -> Geometry:
    """Build the geometry described by a construction string."""
    g = _build(text, text.strip(), 0)
    g.name = text.strip()
    return g
