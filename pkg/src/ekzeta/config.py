"""Job configuration: a sectioned, line-oriented text format with exact
rational literals (floats are allowed only for the numeric-analysis knobs
prec/eps).  Parse errors carry the offending line number.

Example (zeta/lvalue job over L = k(theta), theta^2 = i):

    [field]
    d = -1

    [extension]
    g = -1*w, 0, 1          # ascending coefficients of g, monic
    intbasis = identity
    multtable = auto

    [ideals]
    f = principal: -1-3*w, 3+1*w
    a = ring

    [units]
    u1 = 3, 2-2*w
    unit_index = 2
    torsion_order = 2
    norm_unit_order = 1

    [exponents]
    weight_p = -1
    weight_q = 0

    [character]
    values = -1/51-4/51*w
    phi_P = 1/17+4/17*w
    phi_Pt = -1/3

    [params]
    prec = 256
    eps = 1e-25
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from mpmath import mpf

from .errors import ValidationError
from .field import QuadElem, QuadField, parse_quadelem


@dataclass
class JobConfig:
    sections: dict
    lines: dict  # (section, key) -> line number
    path: str = "<config>"

    def get(self, section: str, key: str, default=None, required=False) -> str:
        sec = self.sections.get(section, {})
        if key not in sec:
            if required:
                raise ValidationError(
                    f"{self.path}: missing required key [{section}] {key}"
                )
            return default
        return sec[key]

    def where(self, section: str, key: str) -> str:
        n = self.lines.get((section, key))
        return f"{self.path}:{n}" if n else self.path

    def elem(self, F: QuadField, section: str, key: str, default=None, required=False):
        raw = self.get(section, key, required=required)
        if raw is None:
            return default
        try:
            return parse_quadelem(raw, F)
        except ValidationError as e:
            raise ValidationError(f"{self.where(section, key)}: {e}") from None

    def elem_vector(self, F: QuadField, section: str, key: str, required=False):
        raw = self.get(section, key, required=required)
        if raw is None:
            return None
        try:
            return [parse_quadelem(part, F) for part in raw.split(",")]
        except ValidationError as e:
            raise ValidationError(f"{self.where(section, key)}: {e}") from None

    def elem_matrix(self, F: QuadField, section: str, key: str, required=False):
        raw = self.get(section, key, required=required)
        if raw is None:
            return None
        try:
            return [
                [parse_quadelem(p, F) for p in row.split(",")]
                for row in raw.split(";")
            ]
        except ValidationError as e:
            raise ValidationError(f"{self.where(section, key)}: {e}") from None

    def integer(self, section: str, key: str, default=None, required=False) -> int:
        raw = self.get(section, key, required=required)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ValidationError(
                f"{self.where(section, key)}: expected integer, got {raw!r}"
            ) from None


def parse_config(text: str, path: str = "<config>") -> JobConfig:
    sections: dict = {}
    lines: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if not current:
                raise ValidationError(f"{path}:{lineno}: empty section name")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ValidationError(
                f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        if current is None:
            raise ValidationError(f"{path}:{lineno}: key outside any [section]")
        key, val = line.split("=", 1)
        key = key.strip()
        val = val.strip()
        if key in sections[current]:
            raise ValidationError(f"{path}:{lineno}: duplicate key {key!r}")
        sections[current][key] = val
        lines[(current, key)] = lineno
    return JobConfig(sections=sections, lines=lines, path=path)


def load_config(path: str) -> JobConfig:
    with open(path) as fh:
        return parse_config(fh.read(), path)
