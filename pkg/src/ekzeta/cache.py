"""Persistent evaluation cache: content-addressed, append-only JSONL.

Values are BigComplex with lossless binary serialization of the mantissa
and exponent (hex strings), so a warm cache reproduces results to the
bit.  A cached record satisfies a request only when its precision is at
least the requested one and its error bound at most the requested
tolerance.  Corrupt lines are skipped with a warning: the store is
append-only and tolerant by design.  Lookups are lock-free reads of an
in-memory index; appends are serialized by a lock.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import threading
import time

from mpmath import mpf
from mpmath.libmp import from_man_exp

from .numerics import BigComplex


def mpf_to_hex(x: mpf) -> str:
    sign, man, exp, bc = x._mpf_
    if man == 0 and exp != 0:
        # inf/nan guards: store textual form
        return f"special:{x!r}"
    return f"{sign}:{man:x}:{exp}"


def mpf_from_hex(s: str) -> mpf:
    if s.startswith("special:"):
        raise ValueError("special value in cache")
    sign, man, exp = s.split(":")
    v = mpf(from_man_exp(int(man, 16), int(exp)))
    return -v if sign == "1" else v


def key_hash(key: str) -> str:
    return hashlib.sha256(key.encode()).hexdigest()


class EvalCache:
    """In-memory index over an optional append-only file store."""

    def __init__(self, path: str | None = None):
        self.path = path
        self._mem: dict[str, tuple] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if path and os.path.exists(path):
            self._load()

    def _load(self):
        with open(self.path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    val = (
                        mpf_from_hex(rec["re"]),
                        mpf_from_hex(rec["im"]),
                        mpf_from_hex(rec["err"]),
                        int(rec["prec"]),
                    )
                    self._mem[rec["key"]] = val
                except Exception:
                    print(
                        f"warning: skipping corrupt cache record at line {lineno}",
                        file=sys.stderr,
                    )

    def lookup(self, key: str, prec_bits: int, eps) -> BigComplex | None:
        h = key_hash(key)
        rec = self._mem.get(h)
        if rec is None:
            self.misses += 1
            return None
        re, im, err, prec = rec
        if prec < prec_bits or err > mpf(eps):
            self.misses += 1
            return None
        self.hits += 1
        return BigComplex(re, im, prec_bits, err)

    def store(self, key: str, value: BigComplex):
        h = key_hash(key)
        rec = (value.re, value.im, value.err_abs, value.prec_bits)
        with self._lock:
            self._mem[h] = rec
            if self.path:
                line = json.dumps(
                    {
                        "key": h,
                        "re": mpf_to_hex(value.re),
                        "im": mpf_to_hex(value.im),
                        "err": mpf_to_hex(value.err_abs),
                        "prec": value.prec_bits,
                        "at": time.time(),
                    },
                    sort_keys=True,
                )
                with open(self.path, "a") as fh:
                    fh.write(line + "\n")
