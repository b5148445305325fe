"""Decimal-string serialization for series files and report rows.

Binary floats are never written. Exact rationals are written as ``p/q``;
mpmath values as decimal strings carrying ``digits`` significant digits.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction

import mpmath
from mpmath import mp, mpc, mpf

from .errors import PreconditionError, SpecParseError
from .numerics import sqrt_w, to_mpc
from .series import WilsonSeries, parse_number

__all__ = ["digits_for", "dec", "number_out", "series_to_obj", "series_from_obj", "load_json", "dump_json"]

SERIES_KIND = "wilson_series"


def digits_for(bits: int) -> int:
    return math.ceil(bits * math.log10(2)) + 1


def dec(v, digits: int = 20) -> str:
    """Decimal string for a real value; integers and Fractions stay exact."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, Fraction)):
        return str(v)
    if isinstance(v, float):
        v = mpf(v)
    if isinstance(v, mpc):
        raise PreconditionError("complex value needs number_out")
    if mpmath.isinf(v):
        return "inf" if v > 0 else "-inf"
    if mpmath.isnan(v):
        return "nan"
    return mpmath.nstr(v, digits, min_fixed=-4, max_fixed=digits, strip_zeros=False)


def number_out(v, digits: int):
    """A real as a decimal string, a complex as [re, im]."""
    if isinstance(v, (Fraction, int)):
        return str(v)
    v = to_mpc(v) if not isinstance(v, mpf) else v
    if isinstance(v, mpc):
        if v.imag == 0:
            return dec(v.real, digits)
        return [dec(v.real, digits), dec(v.imag, digits)]
    return dec(v, digits)


def series_to_obj(s: WilsonSeries) -> dict:
    digits = digits_for(s.bits)
    with mp.workprec(s.bits):
        coeffs = [str(c) for c in s.exact] if s.exact is not None else [number_out(c, digits) for c in s.coeffs]
        if s.complete:
            # a finite expansion is written without its implied zeros
            while len(coeffs) > 1 and coeffs[-1] in ("0", "0.0"):
                coeffs.pop()
        x0 = [dec(s.x0.real, digits), dec(s.x0.imag, digits)]
    return {
        "kind": SERIES_KIND,
        "label": s.label,
        "x0": x0,
        "precision_bits": s.bits,
        "digits": digits,
        "exact": s.exact is not None,
        "complete": s.complete,
        "n_max": len(coeffs) - 1,
        "coeffs": coeffs,
        "caveats": list(s.caveats),
    }


def series_from_obj(obj: dict) -> WilsonSeries:
    if not isinstance(obj, dict) or obj.get("kind") != SERIES_KIND:
        raise PreconditionError("not a Wilson series file")
    bits = int(obj.get("precision_bits", 128))
    raw = obj.get("coeffs")
    if not isinstance(raw, list) or not raw:
        raise PreconditionError("series file needs a non-empty coeffs array")
    with mp.workprec(bits):
        if obj.get("exact"):
            cs = [parse_number(c) for c in raw]
        else:
            cs = [_read_mp(c) for c in raw]
        x0 = _read_mp(obj.get("x0", ["0", "0"]))
        s = WilsonSeries.from_coeffs(x0, cs, bits, complete=bool(obj.get("complete")), z0=sqrt_w(x0))
    return WilsonSeries(s.x0, s.z0, s.coeffs, bits, s.complete, s.exact, obj.get("label", ""), tuple(obj.get("caveats", ())))


def _read_mp(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return mpc(mpf(_check(v[0])), mpf(_check(v[1])))
    return mpc(mpf(_check(v)))


def _check(v):
    if not isinstance(v, str):
        raise PreconditionError(f"numbers must be decimal strings, got {v!r}")
    return v


def load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from exc


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
