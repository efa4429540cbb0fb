"""Scenario files (JSON, schema version "1") and seeded scenario generation.

Files are UTF-8 JSON objects::

    {
      "schema_version": "1",
      "scenario": {"variant": "physical", "gamma": [...], "sigma2": 0.1,
                   "G": [[...]], "S": [[...]], "C_rx": [[...]]},
      "constraints": {"pmax": [...], "total": 4.0,
                      "halfspaces": [{"a": [...], "beta": 1.0}]},
      "objective": "sum"
    }

The derived-model variant replaces ``G``, ``S`` and ``C_rx`` by ``A`` and
``Cdiag``.  ``constraints`` and ``objective`` are optional; ``C_rx`` may be
omitted for matched-filter receivers.  The full schema ships as
``docs/scenario.schema.json``.

Random scenarios come from numpy's PCG64 bit generator seeded with the
given integer, so corpora are reproducible across platforms.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InvalidBound, ParseError, ValidationError
from .link_model import Scenario
from .projection import ConstraintSet, Halfspace, box_constraints, total_budget

SCHEMA_VERSION = "1"

_TOP_KEYS = {"schema_version", "scenario", "constraints", "objective"}
_SCENARIO_KEYS = {
    "physical": {"variant", "K", "N", "gamma", "sigma2", "G", "S", "C_rx"},
    "derived": {"variant", "K", "gamma", "sigma2", "A", "Cdiag"},
}
_CONSTRAINT_KEYS = {"pmax", "total", "halfspaces"}


def _unknown(keys, allowed, where: str, strict: bool):
    extra = sorted(set(keys) - allowed)
    if not extra:
        return
    names = ", ".join(f"{where}.{k}" for k in extra)
    if strict:
        raise ValidationError(f"{where}.{extra[0]}", "unknown field")
    warnings.warn(f"ignoring unknown fields: {names}", stacklevel=3)


def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ValidationError(f"{where}.{key}", "missing required field")
    return block[key]


def _parse_constraints(block, K: int, strict: bool) -> Optional[ConstraintSet]:
    if block is None:
        return None
    if not isinstance(block, dict):
        raise ValidationError("constraints", "must be an object")
    _unknown(block, _CONSTRAINT_KEYS, "constraints", strict)
    cs = ConstraintSet(K)
    try:
        if block.get("pmax") is not None:
            pmax = np.asarray(block["pmax"], dtype=float)
            if pmax.shape != (K,):
                raise ValidationError("constraints.pmax", f"expected {K} caps")
            cs = cs & box_constraints(pmax)
        if block.get("total") is not None:
            cs = cs & total_budget(block["total"], K)
        for n, h in enumerate(block.get("halfspaces") or []):
            where = f"constraints.halfspaces[{n}]"
            if not isinstance(h, dict) or set(h) != {"a", "beta"}:
                raise ValidationError(where, "expected an object with keys 'a' and 'beta'")
            cs = cs & ConstraintSet(K, (Halfspace(h["a"], h["beta"]),))
    except (InvalidBound, ValueError, TypeError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("constraints", str(exc)) from None
    return cs


def scenario_from_dict(doc, strict: bool = True) -> Scenario:
    """Validate a parsed JSON document and build the :class:`Scenario`."""
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "document must be a JSON object")
    _unknown(doc, _TOP_KEYS, "<root>", strict)
    version = _require(doc, "schema_version", "<root>")
    if version != SCHEMA_VERSION:
        raise ValidationError("schema_version", f"unsupported version {version!r}")
    body = _require(doc, "scenario", "<root>")
    if not isinstance(body, dict):
        raise ValidationError("scenario", "must be an object")
    variant = body.get("variant", "physical")
    if variant not in _SCENARIO_KEYS:
        raise ValidationError("scenario.variant", f"unknown variant {variant!r}")
    _unknown(body, _SCENARIO_KEYS[variant], "scenario", strict)

    gamma = _require(body, "gamma", "scenario")
    sigma2 = _require(body, "sigma2", "scenario")
    if isinstance(sigma2, bool) or not isinstance(sigma2, (int, float)):
        raise ValidationError("sigma2", "must be a number")
    objective = doc.get("objective")
    if objective is not None and not isinstance(objective, str):
        raise ValidationError("objective", "must be a string such as 'sum', 'lq:2' or 'nash_game'")
    if variant == "physical":
        S = _require(body, "S", "scenario")
        fields = dict(G=_require(body, "G", "scenario"), S=S, C_rx=body.get("C_rx", S))
    else:
        fields = dict(A=_require(body, "A", "scenario"), Cdiag=_require(body, "Cdiag", "scenario"))

    scn = Scenario(gamma=gamma, sigma2=sigma2, objective=objective, **fields)
    if "K" in body and body["K"] != scn.K:
        raise ValidationError("K", f"declares {body['K']} users but gamma has {scn.K}")
    if variant == "physical" and "N" in body and body["N"] != scn.N:
        raise ValidationError("N", f"declares N={body['N']} but signatures have length {scn.N}")
    cs = _parse_constraints(doc.get("constraints"), scn.K, strict)
    if cs is None:
        return scn
    return Scenario(gamma=scn.gamma, sigma2=scn.sigma2, constraints=cs, objective=objective, **fields)


def _read_text(source) -> tuple[str, str]:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8"), "<bytes>"
    if isinstance(source, (str, os.PathLike)):
        return Path(source).read_text(encoding="utf-8"), str(source)
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data, getattr(source, "name", "<stream>")


def load(source, strict: bool = True) -> Scenario:
    """Read a scenario from a path, a byte string or a readable stream.

    With ``strict=False`` unknown fields produce a warning instead of a
    :class:`ValidationError`.
    """
    try:
        text, name = _read_text(source)
    except UnicodeDecodeError as exc:
        raise ParseError("<input>", f"not valid UTF-8 ({exc.reason})") from None
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{name}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return scenario_from_dict(doc, strict=strict)


def _reject_constant(name):
    raise ValidationError("<number>", f"{name} is not allowed")


def scenario_to_dict(scn: Scenario) -> dict:
    body = {"variant": scn.variant, "K": scn.K, "gamma": scn.gamma.tolist(), "sigma2": scn.sigma2}
    if scn.variant == "physical":
        body.update(N=scn.N, G=scn.G.tolist(), S=scn.S.tolist(), C_rx=scn.C_rx.tolist())
    else:
        body.update(A=scn.A.tolist(), Cdiag=scn.Cdiag.tolist())
    doc = {"schema_version": SCHEMA_VERSION, "scenario": body}
    if scn.constraints is not None:
        doc["constraints"] = {
            "halfspaces": [{"a": list(h.a), "beta": h.beta} for h in scn.constraints.halfspaces]
        }
    if scn.objective is not None:
        doc["objective"] = scn.objective
    return doc


def dumps(scn: Scenario) -> str:
    """Canonical text: sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(scenario_to_dict(scn), sort_keys=True, indent=2, allow_nan=False) + "\n"


def save(scn: Scenario, path) -> None:
    data = dumps(scn).encode("utf-8")
    if isinstance(path, (str, os.PathLike)):
        Path(path).write_bytes(data)
    elif isinstance(path, io.TextIOBase):
        path.write(data.decode("utf-8"))
    else:
        path.write(data)


def digest(scn: Scenario) -> str:
    return hashlib.sha256(dumps(scn).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class GainProfile:
    """Near-far structure: own gains in ``[own_low, own_high)``, cross gains
    in ``[0, cross_ratio * own_low)`` so that ``G_ii`` always dominates."""

    own_low: float = 0.5
    own_high: float = 1.0
    cross_ratio: float = 1.0


@dataclass(frozen=True)
class TargetProfile:
    low: float = 0.5
    high: float = 3.0


def generate(
    seed: int,
    K: int,
    N: int,
    gain: GainProfile = GainProfile(),
    target: TargetProfile = TargetProfile(),
    sigma2: float = 0.1,
    pmax=None,
    total: Optional[float] = None,
) -> Scenario:
    """Random physical scenario with unit-norm signatures and matched filters."""
    if K < 1 or N < 1:
        raise ValueError("K and N must be at least 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    G = gain.cross_ratio * gain.own_low * rng.uniform(size=(K, K))
    np.fill_diagonal(G, rng.uniform(gain.own_low, gain.own_high, size=K))
    S = rng.standard_normal(size=(K, N))
    S /= np.linalg.norm(S, axis=1, keepdims=True)
    gamma = rng.uniform(target.low, target.high, size=K)
    cs = None
    if pmax is not None:
        pmax = np.broadcast_to(np.asarray(pmax, dtype=float), (K,))
        cs = box_constraints(pmax)
    if total is not None:
        tb = total_budget(total, K)
        cs = tb if cs is None else cs & tb
    return Scenario(gamma=gamma, sigma2=sigma2, G=G, S=S, C_rx=S.copy(), constraints=cs)
