"""JSON schemas for matrices, channels, generators, trajectories and baths.

Complex entries are [re, im] pairs; matrices are row-major arrays of rows.
Round trips are bit exact for IEEE-754 doubles because the encoder prints
shortest round-trip decimals.  Loaders validate physical constraints and
raise :class:`ValidationError` with a machine-readable detail dict.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .born import (
    Bath,
    ControlTrajectory,
    Coupling,
    flat_bath,
    gaussian_bath,
    ohmic_bath,
    quartic_gaussian_bath,
    tabulated_bath,
)
from .channels import KrausMap
from .lindblad import GKLSGenerator, GibbsGenerator, build_gibbs_generator
from .operators import check_density_matrix, eye


class ValidationError(ValueError):
    """Input failed schema or physical validation."""

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}

    def as_json(self) -> dict:
        return {"error": "validation", "message": str(self), **self.details}


def _complex_to_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _pair_to_complex(pair) -> complex:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        raise ValidationError(f"complex entry must be a [re, im] pair, got {pair!r}")
    return complex(float(pair[0]), float(pair[1]))


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "dim": int(m.shape[0]),
        "rows": [[_complex_to_pair(z) for z in row] for row in m],
    }


def matrix_from_json(obj: Any) -> np.ndarray:
    if not isinstance(obj, dict) or "rows" not in obj:
        raise ValidationError("matrix object must have a 'rows' field")
    rows = obj["rows"]
    n = int(obj.get("dim", len(rows)))
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValidationError(f"matrix rows do not form a {n}x{n} array")
    return np.array([[_pair_to_complex(z) for z in row] for row in rows], dtype=complex)


def vector_to_json(v: np.ndarray) -> dict:
    v = np.asarray(v, dtype=complex).ravel()
    return {"dim": int(v.size), "entries": [_complex_to_pair(z) for z in v]}


def vector_from_json(obj: Any) -> np.ndarray:
    if not isinstance(obj, dict) or "entries" not in obj:
        raise ValidationError("vector object must have an 'entries' field")
    v = np.array([_pair_to_complex(z) for z in obj["entries"]], dtype=complex)
    if "dim" in obj and int(obj["dim"]) != v.size:
        raise ValidationError("vector length does not match its declared dim")
    return v


# ---------------------------------------------------------------------------
# Channels


def channel_to_json(channel: KrausMap) -> dict:
    return {
        "dim": channel.dim,
        "kraus": [matrix_to_json(w) for w in channel.kraus_ops],
    }


def channel_from_json(obj: Any, *, tol: float = 1e-9) -> KrausMap:
    if not isinstance(obj, dict) or "kraus" not in obj:
        raise ValidationError("channel object must have a 'kraus' field")
    ops = [matrix_from_json(m) for m in obj["kraus"]]
    try:
        channel = KrausMap(ops, tol=tol)
    except ValueError as exc:
        n = ops[0].shape[0]
        gram = sum(w.conj().T @ w for w in ops)
        defect = float(np.max(np.abs(gram - eye(n))))
        raise ValidationError(
            str(exc), {"unitality_defect": defect, "tolerance": tol}
        ) from exc
    return channel


# ---------------------------------------------------------------------------
# Generators


def generator_to_json(gen: GKLSGenerator) -> dict:
    return {
        "dim": gen.dim,
        "H": matrix_to_json(gen.hamiltonian),
        "V": [matrix_to_json(v) for v in gen.lindblad_ops],
    }


def generator_from_json(obj: Any, *, tol: float = 1e-9):
    if isinstance(obj, dict) and "model" in obj:
        return _model_generator(obj)
    if not isinstance(obj, dict) or "H" not in obj:
        raise ValidationError("generator object must have an 'H' field")
    h = matrix_from_json(obj["H"])
    ops = [matrix_from_json(m) for m in obj.get("V", [])]
    if "T" in obj:
        try:
            return build_gibbs_generator(h, float(obj["T"]), ops)
        except ValueError as exc:
            raise ValidationError(str(exc), {"temperature": obj["T"]}) from exc
    try:
        return GKLSGenerator(h, ops, tol=tol)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _model_generator(obj: dict) -> GKLSGenerator:
    """Registry of named N-particle models: superradiance and private_bath."""
    from .symmetry import build_private_bath_generator, build_superradiance_generator

    name = obj["model"]
    try:
        if name == "superradiance":
            return build_superradiance_generator(
                int(obj["N"]), float(obj.get("omega", 1.0)), float(obj.get("gamma", 1.0))
            )
        if name == "private_bath":
            n_sites = int(obj["N"])
            site_gen = GKLSGenerator(
                matrix_from_json(obj["h_site"]) if "h_site" in obj
                else np.zeros((int(obj.get("d", 2)),) * 2),
                [matrix_from_json(m) for m in obj.get("v_site", [])],
            )
            dim = site_gen.dim ** n_sites
            ham = matrix_from_json(obj["H"]) if "H" in obj else np.zeros((dim, dim))
            return build_private_bath_generator(n_sites, ham, site_gen)
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"bad model parameters: {exc}") from exc
    raise ValidationError(
        f"unknown model {name!r}", {"known_models": ["superradiance", "private_bath"]}
    )


def gibbs_to_json(gibbs: GibbsGenerator) -> dict:
    return {
        "dim": gibbs.generator.dim,
        "H": matrix_to_json(gibbs.hamiltonian),
        "V": [matrix_to_json(v) for v, _ in gibbs.eigen_ops],
        "T": gibbs.temperature,
        "omega": [float(w) for _, w in gibbs.eigen_ops],
    }


# ---------------------------------------------------------------------------
# States


def state_from_json(obj: Any, *, tol: float = 1e-8) -> np.ndarray:
    rho = matrix_from_json(obj)
    try:
        check_density_matrix(rho, tol)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    return rho


def pure_state_from_json(obj: Any, *, tol: float = 1e-8) -> np.ndarray:
    psi = vector_from_json(obj)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > tol:
        raise ValidationError(f"state vector norm {norm:.6g} != 1", {"norm": norm})
    return psi


# ---------------------------------------------------------------------------
# Trajectories and baths


def trajectory_to_json(traj: ControlTrajectory) -> dict:
    return {
        "tau": traj.tau,
        "segments": [
            {"dt": seg.duration, "H": matrix_to_json(seg.hamiltonian)}
            for seg in traj.segments
        ],
    }


def trajectory_from_json(obj: Any) -> ControlTrajectory:
    if not isinstance(obj, dict) or "tau" not in obj or "segments" not in obj:
        raise ValidationError("trajectory object must have 'tau' and 'segments'")
    try:
        return ControlTrajectory(
            float(obj["tau"]),
            [(float(seg["dt"]), matrix_from_json(seg["H"])) for seg in obj["segments"]],
        )
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"bad trajectory: {exc}") from exc


_BATH_FAMILIES = {
    "gaussian": lambda obj, n: gaussian_bath(
        obj.get("coupling", 1.0), obj.get("width", 1.0), n_ops=n
    ),
    "flat": lambda obj, n: flat_bath(
        obj.get("level", obj.get("coupling", 1.0)), obj.get("cutoff", 50.0), n_ops=n
    ),
    "ohmic": lambda obj, n: ohmic_bath(
        obj.get("coupling", 1.0), obj.get("kappa", 1.0), obj.get("cutoff", 1.0), n_ops=n
    ),
    "quartic-gaussian": lambda obj, n: quartic_gaussian_bath(
        obj.get("coupling", 1.0), obj.get("width", 1.0), n_ops=n
    ),
}


def bath_from_json(obj: Any, n_ops: int = 1) -> Bath:
    if not isinstance(obj, dict):
        raise ValidationError("bath object must be a JSON object")
    if "omega" in obj and "R" in obj:
        try:
            return tabulated_bath(obj["omega"], np.asarray(obj["R"], dtype=float))
        except ValueError as exc:
            raise ValidationError(f"bad tabulated bath: {exc}") from exc
    kind = obj.get("type")
    if kind not in _BATH_FAMILIES:
        raise ValidationError(
            f"unknown bath type {kind!r}", {"known_types": sorted(_BATH_FAMILIES)}
        )
    try:
        return _BATH_FAMILIES[kind](obj, n_ops)
    except ValueError as exc:
        raise ValidationError(f"bad bath parameters: {exc}") from exc


def coupling_from_json(obj: Any) -> Coupling:
    """{"S": [<matrix>...], "bath": <bath>} -> Coupling."""
    if not isinstance(obj, dict) or "S" not in obj or "bath" not in obj:
        raise ValidationError("coupling object must have 'S' and 'bath'")
    ops = [matrix_from_json(m) for m in obj["S"]]
    bath = bath_from_json(obj["bath"], n_ops=len(ops))
    try:
        return Coupling(system_ops=tuple(ops), bath=bath)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


# ---------------------------------------------------------------------------
# File helpers


def load_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def dump_json(obj: Any, path: str | None = None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
