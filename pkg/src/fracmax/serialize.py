"""File formats: spaces, exponents, weights, dumps and reports.

Space file: JSON with ``points`` plus either ``coords`` + ``metric``
("euclidean") or a full ``dist`` matrix, and ``mass``.  Exponent file: one of
{"type": "constant"|"values"|"log-holder"}.  Weight file: one of
{"type": "constant"|"values"|"power"}.  Reports are canonical JSON (sorted
keys) so identical runs are byte-identical; timings live under their own key.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .exponents import Exponent
from .generators import log_holder_exponent, power_weight
from .spaces import QuasiMetricSpace, ValidationError, build_space


def save_space(space: QuasiMetricSpace, path) -> None:
    payload = {
        "points": list(space.points),
        "dist": space.dist.tolist(),
        "mass": space.mass.tolist(),
    }
    write_json(payload, path)


def load_space(path) -> QuasiMetricSpace:
    data = _read_json(path)
    mass = data.get("mass")
    if mass is None:
        raise ValidationError(f"space file {path} lacks 'mass'")
    points = data.get("points")
    if "dist" in data:
        return build_space(data["dist"], mass, points=points)
    if "coords" in data:
        metric = data.get("metric", "euclidean")
        if metric != "euclidean":
            raise ValidationError(f"unsupported metric {metric!r} in {path}")
        coords = np.asarray(data["coords"], dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        diff = coords[:, None, :] - coords[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=2))
        return build_space(dist, mass, points=points)
    raise ValidationError(f"space file {path} needs either 'dist' or 'coords'")


def save_exponent(spec: dict, path) -> None:
    write_json(spec, path)


def load_exponent(path, space: QuasiMetricSpace) -> Exponent:
    data = _read_json(path)
    kind = data.get("type")
    if kind == "constant":
        return Exponent.constant(float(data["value"]), space.n)
    if kind == "values":
        values = np.asarray(data["values"], dtype=float)
        if len(values) != space.n:
            raise ValidationError(f"{path}: {len(values)} exponent values for {space.n} points")
        return Exponent(values, p_inf=data.get("p_inf"))
    if kind == "log-holder":
        return log_holder_exponent(space, float(data["p_inf"]),
                                   float(data["amplitude"]),
                                   base_point=data.get("base_point", 0))
    raise ValidationError(f"{path}: unknown exponent type {kind!r}")


def save_weight(spec: dict, path) -> None:
    write_json(spec, path)


def load_weight(path, space: QuasiMetricSpace) -> np.ndarray:
    data = _read_json(path)
    kind = data.get("type")
    if kind == "constant":
        return np.full(space.n, float(data.get("value", 1.0)))
    if kind == "values":
        values = np.asarray(data["values"], dtype=float)
        if len(values) != space.n:
            raise ValidationError(f"{path}: {len(values)} weight values for {space.n} points")
        return values
    if kind == "power":
        return power_weight(space, float(data["a"]), base_point=data.get("base_point", 0))
    raise ValidationError(f"{path}: unknown weight type {kind!r}")


def grid_dump(grid) -> dict:
    gens = {}
    for k in grid.ks:
        gens[str(k)] = [{
            "id": c.id,
            "center": int(c.center),
            "members": [int(i) for i in c.members],
            "parent": c.parent,
        } for c in grid.generation(k)]
    return {
        "d0": grid.d0,
        "seed": grid.seed,
        "k_min": grid.k_min,
        "k_max": grid.k_max,
        "c_d": grid.c_d,
        "c_in": grid.c_in,
        "eps_child": grid.eps_child,
        "generations": gens,
    }


def decomposition_dump(decomp) -> dict:
    base = {
        "eta": decomp.eta,
        "c_cz": decomp.c_cz,
        "root_selected": decomp.root_selected,
    }
    if decomp.is_stack:
        base["a"] = decomp.a
        base["k0"] = decomp.k0
        base["levels"] = {str(k): list(v) for k, v in sorted(decomp.levels.items())}
        base["cores"] = {f"{k}:{cid}": [int(i) for i in core]
                         for (k, cid), core in sorted(decomp.cores.items())}
    else:
        base["lambda"] = decomp.lam
        base["cubes"] = list(decomp.cubes)
        base["members"] = {str(cid): [int(i) for i in decomp.grid.cubes[cid].members]
                           for cid in decomp.cubes}
    return base


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")
    return path


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON in {path}: {exc}") from None


def write_csv(rows, header, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
