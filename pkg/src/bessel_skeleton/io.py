"""CSV/JSON serialization of skeletons and tables.

Floats are written with 17 significant digits so that reading a file back
reproduces every value bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
from typing import Iterable, TextIO

import numpy as np

from .core import BesselSpec, PathSkeleton
from .skeletons import StepRecords


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def _spec_dict(spec: BesselSpec | None):
    if spec is None:
        return None
    return {"delta": spec.delta, "y0": spec.y0, "eps": spec.eps, "is_integer": spec.is_integer}


def _spec_from(d) -> BesselSpec | None:
    if d is None:
        return None
    return BesselSpec(delta=d["delta"], y0=d["y0"], eps=d["eps"], is_integer=d["is_integer"])


def skeleton_meta(skeleton: PathSkeleton) -> dict:
    return {"spec": _spec_dict(skeleton.spec), "eps": skeleton.eps, "T": skeleton.T,
            "n_points": skeleton.n_points}


def write_skeleton_csv(out: TextIO, skeleton: PathSkeleton, records: StepRecords | None = None) -> None:
    """Header ``n,u,s,y`` (plus ``branch,calY,calZ,pi1`` with step records),
    one row per point, and a ``# {json}`` footer with the metadata."""
    w = csv.writer(out, lineterminator="\n")
    header = ["n", "u", "s", "y"]
    if records is not None:
        header += ["branch", "calY", "calZ", "pi1"]
    w.writerow(header)
    for n in range(len(skeleton.s)):
        row = [str(n), fmt(skeleton.u[n]), fmt(skeleton.s[n]), fmt(skeleton.y[n])]
        if records is not None:
            if n == 0:
                row += ["", "", "", ""]
            else:
                r = records[n - 1]
                row += [r.branch, fmt(r.y_calY), fmt(r.y_calZ), fmt(r.pi1)]
        w.writerow(row)
    out.write("# " + json.dumps(skeleton_meta(skeleton), sort_keys=True) + "\n")


def read_skeleton_csv(src: TextIO) -> PathSkeleton:
    lines = src.read().splitlines()
    meta = None
    body = []
    for line in lines:
        if line.startswith("#"):
            meta = json.loads(line[1:])
        elif line:
            body.append(line)
    if meta is None:
        raise ValueError("skeleton CSV has no metadata footer")
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    u = np.array([float(r["u"]) for r in rows])
    s = np.array([float(r["s"]) for r in rows])
    y = np.array([float(r["y"]) for r in rows])
    return PathSkeleton(spec=_spec_from(meta["spec"]), eps=meta["eps"], T=meta["T"], u=u, s=s, y=y)


def skeleton_to_json(skeleton: PathSkeleton, records: StepRecords | None = None) -> dict:
    out = skeleton_meta(skeleton)
    out["points"] = {"n": list(range(len(skeleton.s))), "u": skeleton.u.tolist(), "s": skeleton.s.tolist(),
                     "y": skeleton.y.tolist()}
    if records is not None:
        out["steps"] = {
            "branch": [r.branch for r in records],
            "calY": records.calY.tolist(),
            "calZ": records.calZ.tolist(),
            "pi1": records.pi1.tolist(),
        }
    return out


def skeleton_from_json(d: dict) -> PathSkeleton:
    p = d["points"]
    return PathSkeleton(spec=_spec_from(d["spec"]), eps=d["eps"], T=d["T"], u=np.array(p["u"], dtype=np.float64),
                        s=np.array(p["s"], dtype=np.float64), y=np.array(p["y"], dtype=np.float64))


def write_table_csv(out: TextIO, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow(["" if v is None else (v if isinstance(v, str) else fmt(v)) for v in row])
