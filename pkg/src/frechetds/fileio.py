"""Trajectory files.

Trajectories are JSON Lines, one object per line::

    {"id": "a", "points": [[0.0, 0.0], [1.0, 0.0]]}

Stream replays are plain text with one point per line (``x1,x2,...,xd``);
a line starting with ``?`` carries a query curve as a JSON list of points.
Blank lines and lines starting with ``#`` are skipped in both formats.
"""

from dataclasses import dataclass
import hashlib
import json
import math

import numpy as np

from .errors import InputError


@dataclass
class TrajectoryRecord:
    id: str
    points: np.ndarray

    def to_json(self):
        # json writes floats with repr, which round-trips exactly
        return json.dumps({"id": self.id, "points": self.points.tolist()})


def _reject_constant(name):
    raise ValueError(f"non-finite number {name}")


def _points(raw, where):
    try:
        arr = np.array(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: points must be a list of equal-length numeric vectors ({exc})") from None
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InputError(f"{where}: points must be a non-empty list of non-empty vectors")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{where}: points contain NaN or infinite values")
    return arr


def parse_trajectories(path):
    """Read a JSON Lines trajectory file; errors name the offending line."""
    records, dim = [], None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line, parse_constant=_reject_constant)
            except ValueError as exc:
                raise InputError(f"{where}: malformed JSON ({exc})") from None
            if not isinstance(obj, dict) or "points" not in obj:
                raise InputError(f"{where}: expected an object with 'id' and 'points'")
            pts = _points(obj["points"], where)
            if dim is None:
                dim = pts.shape[1]
            elif pts.shape[1] != dim:
                raise InputError(f"{where}: dimension {pts.shape[1]} differs from earlier records ({dim})")
            records.append(TrajectoryRecord(str(obj.get("id", len(records))), pts))
    return records


def write_trajectories(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def parse_stream(path):
    """Yield ``("point", array)`` and ``("query", curve)`` events from a replay file."""
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            where = f"{path}:{lineno}"
            if line.startswith("?"):
                try:
                    raw = json.loads(line[1:], parse_constant=_reject_constant)
                except ValueError as exc:
                    raise InputError(f"{where}: malformed query literal ({exc})") from None
                q = _points(raw, where)
                kind = "query"
            else:
                try:
                    vals = [float(v) for v in line.split(",")]
                except ValueError:
                    raise InputError(f"{where}: expected comma-separated numbers") from None
                if not all(math.isfinite(v) for v in vals):
                    raise InputError(f"{where}: NaN or infinite coordinate")
                q = np.array(vals)
                kind = "point"
            d = q.shape[-1]
            if dim is None:
                dim = d
            elif d != dim:
                raise InputError(f"{where}: dimension {d} differs from earlier lines ({dim})")
            yield kind, q


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


__all__ = ["TrajectoryRecord", "parse_trajectories", "write_trajectories", "parse_stream", "file_digest"]
