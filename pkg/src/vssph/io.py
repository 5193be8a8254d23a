"""Scene files, particle snapshots and the metrics time series.

Scene files
-----------
Plain text, one ``key = value`` per line, ``#`` starts a comment.  Vector
values are whitespace separated.  Keys marked (*) may repeat.

==================  ==========================================================
key                 value
==================  ==========================================================
name                scene label
d0                  particle spacing [m] (required)
h_ratio             smoothing radius over d0 (2.5)
kernel              proposed_quartic | cubic_spline | wendland_c2 |
                    classic_quartic
delta               clamp threshold [m] (defaults to d0)
bigw_resolution     tabulation nodes per segment for the integrated weight
container           ``xlo ylo xhi yhi`` of a closed tank
domain              ``xlo ylo xhi yhi`` extra extent for ghost seeding
fluid_box (*)       ``xlo ylo xhi yhi`` filled with particles (at least one)
solid_box (*)       ``xlo ylo xhi yhi`` solid obstacle
solid_sphere (*)    ``cx cy radius`` solid disc
half_space (*)      ``nx ny offset``; solid where ``n . x < offset``
rho0                density [kg/m^3]
gravity             ``gx gy`` [m/s^2]
cn, ct              wall normal / tangential coefficients in [0, 1]
kappa, lambda       shifting energy coefficients in [0, 1]
shift_iterations    shifting rounds per step
cfl                 Courant factor in (0, 1]
dt_max              time step cap [s]
xsph_eps            XSPH coefficient in [0, 1]
eta0_coeff          CG threshold is ``eta0_coeff / dt^2``
cg_max_iter         CG iteration cap
warm_start          true | false
ecs                 true | false (error compensating source)
class_tolerance     relative slack on the ``A0`` comparisons
frame_interval      simulated time between snapshots [s]
total_time          end time [s]
seed                RNG seed for the perturbation
epsilon             perturbation amplitude in units of d0
velocity_field      zero | taylor_green | rigid_rotation
velocity_scale      U [m/s] or Omega [rad/s]
==================  ==========================================================

Snapshots
---------
Header lines start with ``#``: the format tag, then ``key = value`` lines for
``t``, ``step``, ``N``, ``d0``, ``h`` and the reference constants, then a
``columns`` line.  One row per particle follows:
``id x y vx vy p class c``.  Floats are written with 17 significant digits so
a write/read cycle is exact.

Metrics
-------
CSV with ``#`` comment lines echoing the constants, then the header row
``step,t,dt,cg_iterations,eta,xi_01..xi_K,d_bar,p_min,p_max,momentum_drift,
volume_proxy`` and one row per step.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, fields

import numpy as np

from .scenes import SceneConfig

SNAPSHOT_TAG = "# vssph snapshot v1"


def _fmt(v):
    """Shortest text that reads back as the same double."""
    return repr(float(v))


class SceneFileError(ValueError):
    pass


def _floats(n):
    def parse(text):
        parts = text.split()
        if len(parts) != n:
            raise ValueError(f"expected {n} numbers, got {len(parts)}")
        return tuple(float(p) for p in parts)

    return parse


def _box(text):
    v = _floats(4)(text)
    return ((v[0], v[1]), (v[2], v[3]))


def _sphere(text):
    v = _floats(3)(text)
    return ((v[0], v[1]), v[2])


def _half_space(text):
    v = _floats(3)(text)
    return ((v[0], v[1]), v[2])


def _bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _str(text):
    return text.strip()


# key -> (SceneConfig field, parser, repeatable)
SCENE_KEYS = {
    "name": ("name", _str, False),
    "d0": ("d0", float, False),
    "h_ratio": ("h_ratio", float, False),
    "kernel": ("kernel", _str, False),
    "delta": ("delta", float, False),
    "bigw_resolution": ("bigw_resolution", int, False),
    "container": ("container", _box, False),
    "domain": ("domain", _box, False),
    "fluid_box": ("fluid_boxes", _box, True),
    "solid_box": ("solid_boxes", _box, True),
    "solid_sphere": ("solid_spheres", _sphere, True),
    "half_space": ("half_spaces", _half_space, True),
    "rho0": ("rho0", float, False),
    "gravity": ("gravity", _floats(2), False),
    "cn": ("cn", float, False),
    "ct": ("ct", float, False),
    "kappa": ("kappa", float, False),
    "lambda": ("lam", float, False),
    "shift_iterations": ("shift_iterations", int, False),
    "cfl": ("cfl", float, False),
    "dt_max": ("dt_max", float, False),
    "xsph_eps": ("xsph_eps", float, False),
    "eta0_coeff": ("eta0_coeff", float, False),
    "cg_max_iter": ("cg_max_iter", int, False),
    "warm_start": ("warm_start", _bool, False),
    "ecs": ("ecs", _bool, False),
    "class_tolerance": ("class_tolerance", float, False),
    "frame_interval": ("frame_interval", float, False),
    "total_time": ("total_time", float, False),
    "seed": ("seed", int, False),
    "epsilon": ("epsilon", float, False),
    "velocity_field": ("velocity_field", _str, False),
    "velocity_scale": ("velocity_scale", float, False),
}
REQUIRED_KEYS = ("d0", "fluid_box")


def parse_scene(text, source="<string>"):
    """Parse scene-file text into a :class:`SceneConfig`."""
    values = {}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SceneFileError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCENE_KEYS:
            raise SceneFileError(f"{source}:{lineno}: unknown key {key!r}")
        attr, parse, repeatable = SCENE_KEYS[key]
        if key in seen and not repeatable:
            raise SceneFileError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            parsed = parse(value)
        except ValueError as exc:
            raise SceneFileError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        if repeatable:
            values.setdefault(attr, []).append(parsed)
        else:
            values[attr] = parsed
    for key in REQUIRED_KEYS:
        if key not in seen:
            raise SceneFileError(f"{source}: missing required key {key!r}")
    try:
        return SceneConfig(**values)
    except ValueError as exc:
        raise SceneFileError(f"{source}: {exc}") from None


def load_scene(path):
    """Read a scene file; returns ``(SceneConfig, SolverConfig)``."""
    path = os.fspath(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SceneFileError(f"cannot read scene file {path}: {exc.strerror}") from None
    cfg = parse_scene(text, source=path)
    return cfg, cfg.solver_config()


def format_scene(cfg: SceneConfig):
    """Scene-file text that parses back to ``cfg``."""
    by_attr = {attr: (key, rep) for key, (attr, _, rep) in SCENE_KEYS.items()}

    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (tuple, list)):
            return " ".join(fmt(x) for x in v)
        if isinstance(v, float):
            return _fmt(v)
        return str(v)

    def flat(v):
        if isinstance(v, (tuple, list)):
            out = []
            for x in v:
                out.extend(flat(x))
            return out
        return [v]

    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        key, rep = by_attr[f.name]
        if v is None:
            continue
        if rep:
            lines += [f"{key} = {fmt(flat(item))}" for item in v]
        elif isinstance(v, (tuple, list)):
            lines.append(f"{key} = {fmt(flat(v))}")
        else:
            lines.append(f"{key} = {fmt(v)}")
    return "\n".join(lines) + "\n"


@dataclass
class Snapshot:
    t: float
    step: int
    d0: float
    h: float
    constants: dict
    ids: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    pressure: np.ndarray
    classes: np.ndarray
    concentration: np.ndarray


CONSTANT_KEYS = ("alpha0", "A0", "c0", "delta0c", "beta0")


def write_snapshot(sim, path):
    st = sim.state
    dim = st.positions.shape[1] if st.n else 2
    axes = "xyz"[:dim]
    cols = ["id", *axes, *(f"v{a}" for a in axes), "p", "class", "c"]
    header = [
        SNAPSHOT_TAG,
        f"# t = {_fmt(st.t)}",
        f"# step = {st.step}",
        f"# N = {st.n}",
        f"# d0 = {_fmt(sim.d0)}",
        f"# h = {_fmt(sim.kernel.h)}",
    ]
    header += [f"# {k} = {_fmt(getattr(sim.consts, k))}" for k in CONSTANT_KEYS]
    header.append("# columns = " + " ".join(cols))
    rows = []
    for i in range(st.n):
        vals = [*st.positions[i], *st.velocities[i], st.pressure[i]]
        rows.append(
            f"{i} " + " ".join(_fmt(v) for v in vals)
            + f" {int(st.classes[i])} {_fmt(st.concentration[i])}"
        )
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(header + rows) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write snapshot {path}: {exc.strerror}") from exc


def read_snapshot(path) -> Snapshot:
    meta = {}
    cols = None
    data = []
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != SNAPSHOT_TAG:
            raise ValueError(f"{path}: not a snapshot file")
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                key, value = (s.strip() for s in line[1:].split("=", 1))
                if key == "columns":
                    cols = value.split()
                else:
                    meta[key] = value
            elif line:
                data.append(line.split())
    if cols is None:
        raise ValueError(f"{path}: missing columns line")
    n = int(meta["N"])
    if len(data) != n:
        raise ValueError(f"{path}: header says {n} particles, found {len(data)} rows")
    dim = (len(cols) - 4) // 2
    arr = np.array(data, dtype=object).reshape(n, len(cols))
    num = lambda k: arr[:, k].astype(float)  # noqa: E731
    pos = np.stack([num(1 + a) for a in range(dim)], axis=1) if n else np.zeros((0, dim))
    vel = np.stack([num(1 + dim + a) for a in range(dim)], axis=1) if n else np.zeros((0, dim))
    return Snapshot(
        t=float(meta["t"]),
        step=int(meta["step"]),
        d0=float(meta["d0"]),
        h=float(meta["h"]),
        constants={k: float(meta[k]) for k in CONSTANT_KEYS},
        ids=arr[:, 0].astype(int) if n else np.zeros(0, dtype=int),
        positions=pos,
        velocities=vel,
        pressure=num(1 + 2 * dim) if n else np.zeros(0),
        classes=arr[:, 2 + 2 * dim].astype(np.int8) if n else np.zeros(0, dtype=np.int8),
        concentration=num(3 + 2 * dim) if n else np.zeros(0),
    )


def metrics_header(n_xi):
    return (
        ["step", "t", "dt", "cg_iterations", "eta"]
        + [f"xi_{k:02d}" for k in range(1, n_xi + 1)]
        + ["d_bar", "p_min", "p_max", "momentum_drift", "volume_proxy"]
    )


def metrics_row(info, n_xi):
    xi = list(info.xi) + [float("nan")] * (n_xi - len(info.xi))
    vals = [info.t, info.dt]
    out = [str(info.step)] + [_fmt(v) for v in vals] + [str(info.cg_iterations), _fmt(info.eta)]
    out += [_fmt(v) for v in xi[:n_xi]]
    out += [_fmt(v) for v in (info.d_bar, info.p_min, info.p_max,
                                info.momentum_drift, info.volume_proxy)]
    return out


class MetricsWriter:
    """Appends one CSV row per step; writes the comment block and header once."""

    def __init__(self, path, n_xi, constants=None):
        self.path = os.fspath(path)
        self.n_xi = n_xi
        self.last_t = None
        try:
            with open(self.path, "w", newline="", encoding="utf-8") as fh:
                for k, v in (constants or {}).items():
                    fh.write(f"# {k} = {_fmt(v)}\n")
                csv.writer(fh).writerow(metrics_header(n_xi))
        except OSError as exc:
            raise OSError(f"cannot write metrics {self.path}: {exc.strerror}") from exc

    def append(self, info):
        if self.last_t is not None and not info.t > self.last_t:
            raise ValueError("metrics rows must have strictly increasing t")
        self.last_t = info.t
        append_metrics(info, self.path, self.n_xi)


def append_metrics(info, path, n_xi):
    """Append a row to an existing metrics file (header written if absent)."""
    new = not os.path.exists(path)
    try:
        with open(path, "a", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(metrics_header(n_xi))
            w.writerow(metrics_row(info, n_xi))
    except OSError as exc:
        raise OSError(f"cannot append metrics {path}: {exc.strerror}") from exc


def read_metrics(path):
    """Metrics file as a dict of column name -> numpy array."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    header, body = rows[0], rows[1:]
    return {name: np.array([float(r[k]) for r in body]) for k, name in enumerate(header)}
