"""Run configuration: presets, flat key-value config files and validation.

Config files are flat TOML with dotted keys, e.g.::

    name = "ad1d"
    problem.lengths = [1.0]
    problem.alpha = [1.0]
    problem.kappa = 0.005
    enrichment.family = "hb"
    bc.mode = "strong"
"""

from dataclasses import dataclass, replace

import numpy as np
import tomli

from gfemad.basis import EnrichmentSpec, normalize_family
from gfemad.continuation import ContinuationPlan
from gfemad.diagnostics import element_peclet, exact_1d, kappa_for_peclet
from gfemad.errors import ConfigError, GfemError, ModeConflictError
from gfemad.mesh import build_interval_mesh, build_quad_mesh, select_enriched_nodes
from gfemad.problem import ProblemSpec
from gfemad.solve import BcMode

AD1D_KAPPAS = (0.5, 0.05, 0.005, 0.001)
ALL_EDGES = ("left", "right", "bottom", "top")

SCHEMA = {
    "name": str,
    "problem.lengths": list,
    "problem.alpha": (list, str),
    "problem.kappa": (int, float),
    "problem.source": (int, float),
    "problem.kappa_sweep": list,
    "problem.dirichlet": list,
    "problem.neumann": list,
    "mesh.elements": list,
    "enrichment.family": str,
    "enrichment.tags": list,
    "enrichment.gamma": (int, float),
    "enrichment.axis": int,
    "enrichment.flat_tol": (int, float),
    "bc.mode": str,
    "bc.lambda": (int, float),
    "continuation.pe_start": (int, float),
    "continuation.pe_end": (int, float),
    "continuation.n_steps": int,
    "output.dir": str,
    "output.emit_tau": bool,
    "output.cut_lines": list,
    "output.samples": int,
}


@dataclass(frozen=True)
class RunConfig:
    name: str
    problem: ProblemSpec
    elements: tuple
    family: str = "none"
    tags: tuple = ()
    gamma: float = None  # None: derived from alpha and kappa
    axis: int = 0
    flat_tol: float = None
    bc_mode: str = "strong"
    penalty: float = None
    continuation: tuple = None  # (pe_start, pe_end, n_steps)
    out_dir: str = "out"
    emit_tau: bool = False
    cut_lines: tuple = ()
    samples: int = 200
    kappa_sweep: tuple = ()  # non-empty: one run per kappa

    def __post_init__(self):
        object.__setattr__(self, "kappa_sweep", tuple(float(k) for k in self.kappa_sweep))
        object.__setattr__(self, "family", normalize_family(self.family))
        object.__setattr__(self, "elements", tuple(int(n) for n in self.elements))
        object.__setattr__(self, "tags", tuple(self.tags))
        object.__setattr__(self, "cut_lines", tuple(float(c) for c in self.cut_lines))
        if self.continuation is not None:
            a, b, n = self.continuation
            object.__setattr__(self, "continuation", (float(a), float(b), int(n)))

    # -- derived objects

    @property
    def dim(self):
        return self.problem.dim

    def build_mesh(self):
        if self.dim == 1:
            return build_interval_mesh(self.problem.lengths[0], self.elements[0])
        return build_quad_mesh(*self.problem.lengths, *self.elements)

    def bc(self):
        if self.bc_mode == "weak":
            return BcMode.weak(self.penalty)
        return BcMode.strong()

    def h(self):
        return max(L / n for L, n in zip(self.problem.lengths, self.elements))

    def speed(self):
        return self.problem.max_speed()

    def element_peclet(self):
        return element_peclet(self.speed(), self.h(), self.problem.kappa)

    def resolved_gamma(self):
        if self.gamma is not None:
            return float(self.gamma)
        return default_gamma(self.problem, self.family, self.axis)

    def enriched_nodes(self, mesh):
        return select_enriched_nodes(mesh, self.tags) if self.tags else frozenset()

    def enrichment_spec(self, mesh):
        if self.family in ("none", "GlobalLocalField"):
            return EnrichmentSpec.none()
        return EnrichmentSpec(self.family, self.resolved_gamma(), self.enriched_nodes(mesh), axis=self.axis)

    def plan(self):
        if self.continuation is None:
            return None
        a, b, n = self.continuation
        return ContinuationPlan(pe_end=b, pe_start=a, n_steps=n)

    def exact(self):
        """Exact solution callable when the problem is the unit-interval benchmark, else None."""
        p = self.problem
        zero_ends = sorted(t for t, v in p.dirichlet if v == 0.0) == ["left", "right"]
        if p.dim == 1 and p.lengths == (1.0,) and zero_ends and not p.neumann and not isinstance(p.alpha, str):
            a, k, f = p.alpha[0], p.kappa, p.source

            def u(points):
                return f * exact_1d(a, k, np.asarray(points, dtype=float).reshape(-1))

            return u
        return None

    def validate(self):
        if self.bc_mode not in ("strong", "weak"):
            raise ConfigError(f"bc.mode must be 'strong' or 'weak', got {self.bc_mode!r}")
        if self.bc_mode == "weak" and not (self.penalty is not None and self.penalty > 0):
            raise ConfigError("bc.lambda must be positive for weak enforcement")
        if self.bc_mode == "strong" and self.family == "Ha":
            raise ModeConflictError("enrichment.family = Ha cannot be combined with bc.mode = strong")
        if len(self.elements) != self.dim or any(n < 1 for n in self.elements):
            raise ConfigError("mesh.elements needs one positive count per dimension")
        if self.family == "GlobalLocalField" and self.continuation is None:
            raise ConfigError("global-local enrichment needs continuation.pe_end")
        if any(not k > 0 for k in self.kappa_sweep):
            raise ConfigError("kappa must be positive (problem.kappa_sweep)")
        if self.family not in ("none",) and not self.tags:
            raise ConfigError("enrichment.tags must name at least one boundary")
        try:
            mesh = self.build_mesh()
            for t in self.tags:
                mesh.resolve_tag(t)
            for t, _ in self.problem.dirichlet + self.problem.neumann:
                mesh.resolve_tag(t)
            if self.continuation is not None:
                self.plan()
            if self.family not in ("none", "GlobalLocalField"):
                self.enrichment_spec(mesh)
        except ModeConflictError:
            raise
        except GfemError as exc:
            raise ConfigError(str(exc)) from None
        return self


def default_gamma(problem, family, axis=0):
    """gamma = alpha/kappa along the enrichment coordinate(s)."""
    if problem.dim == 1:
        return problem.max_speed() / problem.kappa
    grids = [np.linspace(0, L, 33) for L in problem.lengths]
    pts = np.array(np.meshgrid(*grids, indexing="ij")).reshape(problem.dim, -1).T
    a = np.abs(problem.velocity(pts))
    if family == "Hb2":
        return float(a.max()) / problem.kappa
    return float(a[:, axis].max()) / problem.kappa


# ------------------------------------------------------------- presets


def _ad1d(kappa=0.005):
    return RunConfig(
        name="ad1d",
        problem=ProblemSpec((1.0,), (1.0,), kappa, 1.0, (("left", 0.0), ("right", 0.0))),
        elements=(6,),
        family="Hb",
        tags=("right",),
        bc_mode="strong",
        kappa_sweep=AD1D_KAPPAS,
    )


def _ad2d_problem(pe, n=10):
    speed = 1.0
    direction = np.array([1.0, 1.0]) / np.sqrt(2.0)
    kappa = kappa_for_peclet(speed, 1.0 / n, pe)
    return ProblemSpec((1.0, 1.0), tuple(speed * direction), kappa, 1.0, tuple((t, 0.0) for t in ALL_EDGES))


def _ad2d_square():
    return RunConfig(
        name="ad2d_square",
        problem=_ad2d_problem(35.0),
        elements=(10, 10),
        family="Hb2",
        tags=("right", "top"),
        bc_mode="weak",
        penalty=1e6,
        cut_lines=(0.5,),
    )


def _ad1d_gl():
    return RunConfig(
        name="ad1d_gl",
        problem=ProblemSpec((1.0,), (1.0,), kappa_for_peclet(1.0, 1 / 6, 3.0), 1.0, (("left", 0.0), ("right", 0.0))),
        elements=(6,),
        family="GlobalLocalField",
        tags=("right",),
        bc_mode="strong",
        continuation=(1.0, 3.0, 8),
    )


def _ad2d_gl():
    return RunConfig(
        name="ad2d_gl",
        problem=_ad2d_problem(7.0),
        elements=(10, 10),
        family="GlobalLocalField",
        tags=("right", "top"),
        bc_mode="weak",
        penalty=1e6,
        continuation=(1.0, 7.0, 8),
        cut_lines=(0.5,),
    )


def _thermal_bl():
    return RunConfig(
        name="thermal_bl",
        problem=ProblemSpec(
            (1.0, 1.0),
            "couette",
            1.0 / 700.0,
            0.0,
            (("top", 1.0), ("left", 0.0), ("bottom", 0.0), ("right", 0.0)),
        ),
        elements=(14, 14),
        family="Hc",
        tags=("right",),
        axis=0,
        bc_mode="weak",
        penalty=1e10,
        cut_lines=(0.75, 0.5),
    )


PRESETS = {
    "ad1d": _ad1d,
    "ad2d_square": _ad2d_square,
    "ad1d_gl": _ad1d_gl,
    "ad2d_gl": _ad2d_gl,
    "thermal_bl": _thermal_bl,
}


def preset(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}")
    return PRESETS[name]()


# ----------------------------------------------------------- overrides


def with_overrides(cfg, kappa=None, pe_target=None, lam=None, bc=None, enrichment=None, out=None, emit_tau=None):
    """Apply CLI-style overrides and revalidate."""
    if enrichment is not None:
        fam = normalize_family(enrichment)
        cont = cfg.continuation
        if fam == "GlobalLocalField" and cont is None:
            cont = (1.0, cfg.element_peclet(), 8)
        elif fam != "GlobalLocalField":
            cont = None
        cfg = replace(cfg, family=fam, continuation=cont, gamma=None)
    if kappa is not None or pe_target is not None:
        cfg = replace(cfg, kappa_sweep=())
    if kappa is not None:
        cfg = replace(cfg, problem=cfg.problem.with_kappa(kappa), gamma=None)
        if cfg.continuation is not None:
            a, _, n = cfg.continuation
            cfg = replace(cfg, continuation=(a, cfg.element_peclet(), n))
    if pe_target is not None:
        k = kappa_for_peclet(cfg.speed(), cfg.h(), pe_target)
        cfg = replace(cfg, problem=cfg.problem.with_kappa(k), gamma=None)
        if cfg.continuation is not None:
            a, _, n = cfg.continuation
            cfg = replace(cfg, continuation=(a, float(pe_target), n))
    if bc is not None:
        cfg = replace(cfg, bc_mode=bc)
        if bc == "weak" and cfg.penalty is None:
            cfg = replace(cfg, penalty=1e10)
    if lam is not None:
        cfg = replace(cfg, penalty=float(lam))
    if out is not None:
        cfg = replace(cfg, out_dir=str(out))
    if emit_tau is not None:
        cfg = replace(cfg, emit_tau=bool(emit_tau))
    return cfg.validate()


# -------------------------------------------------------- config files


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def parse_config_text(text, source="<config>"):
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: parse error: {exc}") from None
    flat = _flatten(raw)
    unknown = sorted(set(flat) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"{source}: unknown keys: {', '.join(unknown)}")
    for k, v in flat.items():
        if isinstance(v, bool) and SCHEMA[k] is not bool:
            raise ConfigError(f"{source}: {k} has the wrong type")
        if not isinstance(v, SCHEMA[k]):
            raise ConfigError(f"{source}: {k} has the wrong type")
    for k in ("problem.lengths", "problem.alpha", "problem.kappa", "mesh.elements"):
        if k not in flat:
            raise ConfigError(f"{source}: missing required key {k}")
    kappa = flat["problem.kappa"]
    if not kappa > 0:
        raise ConfigError(f"{source}: kappa must be positive")
    try:
        problem = ProblemSpec(
            lengths=tuple(flat["problem.lengths"]),
            alpha=flat["problem.alpha"],
            kappa=float(kappa),
            source=float(flat.get("problem.source", 1.0)),
            dirichlet=tuple(tuple(p) for p in flat.get("problem.dirichlet", [])),
            neumann=tuple(tuple(p) for p in flat.get("problem.neumann", [])),
        )
    except (GfemError, TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from None
    cont = None
    if "continuation.pe_end" in flat:
        cont = (
            flat.get("continuation.pe_start", 1.0),
            flat["continuation.pe_end"],
            flat.get("continuation.n_steps", 8),
        )
    elif any(k.startswith("continuation.") for k in flat):
        raise ConfigError(f"{source}: continuation.pe_end is required when continuation keys are given")
    try:
        cfg = RunConfig(
            name=flat.get("name", "custom"),
            problem=problem,
            elements=tuple(flat["mesh.elements"]),
            family=flat.get("enrichment.family", "none"),
            tags=tuple(flat.get("enrichment.tags", ())),
            gamma=flat.get("enrichment.gamma"),
            axis=flat.get("enrichment.axis", 0),
            flat_tol=flat.get("enrichment.flat_tol"),
            bc_mode=flat.get("bc.mode", "strong"),
            penalty=flat.get("bc.lambda"),
            continuation=cont,
            out_dir=flat.get("output.dir", "out"),
            emit_tau=flat.get("output.emit_tau", False),
            cut_lines=tuple(flat.get("output.cut_lines", ())),
            samples=flat.get("output.samples", 200),
            kappa_sweep=tuple(flat.get("problem.kappa_sweep", ())),
        )
    except GfemError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return cfg.validate()


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_config_text(text, str(path))


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def dump_config(cfg):
    """Flat config text that load_config maps back to an equal RunConfig."""
    p = cfg.problem
    items = [
        ("name", cfg.name),
        ("problem.lengths", list(p.lengths)),
        ("problem.alpha", p.alpha if isinstance(p.alpha, str) else list(p.alpha)),
        ("problem.kappa", p.kappa),
        ("problem.source", p.source),
        ("problem.kappa_sweep", list(cfg.kappa_sweep) or None),
        ("problem.dirichlet", [list(d) for d in p.dirichlet]),
        ("problem.neumann", [list(d) for d in p.neumann]),
        ("mesh.elements", list(cfg.elements)),
        ("enrichment.family", cfg.family),
        ("enrichment.tags", list(cfg.tags)),
        ("enrichment.gamma", cfg.gamma),
        ("enrichment.axis", cfg.axis),
        ("enrichment.flat_tol", cfg.flat_tol),
        ("bc.mode", cfg.bc_mode),
        ("bc.lambda", cfg.penalty),
    ]
    if cfg.continuation is not None:
        a, b, n = cfg.continuation
        items += [("continuation.pe_start", a), ("continuation.pe_end", b), ("continuation.n_steps", n)]
    items += [
        ("output.dir", cfg.out_dir),
        ("output.emit_tau", cfg.emit_tau),
        ("output.cut_lines", list(cfg.cut_lines)),
        ("output.samples", cfg.samples),
    ]
    return "".join(f"{k} = {_toml_value(v)}\n" for k, v in items if v is not None)
