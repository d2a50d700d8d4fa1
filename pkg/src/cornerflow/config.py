"""Run configuration: JSON schema, strict validation, builders.

A run file looks like

    {
      "domain": {"kind": "exterior", "map_id": "exterior_segment",
                 "parameters": {}},
      "patch": {"shape": "disk", "center": [0.0, 1.5], "size": 0.3,
                "omega0": -1.0, "profile": "uniform", "h": 0.05},
      "gamma0": 1.0,
      "t_final": 5.0,
      "dt": "auto",
      "output_stride": 10,
      "tracked": [0],
      "seed": 1234,
      "twin": {"mode": "jitter", "epsilon": 1e-6}
    }

Unknown keys are rejected at every level so typos fail loudly; ParseError
covers malformed JSON and ValidationError schema violations.
"""

from __future__ import annotations

import dataclasses
import json
import numbers
from pathlib import Path
from typing import Optional, Union

from .biot_savart import CirculationSpec
from .conformal import DomainSpec
from .errors import ParseError, ValidationError
from .transport import PatchSpec, patch_init

__all__ = ["TwinSpec", "RunConfig", "parse_config"]

_TWIN_MODES = ("identical", "jitter", "refine")


@dataclasses.dataclass(frozen=True)
class TwinSpec:
    mode: str = "jitter"
    epsilon: float = 1e-6


@dataclasses.dataclass(frozen=True)
class RunConfig:
    domain: DomainSpec
    patch: PatchSpec
    t_final: float
    gamma0: float = 0.0
    dt: Union[str, float] = "auto"
    output_stride: int = 10
    tracked: tuple = ()
    seed: int = 0
    probe_rho: Optional[float] = None
    twin: Optional[TwinSpec] = None
    raw: Optional[dict] = None

    def build(self):
        """(map, ensemble, circulation spec) ready for simulate()."""
        cmap = self.domain.build()
        ens = patch_init(cmap, self.patch)
        circ = CirculationSpec.for_domain(self.domain.kind, self.gamma0, ens)
        return cmap, ens, circ


def _check_keys(d: dict, allowed, required, where: str):
    unknown = sorted(set(d) - set(allowed))
    if unknown:
        raise ValidationError(f"unknown key(s) {unknown} in {where}")
    missing = sorted(set(required) - set(d))
    if missing:
        raise ValidationError(f"missing key(s) {missing} in {where}")


def _number(value, where: str, *, positive=False, nonnegative=False) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValidationError(f"{where} must be a number, got {value!r}")
    v = float(value)
    if positive and not v > 0.0:
        raise ValidationError(f"{where} must be > 0")
    if nonnegative and v < 0.0:
        raise ValidationError(f"{where} must be >= 0")
    return v


def _point(value, where: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or any(isinstance(c, bool) or not isinstance(c, numbers.Real) for c in value)
    ):
        raise ValidationError(f"{where} must be an [x, y] pair of numbers")
    return complex(float(value[0]), float(value[1]))


def _parse_domain(d) -> DomainSpec:
    if not isinstance(d, dict):
        raise ValidationError("domain must be an object")
    _check_keys(d, ("kind", "map_id", "parameters"), ("kind", "map_id"), "domain")
    kind = d["kind"]
    if kind not in ("exterior", "interior"):
        raise ValidationError(f"domain.kind must be exterior or interior, got {kind!r}")
    map_id = d["map_id"]
    if not isinstance(map_id, str):
        raise ValidationError("domain.map_id must be a string")
    params = d.get("parameters", {})
    if not isinstance(params, dict):
        raise ValidationError("domain.parameters must be an object")
    for k, v in params.items():
        if isinstance(v, bool) or not isinstance(v, numbers.Real):
            raise ValidationError(f"domain.parameters[{k!r}] must be a number")
    return DomainSpec(kind=kind, map_id=map_id, parameters=dict(params))


def _parse_patch(d) -> PatchSpec:
    if not isinstance(d, dict):
        raise ValidationError("patch must be an object")
    allowed = ("shape", "center", "size", "omega0", "profile", "h", "inner")
    _check_keys(d, allowed, ("shape", "center", "size", "omega0", "h"), "patch")
    spec = PatchSpec(
        shape=d["shape"] if isinstance(d["shape"], str) else "",
        center=_point(d["center"], "patch.center"),
        size=_number(d["size"], "patch.size", positive=True),
        omega0=_number(d["omega0"], "patch.omega0"),
        h=_number(d["h"], "patch.h", positive=True),
        profile=d.get("profile", "uniform"),
        inner=(
            _number(d["inner"], "patch.inner", nonnegative=True)
            if "inner" in d
            else None
        ),
    )
    spec.validate()
    return spec


def _parse_twin(d) -> TwinSpec:
    if not isinstance(d, dict):
        raise ValidationError("twin must be an object")
    _check_keys(d, ("mode", "epsilon"), ("mode",), "twin")
    mode = d["mode"]
    if mode not in _TWIN_MODES:
        raise ValidationError(f"twin.mode must be one of {_TWIN_MODES}, got {mode!r}")
    eps = _number(d.get("epsilon", 1e-6), "twin.epsilon", positive=True)
    return TwinSpec(mode=mode, epsilon=eps)


def parse_config(source) -> RunConfig:
    """Parse a config from a path, a JSON string, or an already-loaded dict."""
    if isinstance(source, dict):
        data = source
    else:
        if isinstance(source, Path) or (
            isinstance(source, str) and not source.lstrip().startswith("{")
        ):
            try:
                text = Path(source).read_text()
            except OSError as exc:
                raise ParseError(f"cannot read config file {source!r}: {exc}") from exc
        else:
            text = source
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config root must be a JSON object")

    allowed = (
        "domain", "patch", "gamma0", "t_final", "dt", "output_stride",
        "tracked", "seed", "probe_rho", "twin",
    )
    _check_keys(data, allowed, ("domain", "patch", "t_final"), "config")

    domain = _parse_domain(data["domain"])
    patch = _parse_patch(data["patch"])
    t_final = _number(data["t_final"], "t_final", nonnegative=True)
    gamma0 = _number(data.get("gamma0", 0.0), "gamma0")

    dt = data.get("dt", "auto")
    if dt != "auto":
        dt = _number(dt, "dt", positive=True)

    stride_raw = data.get("output_stride", 10)
    if isinstance(stride_raw, bool) or not isinstance(stride_raw, numbers.Integral):
        raise ValidationError("output_stride must be an integer")
    stride = int(stride_raw)
    if stride < 1:
        raise ValidationError("output_stride must be >= 1")

    tracked_raw = data.get("tracked", [])
    if not isinstance(tracked_raw, (list, tuple)):
        raise ValidationError("tracked must be a list of particle indices")
    tracked = []
    for i in tracked_raw:
        if isinstance(i, bool) or not isinstance(i, numbers.Integral) or int(i) < 0:
            raise ValidationError(f"tracked index {i!r} must be a non-negative integer")
        tracked.append(int(i))

    seed_raw = data.get("seed", 0)
    if isinstance(seed_raw, bool) or not isinstance(seed_raw, numbers.Integral):
        raise ValidationError("seed must be an integer")

    probe_rho = (
        _number(data["probe_rho"], "probe_rho", positive=True)
        if "probe_rho" in data
        else None
    )
    twin = _parse_twin(data["twin"]) if "twin" in data else None

    # the domain must exist before the patch can be validated against it
    domain.build()

    return RunConfig(
        domain=domain,
        patch=patch,
        t_final=t_final,
        gamma0=gamma0,
        dt=dt,
        output_stride=stride,
        tracked=tuple(tracked),
        seed=int(seed_raw),
        probe_rho=probe_rho,
        twin=twin,
        raw=data,
    )
