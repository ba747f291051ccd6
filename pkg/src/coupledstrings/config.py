"""TOML run configuration.

Sections (all optional except [run] mode-specific needs; eps must come from
[physical] or the sweep list):

    [physical]  eps, k1, k2, a, b, omega_u, omega_v
    [flux]      f = "u*v"            # expression or alias; "0" disables
    [profiles.u0]  kind, amplitude, scale, shift
    [profiles.phi] kind, amplitude, scale, shift
    [grid]      n, length, m, zeta_length      # omitted values are auto-sized
    [time]      t_end, dt, output_times
    [run]       mode, out_dir, eps_list, consistent, threads,
                speed_convention ("dispersion" | "mean"), kdv_flux
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .exceptions import ConfigError, SimulationError
from .fluxexpr import FluxExpr, parse_flux
from .profiles import Profile

MODES = ("solve-full", "solve-kdv", "assemble", "compare", "sweep", "diagnose-fast-mode")

_DEFAULTS = {
    "k1": 1.0,
    "k2": 2.0,
    "a": 1.0,
    "b": 1.0,
    "omega_u": 10.0,
    "omega_v": 10.0,
    "flux": "u*v",
    "t_end": 0.5,
    "mode": "solve-full",
}

_KNOWN = {
    "physical": {"eps", "k1", "k2", "a", "b", "omega_u", "omega_v"},
    "flux": {"f"},
    "profiles": {"u0", "phi"},
    "grid": {"n", "length", "m", "zeta_length"},
    "time": {"t_end", "dt", "output_times"},
    "run": {"mode", "out_dir", "eps_list", "consistent", "threads",
            "speed_convention", "kdv_flux"},
}


@dataclass(frozen=True)
class RunConfig:
    eps: float
    k1: float
    k2: float
    a: float
    b: float
    omega_u: float
    omega_v: float
    flux_source: str
    flux: FluxExpr
    u0: Profile
    phi: Profile
    t_end: float
    dt: float | None = None
    output_times: tuple = ()
    n: int | None = None
    length: float | None = None
    m: int | None = None
    zeta_length: float | None = None
    mode: str = "solve-full"
    out_dir: str = "out"
    eps_list: tuple = ()
    consistent: bool = True
    threads: int = 1
    speed_convention: str = "dispersion"
    kdv_flux: bool = True

    def with_eps(self, eps: float) -> "RunConfig":
        return replace(self, eps=float(eps))


def _check_keys(table: dict, section: str):
    known = _KNOWN[section]
    for key in table:
        if key not in known:
            raise ConfigError(f"unknown key {section}.{key!r}")


def _profile(table: dict, name: str) -> Profile:
    extra = set(table) - {"kind", "amplitude", "scale", "shift"}
    if extra:
        raise ConfigError(f"unknown key profiles.{name}.{extra.pop()!r}")
    try:
        return Profile(
            kind=table.get("kind", "zero"),
            amplitude=float(table.get("amplitude", 1.0)),
            scale=float(table.get("scale", 1.0)),
            shift=float(table.get("shift", 0.0)),
        )
    except SimulationError as exc:
        raise ConfigError(f"profiles.{name}: {exc}") from exc


def build_config(raw: dict) -> RunConfig:
    for section in raw:
        if section not in _KNOWN:
            raise ConfigError(f"unknown section [{section}]")
        if section != "profiles":
            _check_keys(raw[section], section)

    phys = raw.get("physical", {})
    run = raw.get("run", {})
    eps_list = tuple(float(e) for e in run.get("eps_list", ()))
    if "eps" in phys:
        eps = float(phys["eps"])
    elif eps_list:
        eps = eps_list[0]
    else:
        raise ConfigError("physical.eps is required (or run.eps_list for sweeps)")

    flux_source = str(raw.get("flux", {}).get("f", _DEFAULTS["flux"]))
    try:
        flux = parse_flux(flux_source)
    except SimulationError as exc:
        raise ConfigError(f"flux.f: {exc}") from exc

    profiles = raw.get("profiles", {})
    for key in profiles:
        if key not in _KNOWN["profiles"]:
            raise ConfigError(f"unknown key profiles.{key!r}")
    u0 = _profile(profiles.get("u0", {"kind": "sech2"}), "u0")
    phi = _profile(profiles.get("phi", {"kind": "zero"}), "phi")

    timing = raw.get("time", {})
    grid = raw.get("grid", {})
    mode = str(run.get("mode", _DEFAULTS["mode"]))
    if mode not in MODES:
        raise ConfigError(f"run.mode must be one of {MODES}, got {mode!r}")
    speed = str(run.get("speed_convention", "dispersion"))
    if speed not in ("dispersion", "mean"):
        raise ConfigError(f"run.speed_convention must be 'dispersion' or 'mean', got {speed!r}")
    threads = int(run.get("threads", 1))
    if threads < 1:
        raise ConfigError(f"run.threads must be >= 1, got {threads}")

    t_end = float(timing.get("t_end", _DEFAULTS["t_end"]))
    if t_end < 0:
        raise ConfigError(f"time.t_end must be >= 0, got {t_end}")
    output_times = tuple(float(t) for t in timing.get("output_times", ()))

    return RunConfig(
        eps=eps,
        k1=float(phys.get("k1", _DEFAULTS["k1"])),
        k2=float(phys.get("k2", _DEFAULTS["k2"])),
        a=float(phys.get("a", _DEFAULTS["a"])),
        b=float(phys.get("b", _DEFAULTS["b"])),
        omega_u=float(phys.get("omega_u", _DEFAULTS["omega_u"])),
        omega_v=float(phys.get("omega_v", _DEFAULTS["omega_v"])),
        flux_source=flux_source,
        flux=flux,
        u0=u0,
        phi=phi,
        t_end=t_end,
        dt=float(timing["dt"]) if "dt" in timing else None,
        output_times=output_times,
        n=int(grid["n"]) if "n" in grid else None,
        length=float(grid["length"]) if "length" in grid else None,
        m=int(grid["m"]) if "m" in grid else None,
        zeta_length=float(grid["zeta_length"]) if "zeta_length" in grid else None,
        mode=mode,
        out_dir=str(run.get("out_dir", "out")),
        eps_list=eps_list,
        consistent=bool(run.get("consistent", True)),
        threads=threads,
        speed_convention=speed,
        kdv_flux=bool(run.get("kdv_flux", True)),
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from exc
    return build_config(raw)
