"""Three-stage experiment pipeline with reproducible on-disk artifacts.

A pipeline run executes any subset of simulate -> reconstruct-eigs ->
estimate-n from one configuration, writing every artifact as text
(dataset, indicator and peak CSVs, chain CSV, summary JSON) plus a
manifest of SHA-256 content hashes.  Identical configuration and seeds
give byte-identical artifacts.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .bayes import (
    ForwardMap,
    PosteriorSpec,
    RefractiveIndexModel,
    chain_summary,
    mh_sample,
)
from .fem import CoefficientField
from .forward import add_noise, read_dataset, simulate_cauchy_data, write_dataset
from .geometry import ScattererShape, make_scene
from .presets import Preset, get_preset
from .rg import complex_grid, detect_peaks, real_grid, sweep_indicator


class ConfigError(ValueError):
    """The pipeline configuration is malformed or inconsistent."""


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")


@dataclass
class PipelineConfig:
    """Everything one run needs; mirrors the flat config-file layout."""

    shape: str = "disc"
    coefficient: str = "constant 5"
    mesh_size: float = 0.05
    noise_level: float = 0.03
    noise_seed: int = 1
    grid: tuple = ("interval", -5.0, 5.0, 0.02)
    alpha: float = 1e-4
    z: tuple[float, float] = (0.2, 0.6)
    threshold: float = 3.0
    model: str = "constant"
    eigenvalues: tuple[complex, ...] = ()
    sigma2: float = 0.05
    samples: int = 3000
    mcmc_seed: int = 1
    gamma2: float = 2.4**2 / 2.0
    burn_in: float = 0.2
    stages: tuple[str, ...] = ("simulate", "reconstruct-eigs")
    output_dir: str = "out"

    def validate(self) -> None:
        known = ("simulate", "reconstruct-eigs", "estimate-n")
        for s in self.stages:
            if s not in known:
                raise ConfigError(f"unknown stage {s!r}")
        if self.shape not in ("disc", "square", "lshape"):
            raise ConfigError(f"unknown shape {self.shape!r}")
        if self.mesh_size <= 0:
            raise ConfigError("mesh_size must be positive")
        if not 0.0 <= self.noise_level < 1.0:
            raise ConfigError("noise_level must lie in [0, 1)")
        parse_coefficient(self.coefficient)  # raises on malformed text


def config_from_preset(preset: Preset | str, output_dir: str = "out") -> PipelineConfig:
    if isinstance(preset, str):
        preset = get_preset(preset)
    shared = {f.name for f in fields(PipelineConfig)} & {
        f.name for f in fields(Preset)
    }
    kwargs = {name: getattr(preset, name) for name in shared}
    kwargs["stages"] = preset.stages
    return PipelineConfig(output_dir=output_dir, **kwargs)


def parse_coefficient(text: str):
    """Parse "constant c", "radial b1 b2" or "complex re im"."""
    parts = text.split()
    try:
        kind, args = parts[0], [float(v) for v in parts[1:]]
    except (IndexError, ValueError):
        raise ConfigError(f"malformed coefficient {text!r}") from None
    expected = {"constant": 1, "radial": 2, "complex": 2}.get(kind)
    if expected is None or len(args) != expected:
        raise ConfigError(f"malformed coefficient {text!r}")
    return kind, args


def coefficient_field(text: str, shape: ScattererShape) -> CoefficientField:
    kind, args = parse_coefficient(text)
    if kind == "constant":
        return CoefficientField.constant(shape, args[0])
    if kind == "radial":
        return CoefficientField.radial_affine(shape, args[0], args[1])
    return CoefficientField.constant(shape, complex(args[0], args[1]))


# -- config file I/O ---------------------------------------------------

def _format_grid(grid) -> str:
    return " ".join(str(v) for v in grid)


def _parse_grid(text: str):
    parts = text.split()
    kind = parts[0]
    vals = [float(v) for v in parts[1:]]
    if (kind == "interval" and len(vals) == 3) or (kind == "rect" and len(vals) == 5):
        return (kind, *vals)
    raise ConfigError(f"malformed grid {text!r}")


def write_config(cfg: PipelineConfig, path) -> None:
    cp = configparser.ConfigParser()
    cp["scene"] = {
        "shape": cfg.shape,
        "coefficient": cfg.coefficient,
        "mesh_size": repr(cfg.mesh_size),
    }
    cp["simulate"] = {
        "noise_level": repr(cfg.noise_level),
        "noise_seed": str(cfg.noise_seed),
    }
    cp["rg"] = {
        "grid": _format_grid(cfg.grid),
        "alpha": repr(cfg.alpha),
        "z": f"{cfg.z[0]!r} {cfg.z[1]!r}",
        "threshold": repr(cfg.threshold),
    }
    cp["bayes"] = {
        "model": cfg.model,
        "eigenvalues": " ".join(_format_complex(v) for v in cfg.eigenvalues),
        "sigma2": repr(cfg.sigma2),
        "samples": str(cfg.samples),
        "mcmc_seed": str(cfg.mcmc_seed),
        "gamma2": repr(cfg.gamma2),
        "burn_in": repr(cfg.burn_in),
    }
    cp["run"] = {"stages": " ".join(cfg.stages), "output_dir": cfg.output_dir}
    with open(path, "w") as fh:
        cp.write(fh)


def read_config(path) -> PipelineConfig:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path}")
    cfg = PipelineConfig()
    try:
        get = cp.get
        kwargs = {}
        if cp.has_section("scene"):
            kwargs["shape"] = get("scene", "shape", fallback=cfg.shape)
            kwargs["coefficient"] = get("scene", "coefficient", fallback=cfg.coefficient)
            kwargs["mesh_size"] = cp.getfloat("scene", "mesh_size", fallback=cfg.mesh_size)
        if cp.has_section("simulate"):
            kwargs["noise_level"] = cp.getfloat(
                "simulate", "noise_level", fallback=cfg.noise_level
            )
            kwargs["noise_seed"] = cp.getint("simulate", "noise_seed", fallback=cfg.noise_seed)
        if cp.has_section("rg"):
            kwargs["grid"] = _parse_grid(get("rg", "grid", fallback=_format_grid(cfg.grid)))
            kwargs["alpha"] = cp.getfloat("rg", "alpha", fallback=cfg.alpha)
            z = get("rg", "z", fallback=None)
            if z is not None:
                kwargs["z"] = tuple(float(v) for v in z.split())
            kwargs["threshold"] = cp.getfloat("rg", "threshold", fallback=cfg.threshold)
        if cp.has_section("bayes"):
            kwargs["model"] = get("bayes", "model", fallback=cfg.model)
            ev = get("bayes", "eigenvalues", fallback="")
            kwargs["eigenvalues"] = tuple(complex(v) for v in ev.split())
            kwargs["sigma2"] = cp.getfloat("bayes", "sigma2", fallback=cfg.sigma2)
            kwargs["samples"] = cp.getint("bayes", "samples", fallback=cfg.samples)
            kwargs["mcmc_seed"] = cp.getint("bayes", "mcmc_seed", fallback=cfg.mcmc_seed)
            kwargs["gamma2"] = cp.getfloat("bayes", "gamma2", fallback=cfg.gamma2)
            kwargs["burn_in"] = cp.getfloat("bayes", "burn_in", fallback=cfg.burn_in)
        if cp.has_section("run"):
            kwargs["stages"] = tuple(get("run", "stages", fallback=" ".join(cfg.stages)).split())
            kwargs["output_dir"] = get("run", "output_dir", fallback=cfg.output_dir)
    except ValueError as exc:
        raise ConfigError(f"malformed config value: {exc}") from None
    out = replace(cfg, **kwargs)
    out.validate()
    return out


# -- artifact writers --------------------------------------------------

def _format_complex(v: complex) -> str:
    v = complex(v)
    return f"{v.real!r}{v.imag:+}j".replace("+-", "-") if v.imag else repr(v.real)


def write_indicator_csv(fld, path) -> None:
    lines = ["re_lambda,im_lambda,g_norm,valid"]
    for lam, val, ok in zip(fld.lambdas, fld.values, fld.valid):
        lines.append(f"{float(lam.real)!r},{float(lam.imag)!r},{float(val)!r},{int(ok)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_peaks_csv(fld, peaks, path) -> None:
    norms = []
    for lam in peaks.eigenvalues:
        i = int(np.argmin(np.abs(fld.lambdas - lam)))
        norms.append(fld.values[i])
    lines = ["re_lambda,im_lambda,g_norm"]
    for lam, norm in zip(peaks.eigenvalues, norms):
        lines.append(f"{float(lam.real)!r},{float(lam.imag)!r},{float(norm)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_peaks_csv(path) -> np.ndarray:
    lines = Path(path).read_text().strip().splitlines()
    if not lines or not lines[0].startswith("re_lambda"):
        raise ConfigError(f"{path} is not a peaks CSV")
    vals = []
    for line in lines[1:]:
        re_l, im_l = line.split(",")[:2]
        vals.append(complex(float(re_l), float(im_l)))
    return np.asarray(vals, dtype=complex)


def write_eigs_csv(eigenset, path) -> None:
    lines = ["re_lambda,im_lambda,residual,method"]
    residuals = (
        eigenset.residuals
        if eigenset.residuals is not None
        else np.zeros(len(eigenset))
    )
    for lam, res in zip(eigenset.eigenvalues, residuals):
        lines.append(f"{float(lam.real)!r},{float(lam.imag)!r},{float(res)!r},{eigenset.method}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_chain_csv(chain, names, path) -> None:
    lines = ["index," + ",".join(names) + ",accepted,log_post"]
    for i, (row, acc, lp) in enumerate(zip(chain.samples, chain.accepted, chain.log_posts)):
        vals = ",".join(repr(float(v)) for v in row)
        lines.append(f"{i},{vals},{int(acc)},{float(lp)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_summary_json(summary, names, path) -> None:
    doc = {
        "cm": dict(zip(names, [float(v) for v in summary.cm])),
        "acceptance_rate": float(summary.acceptance_rate),
        "burn_in": int(summary.burn_in),
        "histograms": {
            name: {
                "counts": [int(c) for c in counts],
                "edges": [float(e) for e in edges],
            }
            for name, (counts, edges) in zip(names, summary.histograms)
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# -- stage drivers -----------------------------------------------------

def run_pipeline(cfg: PipelineConfig) -> dict:
    """Execute the configured stages; return the written manifest.

    The manifest maps each artifact name to its SHA-256 hash and is
    itself written as ``manifest.json`` in the output directory.  A
    stage either consumes the in-memory product of the previous stage
    or, when run in isolation, the corresponding file from an earlier
    run in the same directory.
    """
    cfg.validate()
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    shape = ScattererShape.from_name(cfg.shape)
    scene = make_scene(shape)
    produced: list[Path] = []
    data = None
    peaks = None

    if "simulate" in cfg.stages:
        try:
            n_field = coefficient_field(cfg.coefficient, shape)
            data = simulate_cauchy_data(shape, n_field, scene, cfg.mesh_size)
            if cfg.noise_level > 0:
                data = add_noise(data, cfg.noise_level, cfg.noise_seed)
            write_dataset(data, outdir / "dataset.txt")
            produced.append(outdir / "dataset.txt")
        except (ConfigError, OSError):
            raise
        except Exception as exc:
            raise StageError("simulate", exc) from exc

    if "reconstruct-eigs" in cfg.stages:
        try:
            if data is None:
                data = read_dataset(outdir / "dataset.txt")
            grid_kind, *grid_args = cfg.grid
            grid = real_grid(*grid_args) if grid_kind == "interval" else complex_grid(*grid_args)
            fld = sweep_indicator(data, grid, z=cfg.z, alpha=cfg.alpha)
            peaks = detect_peaks(fld, threshold=cfg.threshold)
            write_indicator_csv(fld, outdir / "indicator.csv")
            write_peaks_csv(fld, peaks, outdir / "peaks.csv")
            produced += [outdir / "indicator.csv", outdir / "peaks.csv"]
        except FileNotFoundError as exc:
            raise ConfigError(f"reconstruct-eigs needs a dataset: {exc}") from exc
        except Exception as exc:
            raise StageError("reconstruct-eigs", exc) from exc

    if "estimate-n" in cfg.stages:
        try:
            if cfg.eigenvalues:
                measured = np.asarray(cfg.eigenvalues, dtype=complex)
            elif peaks is not None:
                measured = peaks.eigenvalues
            else:
                measured = read_peaks_csv(outdir / "peaks.csv")
            if len(measured) == 0:
                raise ConfigError("estimate-n has no eigenvalues to work with")
            model = RefractiveIndexModel.from_name(cfg.model)
            forward = ForwardMap(model, shape, scene, measured)
            spec = PosteriorSpec(
                measured=measured, sigma2=cfg.sigma2, model=model, forward=forward
            )
            chain = mh_sample(spec, n_samples=cfg.samples, seed=cfg.mcmc_seed, gamma2=cfg.gamma2)
            summary = chain_summary(chain, burn_in=cfg.burn_in)
            names = model.parameter_names
            write_chain_csv(chain, names, outdir / "chain.csv")
            write_summary_json(summary, names, outdir / "summary.json")
            produced += [outdir / "chain.csv", outdir / "summary.json"]
        except FileNotFoundError as exc:
            raise ConfigError(f"estimate-n needs peaks or eigenvalues: {exc}") from exc
        except ConfigError:
            raise
        except Exception as exc:
            raise StageError("estimate-n", exc) from exc

    manifest = {p.name: _sha256(p) for p in sorted(produced)}
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return manifest
