"""Command-line interface for the reconstruction pipeline.

Subcommands mirror the pipeline stages (`simulate`, `reconstruct-eigs`,
`estimate-n`), plus `eigs` for direct eigenvalue computation, `run` for
the chained pipeline, and `presets` to list the benchmark scenes.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .eigensolver import SearchRegion, SteklovPencil, bessel_oracle_eigenvalues, schur_dense_eigenvalues, sim_eigenvalues
from .fem import assemble
from .geometry import ScattererShape, generate_mesh, interior_submesh, make_scene
from .pipeline import (
    ConfigError,
    PipelineConfig,
    StageError,
    coefficient_field,
    config_from_preset,
    parse_coefficient,
    read_config,
    run_pipeline,
    write_eigs_csv,
)
from .presets import get_preset, list_presets

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _base_config(args) -> PipelineConfig:
    """Resolve --config / --preset and apply per-flag overrides."""
    if getattr(args, "config", None):
        cfg = read_config(args.config)
    elif getattr(args, "preset", None):
        cfg = config_from_preset(get_preset(args.preset))
    else:
        cfg = PipelineConfig()
    overrides = {}
    if getattr(args, "out", None):
        overrides["output_dir"] = args.out
    if getattr(args, "shape", None):
        overrides["shape"] = args.shape
    if getattr(args, "coefficient", None):
        overrides["coefficient"] = args.coefficient
    if getattr(args, "mesh_size", None) is not None:
        overrides["mesh_size"] = args.mesh_size
    if getattr(args, "noise", None) is not None:
        overrides["noise_level"] = args.noise
    if getattr(args, "noise_seed", None) is not None:
        overrides["noise_seed"] = args.noise_seed
    if getattr(args, "grid_interval", None):
        overrides["grid"] = ("interval", *args.grid_interval)
    if getattr(args, "grid_rect", None):
        overrides["grid"] = ("rect", *args.grid_rect)
    if getattr(args, "alpha", None) is not None:
        overrides["alpha"] = args.alpha
    if getattr(args, "z", None):
        overrides["z"] = tuple(args.z)
    if getattr(args, "threshold", None) is not None:
        overrides["threshold"] = args.threshold
    if getattr(args, "model", None):
        overrides["model"] = args.model
    if getattr(args, "eigs", None):
        overrides["eigenvalues"] = tuple(complex(v) for v in args.eigs)
    if getattr(args, "sigma2", None) is not None:
        overrides["sigma2"] = args.sigma2
    if getattr(args, "samples", None) is not None:
        overrides["samples"] = args.samples
    if getattr(args, "seed", None) is not None:
        overrides["mcmc_seed"] = args.seed
    if getattr(args, "gamma2", None) is not None:
        overrides["gamma2"] = args.gamma2
    if getattr(args, "burn_in", None) is not None:
        overrides["burn_in"] = args.burn_in
    return replace(cfg, **overrides)


def _run_stages(args, stages) -> int:
    cfg = replace(_base_config(args), stages=stages)
    manifest = run_pipeline(cfg)
    for name in manifest:
        print(f"wrote {cfg.output_dir}/{name}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    return _run_stages(args, ("simulate",))


def _cmd_reconstruct(args) -> int:
    return _run_stages(args, ("reconstruct-eigs",))


def _cmd_estimate(args) -> int:
    return _run_stages(args, ("estimate-n",))


def _cmd_run(args) -> int:
    cfg = _base_config(args)
    if getattr(args, "stages", None):
        cfg = replace(cfg, stages=tuple(args.stages))
    manifest = run_pipeline(cfg)
    for name in manifest:
        print(f"wrote {cfg.output_dir}/{name}")
    return EXIT_OK


def _cmd_eigs(args) -> int:
    shape = ScattererShape.from_name(args.shape)
    scene = make_scene(shape)
    if len(args.region) == 2:
        region = SearchRegion.interval(args.region[0], args.region[1])
    elif len(args.region) == 4:
        region = SearchRegion(*args.region)
    else:
        raise ConfigError("--region takes 2 (interval) or 4 (rectangle) numbers")
    kind, coeff_args = parse_coefficient(args.coefficient)
    if args.method == "oracle":
        if shape.kind != "disc" or kind == "radial":
            raise ConfigError("the oracle method needs a disc with constant coefficient")
        n_core = coeff_args[0] if kind == "constant" else complex(*coeff_args)
        eigenset = bessel_oracle_eigenvalues(
            n_core, shape.radius, scene.gamma_radius, scene.wavenumber, region
        )
    else:
        mesh = generate_mesh(shape, scene, args.mesh_size)
        interior, _ = interior_submesh(mesh, scene.gamma_radius)
        n_field = coefficient_field(args.coefficient, shape)
        system = assemble(interior, n_field, scene.wavenumber, pml=None)
        pencil = SteklovPencil(system, scene.wavenumber)
        solver = sim_eigenvalues if args.method == "sim" else schur_dense_eigenvalues
        eigenset = solver(pencil, region)
    write_eigs_csv(eigenset, args.out)
    print(f"wrote {args.out} ({len(eigenset)} eigenvalues)")
    return EXIT_OK


def _cmd_presets(args) -> int:
    for p in list_presets():
        print(f"{p.name:18s} {p.description}")
    return EXIT_OK


def _add_scene_flags(sp) -> None:
    sp.add_argument("--shape", choices=("disc", "square", "lshape"))
    sp.add_argument("--coefficient", help='e.g. "constant 5", "radial 4 2", "complex 2 4"')
    sp.add_argument("--mesh-size", dest="mesh_size", type=float)


def _add_common(sp, func) -> None:
    sp.add_argument("--config", help="pipeline config file")
    sp.add_argument("--preset", help="named preset (see `presets`)")
    sp.add_argument("--out", help="output directory")
    sp.set_defaults(func=func)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steklov",
        description="Steklov eigenvalue reconstruction and index estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="simulate near-field Cauchy data")
    _add_scene_flags(sp)
    sp.add_argument("--noise", type=float, help="relative noise level")
    sp.add_argument("--noise-seed", dest="noise_seed", type=int)
    _add_common(sp, _cmd_simulate)

    sp = sub.add_parser("eigs", help="compute Steklov eigenvalues directly")
    _add_scene_flags(sp)
    sp.add_argument("--region", type=float, nargs="+", required=True,
                    metavar="V", help="a b (interval) or re0 re1 im0 im1")
    sp.add_argument("--method", choices=("schur", "sim", "oracle"), default="schur")
    sp.add_argument("--out", default="eigs.csv")
    sp.set_defaults(func=_cmd_eigs, config=None, preset=None,
                    shape="disc", coefficient="constant 5", mesh_size=0.05)

    sp = sub.add_parser("reconstruct-eigs", help="recover eigenvalues from Cauchy data")
    sp.add_argument("--grid-interval", dest="grid_interval", type=float, nargs=3,
                    metavar=("A", "B", "STEP"))
    sp.add_argument("--grid-rect", dest="grid_rect", type=float, nargs=5,
                    metavar=("RE0", "RE1", "IM0", "IM1", "STEP"))
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--z", type=float, nargs=2, metavar=("X", "Y"))
    sp.add_argument("--threshold", type=float)
    _add_common(sp, _cmd_reconstruct)

    sp = sub.add_parser("estimate-n", help="estimate the index of refraction")
    sp.add_argument("--eigs", nargs="+", metavar="LAMBDA",
                    help="explicit eigenvalues; otherwise peaks.csv is read")
    sp.add_argument("--shape", choices=("disc", "square", "lshape"))
    sp.add_argument("--model", choices=("constant", "radial", "complex"))
    sp.add_argument("--sigma2", type=float)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--gamma2", type=float)
    sp.add_argument("--burn-in", dest="burn_in", type=float)
    _add_common(sp, _cmd_estimate)

    sp = sub.add_parser("run", help="run the configured pipeline stages")
    _add_scene_flags(sp)
    sp.add_argument("--stages", nargs="+",
                    choices=("simulate", "reconstruct-eigs", "estimate-n"))
    _add_common(sp, _cmd_run)

    sp = sub.add_parser("presets", help="list benchmark presets")
    sp.set_defaults(func=_cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
