"""Command-line entry point: ``thermocarleman {verify,reconstruct,study,sample}``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np
from scipy.integrate import IntegrationWarning

from . import harness as H
from .errors import ThermoCarlemanError
from .geometry import S_TAG, BoundaryMesh
from .reconstruct import AUTO, ReconConfig, reconstruct_exact


def _cmd_verify(args) -> int:
    if args.target == "fundamental":
        worst = H.verify_fundamental(args.media, args.points, args.seed)
        ok = worst < 1e-5
        print(f"max relative B-residual {worst:.3e}  {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1
    if args.target == "kernel":
        checks = H.verify_kernel(args.points, args.seed)
        for c in checks:
            print(f"{c.name:40s} {c.worst:.3e} < {c.tolerance:.0e}  {'PASS' if c.passed else 'FAIL'}")
        return 0 if all(c.passed for c in checks) else 1
    x = np.array(args.point, dtype=float)
    eps, fit = H.verify_carleman(x, tuple(args.taus), args.resolution, tau_power=args.tau_power)
    for t, e in zip(args.taus, eps):
        print(f"tau={t:6.2f}  eps={e:.4e}")
    mono = H.monotone_violations(eps) == 0
    ok = mono and abs(fit.slope + x[-1]) <= 0.15 * x[-1]
    print(f"slope {fit.slope:.4f} (target {-x[-1]:.4f}), monotone={mono}  {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def _load_config(path: str | None) -> dict:
    if path is None:
        return {"domain": {"kind": "cap", "resolution": 16}, "medium": H.DEFAULT_MEDIUM, "sources": H.DEFAULT_SOURCES}
    return json.loads(Path(path).read_text())


def _cmd_sample(args) -> int:
    cfg = _load_config(args.config)
    mesh = H.domain_from_dict(cfg["domain"])
    mb = H.medium_from_dict(cfg["medium"])
    U = H.manufacture_solution(H.sources_from_list(cfg["sources"]), mb, mesh)
    data = H.sample_cauchy_data(U, mesh, S_TAG)
    if args.delta:
        data = H.add_noise(data, args.delta, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mesh.to_csv(out / "mesh.csv")
    H.write_cauchy_csv(data, out / "data.csv")
    print(f"wrote {out / 'mesh.csv'} and {out / 'data.csv'} ({len(data.mesh)} S-nodes)")
    return 0


def _cmd_reconstruct(args) -> int:
    cfg = _load_config(args.config)
    dom = cfg["domain"]
    full = BoundaryMesh.from_csv(args.mesh, dom.get("kind", "cap"), _mesh_params(dom))
    data = H.read_cauchy_csv(args.data, full.select(S_TAG))
    mb = H.medium_from_dict(cfg["medium"])
    kernel = H.kernel_for(full)
    tau = args.tau if args.tau is not None else AUTO
    rc = ReconConfig(kernel, tau, args.delta, args.M)
    val = reconstruct_exact(np.array(args.point, dtype=float), data, rc, mb, full)
    for i, v in enumerate(val):
        print(f"U{i+1} = {v.real:+.12e} {v.imag:+.12e}j")
    return 0


def _mesh_params(dom: dict) -> dict:
    from .geometry import ConeSpec

    params = {"radius": float(dom.get("radius", 1.0))}
    if dom.get("kind", "cap") == "cone":
        cs = ConeSpec(float(dom.get("rho_exp", 2.0)), params["radius"])
        params.update(tau_rho=cs.tau_rho, rho_exp=cs.rho_exp)
    return params


def _cmd_study(args) -> int:
    spec = H.StudySpec.from_json(args.config)
    if args.out:
        spec.out = args.out

    def show(row):
        tag = " excluded" if row["excluded"] else ""
        d = "" if row["delta"] is None else f" delta={row['delta']:.1e}"
        print(f"point {row['point_id']} tau={row['tau']:.3f}{d} err_rel={row['err_rel']:.3e}{tag}", flush=True)

    rep = H.run_study(spec, progress=show)
    for key, fit in rep.fits.items():
        print(f"{key}: {json.dumps(fit)}  {'PASS' if rep.gates.get(key) else 'FAIL'}")
    if not rep.complete:
        print(f"incomplete: {rep.message}")
    return 0 if rep.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thermocarleman", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="self-checks against closed forms")
    v.add_argument("target", choices=["fundamental", "kernel", "carleman"])
    v.add_argument("--media", type=int, default=5)
    v.add_argument("--points", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--point", type=float, nargs=3, default=[0.0, 0.0, 0.4])
    v.add_argument("--taus", type=float, nargs="+", default=[5.0, 10.0, 20.0, 40.0])
    v.add_argument("--resolution", type=int, default=48)
    v.add_argument("--tau-power", type=float, default=1.0, help="power of tau divided out before the slope fit")
    v.set_defaults(func=_cmd_verify)

    s = sub.add_parser("sample", help="write a mesh and manufactured Cauchy data as CSV")
    s.add_argument("--config")
    s.add_argument("--delta", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="cauchy")
    s.set_defaults(func=_cmd_sample)

    r = sub.add_parser("reconstruct", help="reconstruct U at a point from S-data")
    r.add_argument("--config")
    r.add_argument("--mesh", required=True)
    r.add_argument("--data", required=True)
    r.add_argument("--point", type=float, nargs=3, required=True)
    r.add_argument("--tau", type=float)
    r.add_argument("--delta", type=float)
    r.add_argument("--M", type=float, default=1.0)
    r.set_defaults(func=_cmd_reconstruct)

    st = sub.add_parser("study", help="tau- or delta-sweep from a JSON config")
    st.add_argument("--config", required=True)
    st.add_argument("--out")
    st.set_defaults(func=_cmd_study)
    return p


def main(argv=None) -> int:
    warnings.simplefilter("ignore", IntegrationWarning)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ThermoCarlemanError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
