"""Batch front end: config parsing, find/certify/sweep/render commands.

Configuration is flat ``key = value`` text with INI sections.  All outputs
are deterministic: identical config and inputs produce byte-identical
candidate files, certificates, index tables, and plots, independent of
thread count.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import configparser
import csv
import io
import math
import os
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .certify import (
    Certificate,
    CriterionError,
    Status,
    certificate_to_json,
    certify_candidate,
)
from .finder import (
    FloatSeqPair,
    amplitude_of,
    newton_refine,
    seed_mode,
    sweep_diagram,
)
from .nonlinear import ExpFraction, Rational
from .seqspace import Geometry, load_pair, save_pair
from .system import Params

__all__ = ["ConfigError", "RunConfig", "main", "parse_length", "parse_poly"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NOCONV = 2
EXIT_FAILED = 3

INDEX_HEADER = "sigma, amplitude, converged, certificate_path, status"


class ConfigError(ValueError):
    """Raised for malformed configuration or input files."""


def parse_length(text: str) -> float:
    """Float with an optional pi suffix: '3pi' -> 3*math.pi."""
    t = text.strip().lower()
    factor = 1.0
    if t.endswith("pi"):
        t = t[:-2].strip()
        factor = math.pi
        if not t:
            return factor
    try:
        return float(t) * factor if factor != 1.0 else float(t)
    except ValueError as exc:
        raise ConfigError(f"bad number {text!r}") from exc


def parse_poly(text: str) -> tuple[Fraction, ...]:
    """ASCII polynomial in x with fraction coefficients.

    Accepts forms like '1 + x^9', '1 - x/2 + x^2/8', '3/4*x^2'.  Returns
    the dense coefficient tuple from degree zero upward.
    """
    s = text.replace("-", "+-").replace(" ", "")
    if not s or s == "+":
        raise ConfigError(f"empty polynomial {text!r}")
    coeffs: dict[int, Fraction] = {}
    for i, term in enumerate(s.split("+")):
        if not term:
            # a leading minus leaves one empty slot at the front only
            if i == 0:
                continue
            raise ConfigError(f"dangling operator in {text!r}")
        t = term.replace("*", "")
        sign = 1
        if t.startswith("-"):
            sign = -1
            t = t[1:]
        try:
            if "x" in t:
                pre, _, post = t.partition("x")
                if post.startswith("^"):
                    exp_str, _, den = post[1:].partition("/")
                    power = int(exp_str)
                elif post.startswith("/"):
                    power = 1
                    den = post[1:]
                elif post == "":
                    power = 1
                    den = ""
                else:
                    raise ConfigError(f"bad term {term!r}")
                if power < 0:
                    raise ConfigError(f"negative exponent in {term!r}")
                base = Fraction(pre) if pre else Fraction(1)
                if den:
                    base /= Fraction(den)
            else:
                power = 0
                base = Fraction(t)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad term {term!r} in {text!r}") from exc
        coeffs[power] = coeffs.get(power, Fraction(0)) + sign * base
    deg = max(coeffs)
    return tuple(coeffs.get(i, Fraction(0)) for i in range(deg + 1))


def _parse_gamma(sec: configparser.SectionProxy):
    family = sec.get("gamma_family", "rational").strip().lower()
    if family == "rational":
        num = parse_poly(sec.get("gamma_num", "1"))
        den = parse_poly(sec.get("gamma_den", "1"))
        return Rational(num, den)
    if family == "expfraction":
        try:
            alpha = float(sec.get("gamma_alpha", ""))
            shift = float(sec.get("gamma_shift", ""))
        except ValueError as exc:
            raise ConfigError("expfraction needs gamma_alpha and gamma_shift") from exc
        return ExpFraction(alpha, shift)
    raise ConfigError(f"unknown gamma_family {family!r}")


def _parse_grid(text: str) -> tuple[float, ...]:
    t = text.strip()
    if not t:
        return ()
    if ":" in t:
        parts = t.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid range needs start:stop:count, got {text!r}")
        start, stop = parse_length(parts[0]), parse_length(parts[1])
        try:
            count = int(parts[2])
        except ValueError as exc:
            raise ConfigError(f"bad grid count {parts[2]!r}") from exc
        if count < 1:
            raise ConfigError("grid count must be positive")
        return tuple(float(x) for x in np.linspace(start, stop, count))
    return tuple(parse_length(p) for p in t.split(",") if p.strip())


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters for every command."""

    params: Params
    n: int
    k: Optional[int]
    rstar: float
    tol: float
    maxit: int
    mode: Optional[int]
    amp: float
    sigma_grid: tuple[float, ...]
    out_dir: str
    threads: int

    @classmethod
    def load(cls, path) -> "RunConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"config parse error in {path}: {exc}") from exc
        try:
            dom = cp["domain"]
            mod = cp["model"]
        except KeyError as exc:
            raise ConfigError(f"missing section {exc} in {path}") from exc
        a = parse_length(dom.get("a", "0"))
        b = parse_length(dom.get("b", ""))
        nu = parse_length(dom.get("nu", ""))
        if not (math.isfinite(a) and math.isfinite(b) and b > a):
            raise ConfigError("domain needs finite a < b")
        if not nu > 1.0:
            raise ConfigError(f"nu must exceed 1, got {nu}")
        geom = Geometry(a, b, nu)
        sigma = parse_length(mod.get("sigma", ""))
        d = parse_length(mod.get("d", "1"))
        if not (math.isfinite(sigma) and sigma >= 0.0):
            raise ConfigError(f"bad sigma {sigma}")
        if not d > 0.0:
            raise ConfigError(f"bad diffusion d {d}")
        params = Params(geom, sigma, d, _parse_gamma(mod))

        sea = cp["search"] if cp.has_section("search") else {}
        cer = cp["certify"] if cp.has_section("certify") else {}
        swe = cp["sweep"] if cp.has_section("sweep") else {}
        out = cp["output"] if cp.has_section("output") else {}
        try:
            n = int(sea.get("n", ""))
        except ValueError as exc:
            raise ConfigError("search section needs an integer n") from exc
        if n < 4:
            raise ConfigError(f"n must be at least 4, got {n}")
        k_raw = cer.get("k", "").strip()
        k = None
        if k_raw:
            k = int(k_raw)
            if k < 2 * n - 1:
                raise ConfigError(f"k must be at least {2 * n - 1}, got {k}")
        rstar = parse_length(cer.get("rstar", "1e-6"))
        if not (math.isfinite(rstar) and rstar > 0.0):
            raise ConfigError(f"rstar must be positive, got {rstar}")
        tol = parse_length(sea.get("tol", "1e-12"))
        maxit = int(sea.get("maxit", "200"))
        if not (tol > 0.0 and maxit >= 1):
            raise ConfigError("need tol > 0 and maxit >= 1")
        mode_raw = sea.get("mode", "").strip()
        mode = int(mode_raw) if mode_raw else None
        if mode is not None and not (1 <= mode <= n):
            raise ConfigError(f"seed mode {mode} outside 1..{n}")
        amp = parse_length(sea.get("amp", "0.3"))
        grid = _parse_grid(swe.get("sigma_grid", ""))
        threads = int(swe.get("threads", "1"))
        if threads < 1:
            raise ConfigError("threads must be positive")
        out_dir = out.get("dir", "out")
        return cls(
            params, n, k, rstar, tol, maxit, mode, amp, grid, out_dir, threads
        )


def _resolve_out(config: RunConfig, flag: Optional[str]) -> Path:
    # precedence: --out flag, then environment override, then config
    if flag:
        return Path(flag)
    env = os.environ.get("STEADYCERT_OUT")
    if env:
        return Path(env)
    return Path(config.out_dir)


def _fmt(x: float) -> str:
    return f"{x:.4e}"


def _status_line(cert: Certificate) -> str:
    rmin = cert.r_min.hi if cert.r_min is not None else float("nan")
    return (
        f"{cert.status.value} Y={_fmt(cert.y.hi)} Z1={_fmt(cert.z1.hi)} "
        f"Z2={_fmt(cert.z2.hi)} rmin={_fmt(rmin)}"
    )


def _find_state(cfg: RunConfig):
    """Newton-refined state per config seed policy.

    With an explicit mode the single configured seed decides; otherwise
    low cosine modes at two amplitudes are tried and the largest-pattern
    state wins, falling back to the homogeneous state when nothing
    nontrivial converges.
    """
    p = cfg.params
    geom = p.geom
    if cfg.mode is not None:
        seeds = [seed_mode(geom, cfg.n, cfg.mode, cfg.amp)]
    else:
        seeds = [
            seed_mode(geom, cfg.n, m, a)
            for m in range(1, min(6, cfg.n) + 1)
            for a in (cfg.amp, 0.1)
        ]
        flat = np.zeros(cfg.n + 1)
        flat[0] = 1.0
        seeds.append(FloatSeqPair(geom, flat, flat.copy()))
    best = None
    for seed in seeds:
        res = newton_refine(seed, p, cfg.tol, cfg.maxit)
        if not res.converged:
            continue
        size = amplitude_of(res.state)
        if best is None or size > best[1] + 1e-10:
            best = (res, size)
    return best


def cmd_find(cfg: RunConfig, out: Path) -> int:
    found = _find_state(cfg)
    if found is None:
        print("NONCONVERGED no seed reached the residual tolerance")
        return EXIT_NOCONV
    res, size = found
    out.mkdir(parents=True, exist_ok=True)
    path = out / "candidate.seq"
    save_pair(path, res.state.as_pair())
    print(
        f"CONVERGED residual={_fmt(res.residual)} amplitude={_fmt(size)} "
        f"file={path}"
    )
    return EXIT_OK


def cmd_certify(cfg: RunConfig, input_path: str, out: Path) -> int:
    try:
        pair = load_pair(input_path)
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    geom = cfg.params.geom
    if pair.geom != geom:
        print(
            f"input error: candidate geometry {pair.geom} does not match "
            f"config {geom}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    try:
        cert = certify_candidate(pair, cfg.params, cfg.rstar, k=cfg.k)
    except (CriterionError, ArithmeticError) as exc:
        print(f"certification aborted: {exc}", file=sys.stderr)
        return EXIT_FAILED
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "certificate.json", "w") as fh:
        fh.write(certificate_to_json(cert))
    print(_status_line(cert))
    if cert.r_max is not None:
        print(f"rmax={_fmt(cert.r_max.lo)}")
    return EXIT_OK if cert.proved else EXIT_FAILED


def _certify_point(args):
    idx, pt, cfg = args
    # each point was refined at its own grid sigma, not the base one
    params = replace(cfg.params, sigma=pt.sigma)
    try:
        cert = certify_candidate(pt.state.as_pair(), params, cfg.rstar, k=cfg.k)
        return idx, cert, None
    except (CriterionError, ArithmeticError) as exc:
        return idx, None, str(exc)


def cmd_sweep(cfg: RunConfig, out: Path, threads: int) -> int:
    points = sweep_diagram(
        cfg.params, cfg.sigma_grid, cfg.n, tol=cfg.tol, maxit=cfg.maxit
    )
    jobs = [
        (i, pt, cfg) for i, pt in enumerate(points) if pt.converged
    ]
    results = {}
    if jobs:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            for idx, cert, err in pool.map(_certify_point, jobs):
                results[idx] = (cert, err)
    out.mkdir(parents=True, exist_ok=True)
    pdir = out / "points"
    pdir.mkdir(exist_ok=True)
    rows = []
    proved = failed = skipped = 0
    for i, pt in enumerate(points):
        if not pt.converged:
            rows.append((pt.sigma, pt.amplitude, False, "", "Unconverged"))
            skipped += 1
            continue
        save_pair(pdir / f"point_{i:03d}.seq", pt.state.as_pair())
        cert, err = results[i]
        if cert is None:
            rows.append((pt.sigma, pt.amplitude, True, "", f"Error: {err}"))
            failed += 1
            continue
        cpath = pdir / f"point_{i:03d}.cert.json"
        with open(cpath, "w") as fh:
            fh.write(certificate_to_json(cert))
        rel = os.path.join("points", cpath.name)
        rows.append((pt.sigma, pt.amplitude, True, rel, cert.status.value))
        if cert.proved:
            proved += 1
        else:
            failed += 1
    with open(out / "index.csv", "w", newline="") as fh:
        fh.write(INDEX_HEADER + "\n")
        for sigma, amp, conv, cpath, status in rows:
            fh.write(
                f"{sigma!r}, {amp!r}, {str(conv).lower()}, {cpath}, {status}\n"
            )
    print(f"SWEEP proved={proved} failed={failed} nonconverged={skipped}")
    return EXIT_OK


def _read_index(path) -> list[tuple[float, float, bool, str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh, skipinitialspace=True)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != [
            h.strip() for h in INDEX_HEADER.split(",")
        ]:
            raise ConfigError(f"{path}: not a sweep index file")
        out = []
        for row in reader:
            if len(row) != 5:
                raise ConfigError(f"{path}: malformed row {row!r}")
            sigma, amp, conv, _, status = row
            out.append(
                (float(sigma), float(amp), conv == "true", status.strip())
            )
    return out


def _render_svg(rows: Sequence[tuple[float, float, bool, str]]) -> str:
    width, height = 640.0, 420.0
    ml, mr, mt, mb = 64.0, 20.0, 20.0, 48.0
    plotted = [r for r in rows if r[2]]
    xs = [r[0] for r in plotted] or [0.0, 1.0]
    ys = [r[1] for r in plotted] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(min(ys), 0.0), max(ys)
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0

    def px(x):
        return ml + (x - x0) / (x1 - x0) * (width - ml - mr)

    def py(y):
        return height - mb - (y - y0) / (y1 - y0) * (height - mt - mb)

    buf = io.StringIO()
    buf.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">\n'
    )
    buf.write('<rect width="100%" height="100%" fill="white"/>\n')
    buf.write(
        f'<line x1="{ml:.1f}" y1="{height - mb:.1f}" x2="{width - mr:.1f}" '
        f'y2="{height - mb:.1f}" stroke="black"/>\n'
    )
    buf.write(
        f'<line x1="{ml:.1f}" y1="{mt:.1f}" x2="{ml:.1f}" '
        f'y2="{height - mb:.1f}" stroke="black"/>\n'
    )
    for i in range(5):
        xv = x0 + i * (x1 - x0) / 4.0
        yv = y0 + i * (y1 - y0) / 4.0
        buf.write(
            f'<text x="{px(xv):.1f}" y="{height - mb + 18:.1f}" '
            f'font-size="11" text-anchor="middle">{xv:.4g}</text>\n'
        )
        buf.write(
            f'<text x="{ml - 8:.1f}" y="{py(yv) + 4:.1f}" font-size="11" '
            f'text-anchor="end">{yv:.4g}</text>\n'
        )
    buf.write(
        f'<text x="{(ml + width - mr) / 2:.1f}" y="{height - 8:.1f}" '
        f'font-size="13" text-anchor="middle">sigma</text>\n'
    )
    buf.write(
        f'<text x="14" y="{(mt + height - mb) / 2:.1f}" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 14 '
        f'{(mt + height - mb) / 2:.1f})">amplitude</text>\n'
    )
    for sigma, amp, _, status in plotted:
        cx, cy = px(sigma), py(amp)
        if status == "Proved":
            buf.write(
                f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" '
                f'fill="#1f6fb4"/>\n'
            )
        else:
            buf.write(
                f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="none" '
                f'stroke="#b43f1f" stroke-width="1.5"/>\n'
            )
    buf.write("</svg>\n")
    return buf.getvalue()


def cmd_render(input_path: str, out: Path) -> int:
    rows = _read_index(input_path)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "diagram.svg", "w") as fh:
        fh.write(_render_svg(rows))
    with open(out / "diagram.csv", "w", newline="") as fh:
        fh.write("sigma, amplitude, proved\n")
        for sigma, amp, conv, status in rows:
            if conv:
                fh.write(f"{sigma!r}, {amp!r}, {str(status == 'Proved').lower()}\n")
    print(f"RENDER points={sum(1 for r in rows if r[2])}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="steadycert",
        description="Certified steady states of a cross-diffusion model",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("find", "certify", "sweep", "render"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name != "render")
        sp.add_argument("--input")
        sp.add_argument("--out")
        sp.add_argument("--threads", type=int)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "render":
            if not args.input:
                raise ConfigError("render needs --input <index.csv>")
            cfg = RunConfig.load(args.config) if args.config else None
            out = _resolve_out(cfg, args.out) if cfg else Path(args.out or "out")
            return cmd_render(args.input, out)
        cfg = RunConfig.load(args.config)
        out = _resolve_out(cfg, args.out)
        if args.command == "find":
            return cmd_find(cfg, out)
        if args.command == "certify":
            if not args.input:
                raise ConfigError("certify needs --input <candidate.seq>")
            return cmd_certify(cfg, args.input, out)
        threads = args.threads if args.threads else cfg.threads
        return cmd_sweep(cfg, out, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
