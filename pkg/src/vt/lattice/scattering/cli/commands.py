#!/usr/bin/env python3
# coding=utf-8

"""
The subcommands. Each one pulls the stages it needs from a :class:`Pipeline` and writes its products through an
:class:`ArtifactWriter`; the manifest is written by the caller.

CSV columns per subcommand:

* ``band-info``: ``critical_points.csv`` with ``energy, index, k_1 .. k_d``.
* ``flow-trace``: ``flow_trace.csv`` with ``start, b, energy_start, energy_end, energy_residual, group_residual, valid``.
* ``dos``: ``dos.csv`` with ``E, delta, re_rho, im_rho``; ``dos_consistency.csv`` with ``b, E, deviation``.
* ``green-scan``: ``green.csv`` with ``E, row, col, re_G, im_G`` (boundary values at ``E - i0``).
* ``spectrum``: ``bound_states.csv`` with ``kind, energy, multiplicity``.
* ``smatrix-scan``: ``smatrix.csv`` with ``b, E, rank, re_det_s, im_det_s, phase, unitarity_defect``.
* ``time-delay``: ``time_delay.csv`` with ``E, trace_determinant, trace_cayley, resolvent_trace, deviation``.
* ``levinson``: ``levinson_phase.csv`` with ``segment, E, phase``.
* ``point-impurity``: ``point_impurity.csv`` with ``coupling, N, m_minus, m_plus, total_time_delay, rhs, residual,
  winding, holds`` and ``contour_<i>.csv`` with ``E, side, re_G, im_G``.
* ``embedded-search``: ``embedded_search.csv`` with ``E, kernel_dim, smallest, shell_rank``.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from vt.lattice.scattering.band import LatticeGeometry
from vt.lattice.scattering.cli.artifacts import ArtifactWriter
from vt.lattice.scattering.cli.pipeline import Pipeline
from vt.lattice.scattering.core import (
    edge_limit,
    fiber_scan,
    levinson_check,
    point_impurity_contour,
    spectral_property,
    time_delay_trace,
)
from vt.lattice.scattering.error_specs import DomainError, LevinsonViolation
from vt.lattice.scattering.flow import gram_matrix, localized_states
from vt.lattice.scattering.spectral import ImpurityModel, find_bound_states, shell_candidates
from vt.lattice.scattering.spectral.embedded import embedded_eigenvector_search, exact_embedded_states, no_embedded_check

logger = logging.getLogger(__name__)

type CommandFn = Callable[[Pipeline, ArtifactWriter], None]

GROUP_STEP = 0.5
"Second leg of the group law check ``theta_{b + s} = theta_b o theta_s``."


@dataclass(frozen=True)
class Command:
    name: str
    help: str
    run: CommandFn


COMMANDS: dict[str, Command] = {}


def command(name: str, help: str) -> Callable[[CommandFn], CommandFn]:
    def register(fn: CommandFn) -> CommandFn:
        COMMANDS[name] = Command(name, help, fn)
        return fn

    return register


def _interior_energies(p: Pipeline) -> NDArray[np.float64]:
    """
    ``scan.energies``, or ``scan.n_points`` energies strictly inside the band.
    """
    scan = p.config.scan
    if scan.energies:
        return np.asarray(scan.energies, dtype=float)
    lo, hi = p.critical.E_minus, p.critical.E_plus
    return lo + (hi - lo) * (np.arange(scan.n_points) + 0.5) / scan.n_points


def _rank(matrix: NDArray[np.complex128]) -> int:
    return int(np.linalg.matrix_rank(matrix)) if matrix.size else 0


def _dos_sites(p: Pipeline) -> tuple[tuple[int, ...], ...]:
    if p.config.impurity is None:
        return ((0,) * p.band.dimension,)
    return tuple(p.model.sites)


@command("band-info", "critical points, band edges, rescaled energy and the geometry of the impurity sites")
def band_info(p: Pipeline, w: ArtifactWriter) -> None:
    with w.timed("critical points"):
        critical = p.critical
    d = p.band.dimension
    rows = [(c.value, c.index, *c.k) for c in critical.points]
    w.csv("critical_points.csv", ["energy", "index", *(f"k_{i + 1}" for i in range(d))], rows)
    doc: dict[str, object] = {
        "band": {"dimension": d, "terms": p.band.to_terms(), "polynomial": p.band.is_polynomial},
        "critical": critical.to_dict(),
        "rescale": p.rescale.to_dict(),
        "Delta": p.rescale.Delta,
    }
    if p.config.impurity is not None:
        geometry = LatticeGeometry.of(p.model.sites, p.band.support)
        doc["geometry"] = {
            "sites": [list(s) for s in sorted(geometry.sites)],
            "contacts": len(geometry.contacts),
            "s_interior": [list(s) for s in sorted(geometry.s_interior)],
            "hull_points": len(geometry.hull_points()),
        }
    w.json("band_info.json", doc)


@command("flow-trace", "energy transport and group law of the flow on random starting points")
def flow_trace(p: Pipeline, w: ArtifactWriter) -> None:
    scan = p.config.scan
    flow = p.transport_flow
    d = p.band.dimension
    rng = np.random.default_rng(p.config.seed)
    starts = rng.uniform(0.0, 2 * np.pi, size=(scan.n_starts, d))
    b_values = np.asarray(scan.b_values, dtype=float)
    with w.timed("transport"):
        direct = flow.transport(starts, b_values + GROUP_STEP, workers=p.threads)
        first = flow.transport(starts, [GROUP_STEP], workers=p.threads)
        # invalid first legs restart from their own start; they stay masked
        mid = np.where(first.valid[:, None], first.points[0], starts)
        second = flow.transport(mid, b_values, workers=p.threads)
    f0 = p.rescale.f(p.band.evaluate(starts))
    rows = []
    order = np.argsort(b_values)
    for j, b in enumerate(b_values[order]):
        composed = second.points[j]
        target = direct.points[j]
        valid = direct.valid & first.valid & second.valid
        delta = np.angle(np.exp(1j * (composed - target)))
        group = np.linalg.norm(delta, axis=1)
        with np.errstate(invalid="ignore"):
            energy_end = p.band.evaluate(target)
            residual = np.abs(p.rescale.f(energy_end) - f0 - (b + GROUP_STEP))
        for i in range(scan.n_starts):
            rows.append((i, b + GROUP_STEP, p.band.evaluate(starts[i]), energy_end[i], residual[i], group[i], valid[i]))
    w.csv(
        "flow_trace.csv",
        ["start", "b", "energy_start", "energy_end", "energy_residual", "group_residual", "valid"],
        rows,
    )
    ok = [r for r in rows if r[-1]]
    w.json(
        "flow_trace.json",
        {
            "starts": scan.n_starts,
            "valid_starts": int(np.count_nonzero(direct.valid & first.valid & second.valid)),
            "max_energy_residual": max((r[4] for r in ok), default=0.0),
            "max_group_residual": max((r[5] for r in ok), default=0.0),
        },
    )


@command("dos", "spectral density matrix, Hölder exponents, edge fits and the localized state consistency check")
def dos(p: Pipeline, w: ArtifactWriter) -> None:
    sites = _dos_sites(p)
    with w.timed("density"):
        density, _ = p.density(sites)
        green = p.green(sites)
    rows = [
        (e, ";".join(str(x) for x in delta), v.real, v.imag)
        for j, e in enumerate(density.energies)
        for delta, v in zip(density.differences, density.values[j])
    ]
    w.csv("dos.csv", ["E", "delta", "re_rho", "im_rho"], rows)
    consistency = []
    if p.band.dimension >= 2 and density.method == "flow":
        with w.timed("localized states"):
            for b in p.config.scan.b_values:
                states = localized_states(p.transport_flow, p.sample, sites, b, b_max=p.tolerances.b_max)
                gram = gram_matrix(states, p.sample)
                energy = float(p.rescale.f_inv(b))
                expected = float(p.rescale.F(energy)) * density.at(energy)
                scale = max(float(np.max(np.abs(expected))), 1e-300)
                consistency.append((b, energy, float(np.max(np.abs(gram - expected))) / scale))
        w.csv("dos_consistency.csv", ["b", "E", "deviation"], consistency)
    w.json(
        "dos.json",
        {
            "density": density.to_dict(),
            "edges": {str(s): e.to_dict() for s, e in sorted(green.edges.items())},
            "surface_density_of_states": p.sample.density_of_states() if density.method == "flow" else None,
            "max_consistency_deviation": max((c[2] for c in consistency), default=None),
        },
    )


@command("green-scan", "Green boundary values, band edge asymptotics and the Kramers-Kronig check")
def green_scan(p: Pipeline, w: ArtifactWriter) -> None:
    sites = _dos_sites(p)
    with w.timed("green"):
        green = p.green(sites)
    g = green.re_table + 1j * green.im_table
    n = len(sites)
    rows = [
        (e, r, c, g[j, r, c].real, g[j, r, c].imag)
        for j, e in enumerate(green.energies)
        for r in range(n)
        for c in range(n)
    ]
    w.csv("green.csv", ["E", "row", "col", "re_G", "im_G"], rows)
    w.json("edges.json", {str(s): e.to_dict() for s, e in sorted(green.edges.items())})
    with w.timed("kramers-kronig"):
        recovered = green.kramers_kronig()
    interior = (green.energies > green.E_minus) & (green.energies < green.E_plus)
    tabulated = green.density.values[interior]
    scale = max(float(np.max(np.abs(tabulated))), 1e-300)
    w.json(
        "green_scan.json",
        {
            "sites": [list(s) for s in sites],
            "n_energies": len(green.energies),
            "kramers_kronig_deviation": float(np.max(np.abs(recovered - tabulated))) / scale,
            "density_method": green.density.method,
        },
    )


@command("spectrum", "isolated, embedded and threshold eigenvalues of the impurity")
def spectrum(p: Pipeline, w: ArtifactWriter) -> None:
    with w.timed("bound states"):
        report = p.report
    rows = [("isolated", s.energy, s.multiplicity) for s in report.isolated]
    rows += [("embedded", s.energy, s.multiplicity) for s in report.embedded]
    rows += [
        ("threshold", t.energy, t.eigenvalue_mult) for _, t in sorted(report.threshold.items()) if t.eigenvalue_mult
    ]
    w.csv("bound_states.csv", ["kind", "energy", "multiplicity"], rows)
    doc: dict[str, object] = {"report": report.to_dict(), "model": p.model.to_dict()}
    if p.model.kind == "diagonal" and np.all(np.abs(np.diag(p.model.v_matrix)) > 0):
        doc["no_embedded_certificate"] = no_embedded_check(p.model, p.band).to_dict()
    w.json("spectrum.json", doc)


@command("smatrix-scan", "on-shell scattering matrix across the band")
def smatrix_scan(p: Pipeline, w: ArtifactWriter) -> None:
    green = p.green()
    with w.timed("fibers"):
        fibers = fiber_scan(p.model, green, tolerances=p.tolerances)
    rows = [(*f.to_row(), f.phase, f.unitarity_defect()) for f in fibers]
    w.csv("smatrix.csv", ["b", "E", "rank", "re_det_s", "im_det_s", "phase", "unitarity_defect"], rows)
    limits = {}
    if green.dimension >= 3:
        limits = {str(s): edge_limit(p.model, green, s, tolerances=p.tolerances).to_dict() for s in (-1, 1)}
    ranks: dict[str, int] = {}
    for f in fibers:
        ranks[str(f.rank)] = ranks.get(str(f.rank), 0) + 1
    w.json(
        "smatrix.json",
        {
            "n_energies": len(fibers),
            "ranks": ranks,
            "max_unitarity_defect": max((f.unitarity_defect() for f in fibers), default=0.0),
            "edge_limits": limits,
        },
    )


@command("time-delay", "trace of the time delay operator by two formulas and against the resolvent trace")
def time_delay(p: Pipeline, w: ArtifactWriter) -> None:
    green = p.green()
    energies = _interior_energies(p)
    rows = []
    checks = []
    with w.timed("time delay"):
        for e in energies:
            det = time_delay_trace(p.model, green, float(e), tolerances=p.tolerances)
            cay = time_delay_trace(p.model, green, float(e), method="cayley", tolerances=p.tolerances)
            if p.config.scan.spectral_check:
                check = spectral_property(p.model, green, float(e), tolerances=p.tolerances)
                checks.append(check.to_dict())
                rows.append((e, det, cay, check.extrapolated, check.deviation))
            else:
                rows.append((e, det, cay, float("nan"), float("nan")))
    w.csv("time_delay.csv", ["E", "trace_determinant", "trace_cayley", "resolvent_trace", "deviation"], rows)
    w.json("time_delay.json", {"spectral_property": checks})


@command("levinson", "Levinson's sum rule ledger")
def levinson(p: Pipeline, w: ArtifactWriter) -> None:
    green = p.green()
    with w.timed("levinson"):
        ledger = levinson_check(
            p.model, green, p.report, p.critical, tolerances=p.tolerances, raise_on_violation=False
        )
    rows = [(i, e, ph) for i, t in enumerate(ledger.phase_track) for e, ph in zip(t.nodes, t.phases)]
    w.csv("levinson_phase.csv", ["segment", "E", "phase"], rows)
    w.json("levinson.json", {"ledger": ledger.to_dict(), "report": p.report.to_dict()})
    if not ledger.holds:
        raise LevinsonViolation(
            f"Levinson residual {ledger.residual:.4g} exceeds {ledger.tolerance:g}", ledger=ledger
        )


@command("point-impurity", "bound states, Levinson ledgers and contour data of a point impurity across couplings")
def point_impurity(p: Pipeline, w: ArtifactWriter) -> None:
    d = p.band.dimension
    if d < 3:
        raise DomainError(f"the point impurity table needs finite edge values of G, which requires d >= 3, got {d}")
    origin = ((0,) * d,)
    green = p.green(origin)
    g_minus = float(green.boundary(green.E_minus)[0, 0].real)
    g_plus = float(green.boundary(green.E_plus)[0, 0].real)
    lam_plus, lam_minus = 1.0 / g_plus, 1.0 / g_minus
    couplings = p.config.scan.couplings or (0.0, lam_plus / 2, 2 * lam_plus, 2 * lam_minus, lam_plus, lam_minus)
    rows = []
    failed = []
    for i, lam in enumerate(couplings):
        model = ImpurityModel.point(d, lam)
        with w.timed(f"coupling {i}"):
            report = find_bound_states(model, green, p.band, p.critical, tolerances=p.tolerances)
            ledger = levinson_check(model, green, report, p.critical, tolerances=p.tolerances, raise_on_violation=False)
            contour = point_impurity_contour(green, lam)
        w.csv(f"contour_{i}.csv", ["E", "side", "re_G", "im_G"], contour.to_rows())
        rows.append(
            (
                lam,
                ledger.N,
                ledger.m_minus,
                ledger.m_plus,
                ledger.total_time_delay,
                ledger.rhs,
                ledger.residual,
                contour.winding,
                ledger.holds,
            )
        )
        if not ledger.holds:
            failed.append(ledger)
    w.csv(
        "point_impurity.csv",
        ["coupling", "N", "m_minus", "m_plus", "total_time_delay", "rhs", "residual", "winding", "holds"],
        rows,
    )
    w.json("point_impurity.json", {"G_minus": g_minus, "G_plus": g_plus, "lambda_minus": lam_minus, "lambda_plus": lam_plus})
    if failed:
        worst = max(failed, key=lambda led: led.residual)
        raise LevinsonViolation(
            f"{len(failed)} of {len(rows)} couplings violate Levinson's rule, worst residual {worst.residual:.4g}",
            ledger=worst,
        )


@command("embedded-search", "kernel of the embedded eigenvector operator against the energy, and exact embedded states")
def embedded_search(p: Pipeline, w: ArtifactWriter) -> None:
    impurity = p.config.require_impurity("embedded-search")
    sites = impurity.sites
    energies = _interior_energies(p)
    with w.timed("search"):
        search = embedded_eigenvector_search(p.band, sites, energies, tolerances=p.tolerances)
    rows = [
        (e, k, s, _rank(shell_candidates(p.band, sites, e, tolerances=p.tolerances)))
        for e, k, s in search.to_rows()
    ]
    w.csv("embedded_search.csv", ["E", "kernel_dim", "smallest", "shell_rank"], rows)
    with w.timed("exact states"):
        exact = exact_embedded_states(p.model, p.band, p.critical.E_minus, p.critical.E_plus, tolerances=p.tolerances)
    doc: dict[str, object] = {
        "box": [list(s) for s in search.box],
        "generic_dim": search.generic_dim,
        "exceptional": list(search.exceptional),
        "exact_states": [s.to_dict() for s in exact],
    }
    if p.model.kind == "diagonal" and np.all(np.abs(np.diag(p.model.v_matrix)) > 0):
        doc["no_embedded_certificate"] = no_embedded_check(p.model, p.band).to_dict()
    w.json("embedded_search.json", doc)
