"""Scenario execution: time series, snapshots, manifest and oracle gate."""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ConfigError, ConfigIssue, ScenarioConfig
from .dressed import dressed_lattice
from .entanglement import entropy_from_eigenvalues, partial_transpose_min_eigenvalue
from .initial_state import PacketState, build_packet, conserved_series
from .jacobi import jacobi_eigh
from .observables import (
    atomic_rdm_from_amplitudes,
    default_grid,
    fock_grid,
    husimi,
    mean_photons,
    mode_rdms_from_grid,
    second_moment,
    second_moment_grid,
    dark_slots,
)
from .oracle import (
    ORACLE_TAIL_TOL,
    assemble_lattice,
    block_eigensystem,
    compare_evolutions,
    oracle_evolve,
)
from .propagator import evolve_many

__all__ = [
    "CSV_COLUMNS",
    "EXIT_OK",
    "EXIT_CONFIG",
    "EXIT_ORACLE",
    "ORACLE_TIMES",
    "RunResult",
    "Simulation",
    "run_scenario",
    "observable_table",
    "format_csv",
]

CSV_COLUMNS = [
    "t", "P1", "P2", "P3", "varP1", "varP2", "varP3", "C_coh",
    "abs_chi12", "abs_chi13", "abs_chi23", "QM1", "QM2", "area1", "area2",
    "SL_atom", "SVN_atom", "MI_atom_field", "MI_modes", "autocorr",
    "Pd1_total", "Pd2_total", "M1_exp", "M2_exp", "E_exp",
]

EXIT_OK, EXIT_CONFIG, EXIT_ORACLE = 0, 2, 3
ORACLE_TIMES = (0.0, 1.0, 5.0, 25.0, 125.0, 500.0)
CHUNK = 64
VACUUM_TOL = 1e-12


@dataclass
class Simulation:
    """Packet plus whichever propagation route the scenario needs."""

    config: ScenarioConfig
    packet: PacketState
    use_oracle_path: bool

    @classmethod
    def build(cls, cfg: ScenarioConfig, allow_oracle_path: bool = False) -> "Simulation":
        if not cfg.equal_detuning and not allow_oracle_path:
            raise ConfigError([ConfigIssue(
                "delta23_multiple",
                "unequal detunings have no closed-form propagator; rerun with --oracle",
            )])
        packet = build_packet(cfg.field(), cfg.atom_amplitudes(), cfg.tail_tol)
        return cls(cfg, packet, not cfg.equal_detuning)

    def __post_init__(self):
        coupling, atom = self.config.coupling(), self.config.atom
        if self.use_oracle_path:
            self._eig = block_eigensystem(assemble_lattice(self.packet.lattice, coupling, atom))
        else:
            self._dl = dressed_lattice(self.packet.lattice, coupling, atom)

    def amplitudes(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        if self.use_oracle_path:
            return oracle_evolve(self.packet.amplitudes, times, self._eig)
        return evolve_many(self.packet, times, self._dl)


def observable_table(sim: Simulation, times) -> np.ndarray:
    """One row per time, columns as :data:`CSV_COLUMNS`."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    pk = sim.packet
    lat = pk.lattice
    cfg = sim.config
    amps = sim.amplitudes(times)

    rho_a = atomic_rdm_from_amplitudes(lat, amps)
    pops = np.clip(np.real(np.diagonal(rho_a, axis1=1, axis2=2)), 0.0, 1.0)
    chi = np.abs(rho_a[:, [0, 0, 1], [1, 2, 2]])
    s_lin = 1.0 - np.real(np.einsum("tij,tji->t", rho_a, rho_a))
    s_atom = entropy_from_eigenvalues(jacobi_eigh(rho_a, vectors=False))

    grid = fock_grid(lat, amps, pk.n1_cap, pk.n2_cap)
    rho1, rho2 = mode_rdms_from_grid(grid)
    qm = []
    for rho in (rho1, rho2):
        mean, second = mean_photons(rho)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(mean >= VACUUM_TOL, (second - mean * mean) / np.where(mean > 0, mean, 1.0) - 1.0, np.nan)
        qm.append(q)
    area1 = 1.0 / second_moment(rho1)
    area2 = 1.0 / second_moment(rho2)
    s_f1 = entropy_from_eigenvalues(jacobi_eigh(rho1, vectors=False))
    s_f2 = entropy_from_eigenvalues(jacobi_eigh(rho2, vectors=False))
    # total state is pure, so S(field) = S(atom)
    mi_modes = s_f1 + s_f2 - s_atom

    auto = np.abs(amps @ np.conj(pk.amplitudes)) ** 2
    d1, d2 = dark_slots(lat)
    prob = np.abs(amps) ** 2
    energy, m1, m2 = conserved_series(lat, amps, cfg.coupling(), cfg.atom)

    cols = [
        times, pops[:, 0], pops[:, 1], pops[:, 2],
        pops[:, 0] * (1 - pops[:, 0]), pops[:, 1] * (1 - pops[:, 1]), pops[:, 2] * (1 - pops[:, 2]),
        2.0 * chi.sum(axis=1), chi[:, 0], chi[:, 1], chi[:, 2],
        qm[0], qm[1], area1, area2,
        s_lin, s_atom, 2.0 * s_atom, mi_modes, auto,
        prob[:, d1].sum(axis=1), prob[:, d2].sum(axis=1), m1, m2, energy,
    ]
    return np.column_stack(cols)


_WORKER_SIM: Simulation | None = None


def _init_worker(cfg: ScenarioConfig, allow_oracle: bool):
    global _WORKER_SIM
    _WORKER_SIM = Simulation.build(cfg, allow_oracle)


def _worker_chunk(times):
    return observable_table(_WORKER_SIM, times)


def _time_series(sim: Simulation, times: np.ndarray, workers: int) -> np.ndarray:
    chunks = [times[i : i + CHUNK] for i in range(0, times.size, CHUNK)]
    if workers <= 1 or len(chunks) < 2:
        parts = [observable_table(sim, c) for c in chunks]
    else:
        with ProcessPoolExecutor(
            max_workers=workers, initializer=_init_worker, initargs=(sim.config, sim.use_oracle_path)
        ) as pool:
            parts = list(pool.map(_worker_chunk, chunks))
    return np.vstack(parts)


def format_csv(table: np.ndarray, columns: list[str]) -> str:
    lines = [",".join(columns)]
    for row in table:
        lines.append(",".join(format(float(v), ".17g") for v in row))
    return "\n".join(lines) + "\n"


def _matrix_entries(rho) -> list[dict]:
    rho = np.asarray(rho)
    return [
        {"row": int(i), "col": int(j), "re": float(rho[i, j].real), "im": float(rho[i, j].imag)}
        for i in range(rho.shape[0])
        for j in range(rho.shape[1])
    ]


def _snapshot(sim: Simulation, t: float, index: int, out: Path) -> list[Path]:
    cfg = sim.config
    pk = sim.packet
    amps = sim.amplitudes([t])[0]
    rho_a = atomic_rdm_from_amplitudes(pk.lattice, amps)
    grid = fock_grid(pk.lattice, amps, pk.n1_cap, pk.n2_cap)
    rho1, rho2 = mode_rdms_from_grid(grid)
    data = {
        "t": t,
        "entropy_log_base": "e",
        "rho_atom": {"levels": [1, 2, 3], "entries": _matrix_entries(rho_a)},
        "rho_mode1": {"fock_max": int(rho1.shape[0] - 1), "entries": _matrix_entries(rho1)},
        "rho_mode2": {"fock_max": int(rho2.shape[0] - 1), "entries": _matrix_entries(rho2)},
        "second_moment_mode1": float(second_moment(rho1)),
        "second_moment_mode2": float(second_moment(rho2)),
    }
    written = []
    if cfg.husimi:
        spec = default_grid(max(cfg.nbar1, cfg.nbar2), cfg.husimi_step)
        for mode, rho in ((1, rho1), (2, rho2)):
            pg = husimi(rho, spec)
            data[f"second_moment_grid_mode{mode}"] = second_moment_grid(pg)
            data[f"husimi_integral_mode{mode}"] = pg.integral()
            path = out / f"husimi_{index:03d}_mode{mode}.csv"
            path.write_text("X,Y,Q\n" + pg.to_text())
            written.append(path)
    if cfg.ppt:
        psi = grid.reshape(-1, 3)
        rho_f = psi @ psi.conj().T
        data["ppt_min_eigenvalue_modes"] = partial_transpose_min_eigenvalue(rho_f, (grid.shape[0], grid.shape[1]))
    path = out / f"snapshot_{index:03d}.json"
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    written.insert(0, path)
    return written


def _manifest(sim: Simulation, ns: bool, snapshots, oracle: bool) -> dict:
    cfg = sim.config
    pk = sim.packet
    cp = cfg.coupling()
    return {
        "scenario": cfg.name,
        "atom": cfg.as_dict()["atom"],
        "mu13": cp.mu13,
        "mu23": cp.mu23,
        "delta13": cp.delta13,
        "delta23": cp.delta23,
        "omega_field1": cp.omega_field1,
        "omega_field2": cp.omega_field2,
        "nu_max": [pk.meta["nu1"], pk.meta["nu2"]],
        "M0": pk.lattice.M0,
        "lattice_dim": pk.lattice.total_dim,
        "tail_mass": pk.tail_mass,
        "fock_caps": [pk.n1_cap, pk.n2_cap],
        "propagation": "numeric-blocks" if sim.use_oracle_path else "closed-form",
        "time_grid": {"t_start": cfg.t_start, "t_end": cfg.t_end, "steps": cfg.steps, "unit": "1/omega3"},
        "ns_column": ns,
        "snapshots": list(snapshots),
        "oracle": oracle,
        "columns": CSV_COLUMNS[:1] + (["t_ns"] if ns else []) + CSV_COLUMNS[1:],
        "config": cfg.as_dict(),
    }


@dataclass
class RunResult:
    exit_code: int
    out_dir: Path
    csv_path: Path
    manifest_path: Path
    snapshot_paths: list[Path] = field(default_factory=list)
    oracle_report: dict | None = None


def _oracle_gate(cfg: ScenarioConfig) -> dict:
    packet = build_packet(cfg.field(), cfg.atom_amplitudes(), max(cfg.tail_tol, ORACLE_TAIL_TOL))
    times = sorted(set(ORACLE_TIMES) | {float(cfg.t_end)})
    return compare_evolutions(packet, cfg.coupling(), cfg.atom, times, fullspace_times=[25.0, float(cfg.t_end)])


def run_scenario(
    cfg: ScenarioConfig,
    out_dir,
    oracle: bool = False,
    snapshots=None,
    ns: bool = False,
    workers: int = 1,
) -> RunResult:
    """Write observables.csv, manifest.json and snapshot files into ``out_dir``.

    Raises :class:`ConfigError` for scenarios that cannot run.  The returned
    exit code is non-zero only when the oracle comparison fails.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sim = Simulation.build(cfg, allow_oracle_path=oracle)
    snaps = tuple(cfg.snapshots if snapshots is None else snapshots)

    report = None
    code = EXIT_OK
    if oracle:
        report = _oracle_gate(cfg)
        (out / "oracle_report.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
        if not report["passed"]:
            code = EXIT_ORACLE

    times = cfg.times()
    table = _time_series(sim, times, workers)
    columns = list(CSV_COLUMNS)
    if ns:
        table = np.insert(table, 1, times * cfg.atom.time_unit_ns, axis=1)
        columns.insert(1, "t_ns")
    csv_path = out / "observables.csv"
    csv_path.write_text(format_csv(table, columns))

    snap_paths: list[Path] = []
    for i, t in enumerate(snaps):
        snap_paths += _snapshot(sim, float(t), i, out)

    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(_manifest(sim, ns, snaps, oracle), indent=1, sort_keys=True) + "\n")
    return RunResult(code, out, csv_path, manifest_path, snap_paths, report)
