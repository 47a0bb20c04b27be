"""Executes run and sweep configurations; shared by the CLI and the HTTP service."""
from __future__ import annotations

import csv
import io
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import problems
from .eigensolver import ConvergenceError, ground_lanczos
from .optimizers import ObjectiveError
from .partitioned import apply_gate_partitioned, apply_two_qubit_partitioned, gather, split
from .schemas import (
    SWEEP_COLUMNS,
    BenchResult,
    ExactResult,
    PartialResult,
    QaoaResult,
    RunConfig,
    RunRecord,
    SweepConfig,
    VqeRunResult,
)
from .statevector import (
    PauliOperator,
    ResourceLimitError,
    StateVector,
    apply_single_qubit,
    apply_two_qubit,
    check_memory,
)
from .variational import (
    DEFAULT_QAOA_BUDGET,
    AnnealConfig,
    QaoaAngles,
    aqa_run,
    aqa_to_qaoa_angles,
    qaoa_optimize,
)
from .vqe import (
    DEFAULT_VQE_BUDGET,
    OptimizerConfig,
    QuasiConfig,
    build_ansatz,
    quasi_dynamics,
    random_restarts,
    vqe_optimize,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_RESOURCE = 3
EXIT_SOLVER = 4


class RunFailure(RuntimeError):
    """A run that failed after producing a partial record."""

    def __init__(self, message: str, record: RunRecord, exit_code: int = EXIT_SOLVER):
        super().__init__(message)
        self.record = record
        self.exit_code = exit_code


def derive_seed(*parts) -> int:
    """Stable 32-bit seed from a base seed and row identifiers."""
    words = [p if isinstance(p, int) else zlib.crc32(str(p).encode()) for p in parts]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


# -- instances -----------------------------------------------------------------

def load_cover(cfg: RunConfig) -> tuple[problems.ExactCoverInstance, str]:
    if cfg.instance_text is not None:
        return problems.parse_cover(cfg.instance_text), cfg.instance or "inline"
    if cfg.instance is not None:
        return problems.read_cover(cfg.instance), cfg.instance
    if cfg.routes is None:
        raise ValueError("qaoa/aqa need --instance or --routes")
    f = cfg.flights if cfg.flights is not None else cfg.routes
    seed = cfg.seed if cfg.instance_seed is None else cfg.instance_seed
    inst = problems.random_cover_instance(cfg.routes, f, seed)
    return inst, f"generated:N={cfg.routes},F={f},seed={seed}"


def load_heisenberg(cfg: RunConfig) -> problems.HeisenbergModel:
    if cfg.instance_text is not None:
        return problems.parse_heisenberg(cfg.instance_text)
    if cfg.instance is not None:
        return problems.read_heisenberg(cfg.instance)
    if cfg.size is None:
        raise ValueError("vqe/quasi/exact need --size or --instance")
    return problems.heisenberg_ring(cfg.size, periodic=not cfg.open_chain)


# -- single runs -----------------------------------------------------------------

def _elapsed(cfg: RunConfig, start: float) -> float | None:
    return round(time.perf_counter() - start, 6) if cfg.timing else None


def _qaoa(cfg: RunConfig, start: float) -> QaoaResult:
    inst, label = load_cover(cfg)
    check_memory(inst.num_routes)
    model = problems.cover_to_ising(inst)
    if cfg.init in (None, "aqa"):
        n = cfg.p - 1 if cfg.n is None else cfg.n
        if n + 1 != cfg.p:
            raise ValueError(f"AQA initialisation with n={n} gives p={n + 1}, not {cfg.p}")
        init = aqa_to_qaoa_angles(AnnealConfig(cfg.tau, n, cfg.schedule))
    elif cfg.init == "random":
        init = QaoaAngles.random(cfg.p, cfg.seed)
    else:
        init = QaoaAngles.from_vector(cfg.angles)
        if init.p != cfg.p:
            raise ValueError(f"angle file has p={init.p}, expected {cfg.p}")
    budget = cfg.budget or cfg.max_evals or DEFAULT_QAOA_BUDGET
    run = qaoa_optimize(model, init, optimizer=cfg.optimizer or "simplex", budget=budget,
                        ftol=cfg.ftol, gtol=cfg.gtol, gradient=cfg.gradient)
    return QaoaResult(
        instance=label,
        p_or_n=init.p,
        tau=cfg.tau if cfg.init in (None, "aqa") else None,
        final_energy=run.final_energy,
        mean_cost=run.mean_cost,
        success_probability=run.success_probability,
        evals=run.evals,
        wall_time=_elapsed(cfg, start),
        initial_energy=run.initial_energy,
        initial_success_probability=run.initial_success_probability,
        random_guess=2.0 ** -inst.num_routes,
        betas=run.angles.betas.tolist(),
        gammas=run.angles.gammas.tolist(),
        converged=run.converged,
    )


def _aqa(cfg: RunConfig, start: float) -> QaoaResult:
    inst, label = load_cover(cfg)
    check_memory(inst.num_routes)
    model = problems.cover_to_ising(inst)
    n = 5 if cfg.n is None else cfg.n
    run = aqa_run(model, AnnealConfig(cfg.tau, n, cfg.schedule))
    return QaoaResult(
        instance=label,
        p_or_n=n,
        tau=cfg.tau,
        final_energy=run.final_energy,
        mean_cost=run.mean_cost,
        success_probability=run.success_probability,
        evals=run.evals,
        wall_time=_elapsed(cfg, start),
        random_guess=2.0 ** -inst.num_routes,
    )


def _ground_energy(model: problems.HeisenbergModel, seed: int) -> float:
    op = PauliOperator(problems.heisenberg_terms(model), model.num_spins)
    return ground_lanczos(op, model.num_spins, seed=seed).e0


def _vqe(cfg: RunConfig, start: float) -> VqeRunResult:
    model = load_heisenberg(cfg)
    n = model.num_spins
    check_memory(n)
    e0 = _ground_energy(model, cfg.seed)
    bits = cfg.bits if cfg.init == "bits" else problems.neel_state(n)
    ansatz = build_ansatz(n)
    opt = OptimizerConfig(cfg.optimizer or "bfgs", cfg.max_evals or DEFAULT_VQE_BUDGET,
                          ftol=cfg.ftol, gtol=cfg.gtol)
    if cfg.command == "quasi":
        res = quasi_dynamics(model, ansatz, bits, QuasiConfig(cfg.threshold, cfg.max_rounds), opt, e0)
    elif cfg.init == "random":
        res = random_restarts(model, ansatz, bits, cfg.restarts, cfg.seed, opt, e0)
    else:
        res = vqe_optimize(model, ansatz, np.zeros(ansatz.num_params), bits, opt, e0)
    return VqeRunResult(
        N=n,
        e0=e0,
        e_var=res.final_energy,
        fidelity=res.energy_fidelity,
        rounds=res.rounds,
        evals=res.evals,
        per_round_energies=res.per_round_energies,
        converged=res.converged,
        wall_time=_elapsed(cfg, start),
    )


def _exact(cfg: RunConfig, start: float) -> ExactResult:
    model = load_heisenberg(cfg)
    n = model.num_spins
    check_memory(n)
    op = PauliOperator(problems.heisenberg_terms(model), n)
    res = ground_lanczos(op, n, tol=cfg.tol, max_iter=cfg.max_iter, seed=cfg.seed)
    return ExactResult(N=n, e0=res.e0, iterations=res.iterations, residual=res.residual,
                       wall_time=_elapsed(cfg, start))


def random_circuit(n: int, gates: int, seed: int, two_qubit_fraction: float = 0.0):
    """Seeded list of ('1q', j, U) / ('2q', j, k, U) gates with Haar-random unitaries."""
    from scipy.stats import unitary_group

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(gates):
        if n >= 2 and rng.random() < two_qubit_fraction:
            j, k = rng.choice(n, 2, replace=False)
            out.append(("2q", int(j), int(k), unitary_group.rvs(4, random_state=rng)))
        else:
            out.append(("1q", int(rng.integers(n)), unitary_group.rvs(2, random_state=rng)))
    return out


def _bench(cfg: RunConfig, start: float) -> BenchResult:
    n = cfg.qubits
    m = n if cfg.local is None else cfg.local
    if m > n:
        raise ValueError(f"local qubit count {m} exceeds {n}")
    check_memory(n)
    rng = np.random.default_rng(cfg.seed)
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    amps /= np.linalg.norm(amps)
    mono = StateVector(n, amps.copy())
    ps = split(StateVector(n, amps.copy()), m)
    frac = cfg.two_qubit_fraction if m >= 2 else 0.0
    for g in random_circuit(n, cfg.gates, cfg.seed + 1, frac):
        if g[0] == "1q":
            apply_single_qubit(mono, g[1], g[2])
            apply_gate_partitioned(ps, g[1], g[2])
        else:
            apply_two_qubit(mono, g[1], g[2], g[3])
            apply_two_qubit_partitioned(ps, g[1], g[2], g[3])
    err = float(np.abs(gather(ps).amplitudes - mono.amplitudes).max())
    return BenchResult(N=n, M=m, max_abs_error=err, wall_time=_elapsed(cfg, start), **ps.stats.as_dict())


_HANDLERS = {"qaoa": _qaoa, "aqa": _aqa, "vqe": _vqe, "quasi": _vqe, "exact": _exact, "bench": _bench}


def execute(cfg: RunConfig) -> RunRecord:
    """Run one configuration.

    Raises ValueError / ResourceLimitError before any work is done, and
    :class:`RunFailure` (carrying a partial record) when the solver aborts.
    """
    start = time.perf_counter()
    try:
        result = _HANDLERS[cfg.command](cfg, start)
    except ObjectiveError as exc:
        res = exc.result
        best = res.best_params.tolist() if res.best_params is not None else None
        partial = PartialResult(best_value=res.best_value, best_params=best, evals=res.evals)
        record = RunRecord(command=cfg.command, status="failed", message=str(exc),
                           config=cfg, partial=partial)
        raise RunFailure(f"optimizer aborted: {exc}", record) from exc
    except ConvergenceError as exc:
        n = exc.result.vector.num_qubits if exc.result.vector is not None else 0
        partial = ExactResult(N=n, e0=exc.result.e0, iterations=exc.result.iterations,
                              residual=exc.result.residual)
        record = RunRecord(command=cfg.command, status="failed", message=str(exc),
                           config=cfg, result=partial)
        raise RunFailure(str(exc), record) from exc
    return RunRecord(command=cfg.command, config=cfg, result=result)


def dump_record(record: RunRecord) -> str:
    return record.model_dump_json(indent=2) + "\n"


def record_to_csv(record: RunRecord) -> str:
    data = record.result.model_dump() if record.result is not None else {}
    flat = {k: v for k, v in data.items() if not isinstance(v, list)}
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["command", "status", *flat], lineterminator="\n")
    writer.writeheader()
    writer.writerow({"command": record.command, "status": record.status, **flat})
    return buf.getvalue()


# -- sweeps ----------------------------------------------------------------------

def _sweep_rows(cfg: SweepConfig) -> list[tuple]:
    return sorted({(n, alg, rep) for n in cfg.sizes for alg in cfg.algorithms for rep in range(cfg.replicates)})


def _sweep_row(cfg: SweepConfig, key: tuple) -> dict:
    n, alg, rep = key
    seed = derive_seed(cfg.seed, n, alg, rep)
    row = {"N": n, "algorithm": alg, "seed": seed, "status": "ok"}
    start = time.perf_counter()
    try:
        if alg in ("qaoa", "aqa"):
            inst_seed = derive_seed(cfg.seed, n, "instance", rep)
            f = max(1, round(cfg.flights_per_route * n))
            model = problems.cover_to_ising(problems.random_cover_instance(n, f, inst_seed))
            if alg == "aqa":
                run = aqa_run(model, AnnealConfig(cfg.aqa_tau, cfg.aqa_n))
                row.update(p_or_n=cfg.aqa_n, tau=cfg.aqa_tau)
            else:
                init_n = cfg.p - 1 if cfg.n is None else cfg.n
                init = aqa_to_qaoa_angles(AnnealConfig(cfg.tau, init_n))
                run = qaoa_optimize(model, init, optimizer=cfg.optimizer or "simplex", budget=cfg.budget)
                row.update(p_or_n=init.p, tau=cfg.tau)
            guess = 2.0 ** -n
            row.update(energy=run.final_energy, success_probability_or_fidelity=run.success_probability,
                       random_guess=guess, ratio=run.success_probability / guess, evals=run.evals)
        else:
            model = problems.heisenberg_ring(n)
            e0 = _ground_energy(model, seed)
            ansatz = build_ansatz(n)
            opt = OptimizerConfig(cfg.optimizer or "bfgs")
            if alg == "quasi":
                res = quasi_dynamics(model, ansatz, problems.neel_state(n),
                                     QuasiConfig(cfg.threshold, cfg.max_rounds), opt, e0)
                row.update(p_or_n=res.rounds)
            else:
                res = vqe_optimize(model, ansatz, np.zeros(ansatz.num_params), problems.neel_state(n), opt, e0)
                row.update(p_or_n=1)
            row.update(tau="", energy=res.final_energy, success_probability_or_fidelity=res.energy_fidelity,
                       random_guess="", ratio="", evals=res.evals)
    except (ValueError, ResourceLimitError, ObjectiveError, ConvergenceError) as exc:
        row["status"] = f"failed: {exc}"
    row["seconds"] = round(time.perf_counter() - start, 3) if cfg.timing else ""
    return {c: row.get(c, "") for c in SWEEP_COLUMNS}


def run_sweep(cfg: SweepConfig) -> list[dict]:
    """One row per (size, algorithm, replicate), sorted by (N, algorithm, seed) whatever the completion order."""
    keys = _sweep_rows(cfg)
    if cfg.jobs > 1 and len(keys) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_sweep_row, [cfg] * len(keys), keys))
    else:
        rows = [_sweep_row(cfg, k) for k in keys]
    return sorted(rows, key=lambda r: (r["N"], r["algorithm"], r["seed"]))


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temporary sibling file and rename."""
    import os
    import tempfile

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
