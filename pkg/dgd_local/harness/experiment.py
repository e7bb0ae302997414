"""Experiment orchestration: build the network, run, write artifacts, Monte-Carlo studies."""

import logging
import os
from dataclasses import dataclass
from typing import (
    Any,
    Optional,
    Union,
)

import numpy as np

from ..constants import (
    SEED_STREAMS,
    TOLERANCES,
)
from ..errors import StepsizeError
from ..matkit import (
    DenseMatrix,
    PathLike,
    frob_norm,
    write_matrix,
)
from ..objective import (
    DataPartition,
    NetworkPoint,
    NetworkShape,
)
from ..solvers import (
    IterateTrace,
    RunConfig,
    RunStatus,
    resolve_stepsize,
    resolve_tol_grad,
    run,
    write_json,
    write_summary_json,
    write_trace_csv,
)
from ..topology import (
    Graph,
    MixingMatrix,
    build_graph,
    lazy_fix,
    metropolis_weights,
    omega,
    write_graph,
    write_mixing,
)
from . import ExperimentConfig
from .instances import (
    InstanceSpec,
    gen_instance,
    init_in_ball,
    resolve_rho,
)

logger = logging.getLogger(__name__)

TRACE_FILE = "trace.csv"
SUMMARY_FILE = "summary.json"
RESOLVED_CONFIG_FILE = "config.resolved.cfg"
MC_SUMMARY_FILE = "mc_summary.json"

# ------------------------------------------------------------------------------
# ---- Setup -------------------------------------------------------------------
# ------------------------------------------------------------------------------


def load_config(config: Union[ExperimentConfig, PathLike]) -> ExperimentConfig:
    if isinstance(config, ExperimentConfig):
        return config
    return ExperimentConfig.from_file(config)


def instance_spec(cfg: ExperimentConfig) -> InstanceSpec:
    return InstanceSpec(
        n=cfg.n,
        m=cfg.m,
        r=cfg.r,
        J=cfg.J,
        topology=cfg.topology,
        seed=cfg.seed,
        rho=cfg.rho,
        p=cfg.p,
    )


def build_network(cfg: ExperimentConfig) -> tuple[Graph, MixingMatrix]:
    """Graph and Metropolis mixing matrix (lazy-fixed on request).

    A single node gets the empty graph and the weight matrix [[1]].
    """
    if cfg.J == 1:
        return Graph(node_count=1, edges=frozenset()), MixingMatrix(np.ones((1, 1)))

    graph_seed = int(np.random.default_rng([cfg.seed, SEED_STREAMS.graph]).integers(2**31 - 1))
    graph = build_graph(cfg.topology, cfg.J, seed=graph_seed, p=cfg.p)  # type: ignore[arg-type]
    mixing = metropolis_weights(graph)
    if cfg.lazy:
        mixing = lazy_fix(mixing)
    return graph, mixing


@dataclass
class Experiment:
    """Everything one config determines before iterating."""
    config: ExperimentConfig
    y: DenseMatrix
    partition: DataPartition
    graph: Graph
    mixing: MixingMatrix
    rho: float

    @property
    def shape(self) -> NetworkShape:
        return NetworkShape(n=self.config.n, r=self.config.r, widths=self.partition.widths)

    @property
    def omega(self) -> float:
        return omega(self.mixing)

    def run_config(self) -> RunConfig:
        cfg = self.config
        return RunConfig(
            rho=self.rho,
            mu=cfg.mu,  # type: ignore[arg-type]
            max_iters=cfg.max_iters,
            tol_grad=cfg.tol_grad,  # type: ignore[arg-type]
            tol_consensus=cfg.tol_consensus,
            seed=cfg.seed,
            safety=cfg.safety,
            halt_on_leave=cfg.halt_on_leave,
        )

    def stepsize(self) -> float:
        """Resolved mu.

        Raises:
            StepsizeError: If mu = auto and omega >= 1/2
        """
        try:
            return resolve_stepsize(self.run_config(), self.mixing, self.partition)
        except StepsizeError as e:
            raise StepsizeError(
                f"{e}. Set lazy = true in the config to apply lazy_fix, or give mu explicitly"
            ) from e

    def initial_point(self, init_seed: Optional[int] = None) -> NetworkPoint:
        seed = self.config.init_seed if init_seed is None else init_seed
        return init_in_ball(self.shape, self.rho, seed)


def prepare_experiment(config: Union[ExperimentConfig, PathLike]) -> Experiment:
    """Generate the instance and network a config describes."""
    cfg = load_config(config)
    y, partition = gen_instance(instance_spec(cfg))
    graph, mixing = build_network(cfg)
    return Experiment(
        config=cfg,
        y=y,
        partition=partition,
        graph=graph,
        mixing=mixing,
        rho=resolve_rho(cfg.rho, y, cfg.J),
    )


def write_instance(exp: Experiment, out_dir: PathLike) -> list[str]:
    """Write Y.txt, Y_1.txt..Y_J.txt, widths.txt, graph.txt and mixing.txt.

    Returns:
        Paths written, in that order
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, "Y.txt")]
    write_matrix(paths[0], exp.y)
    for j, block in enumerate(exp.partition.blocks, start=1):
        paths.append(os.path.join(out_dir, f"Y_{j}.txt"))
        write_matrix(paths[-1], block)

    paths.append(os.path.join(out_dir, "widths.txt"))
    with open(paths[-1], "w") as f:
        f.write(" ".join(str(w) for w in exp.partition.widths) + "\n")

    paths.append(os.path.join(out_dir, "graph.txt"))
    write_graph(paths[-1], exp.graph)
    paths.append(os.path.join(out_dir, "mixing.txt"))
    write_mixing(paths[-1], exp.mixing)
    return paths


# ------------------------------------------------------------------------------
# ---- Runs --------------------------------------------------------------------
# ------------------------------------------------------------------------------


def _run_once(exp: Experiment, mu: float, init_seed: int) -> IterateTrace:
    cfg = exp.config
    run_cfg = RunConfig(
        rho=exp.rho,
        mu=mu,
        max_iters=cfg.max_iters,
        tol_grad=resolve_tol_grad(exp.run_config(), exp.y),
        tol_consensus=cfg.tol_consensus,
        seed=cfg.seed,
        safety=cfg.safety,
        halt_on_leave=cfg.halt_on_leave,
    )
    z0 = exp.initial_point(init_seed)
    return run(cfg.engine, z0, run_cfg, exp.mixing, exp.partition)  # type: ignore[arg-type]


def run_experiment(
    config: Union[ExperimentConfig, PathLike],
    output_dir: Optional[PathLike] = None,
) -> IterateTrace:
    """Run one experiment and write trace.csv, summary.json and config.resolved.cfg.

    Args:
        config: Config object or path (bare names fall back to the bundled configs)
        output_dir: Overrides the config's output_dir

    Returns:
        The run trace; the run succeeded iff its status is GradToleranceMet

    Raises:
        ConfigError: If the config is invalid
        StepsizeError: If mu = auto and omega >= 1/2
        OSError: If the output directory cannot be written
    """
    exp = prepare_experiment(config)
    cfg = exp.config
    mu = exp.stepsize()
    out_dir = cfg.output_dir if output_dir is None else output_dir
    os.makedirs(out_dir, exist_ok=True)

    trace = _run_once(exp, mu, cfg.init_seed)

    write_trace_csv(os.path.join(out_dir, TRACE_FILE), trace)
    write_summary_json(os.path.join(out_dir, SUMMARY_FILE), trace)
    with open(os.path.join(out_dir, RESOLVED_CONFIG_FILE), "w") as f:
        f.write(cfg.echo(mu=mu, rho=exp.rho, tol_grad=trace.tol_grad, output_dir=str(out_dir)))
    return trace


def _trial_success(trace: IterateTrace, cfg: ExperimentConfig, y_energy: float) -> bool:
    final = trace.final
    return (
        not trace.diverged and final.consensus_err <= cfg.tol_consensus
        and final.opt_gap <= TOLERANCES.relative_gap * y_energy
    )


def monte_carlo(
    config: Union[ExperimentConfig, PathLike],
    trials: Optional[int] = None,
    output_dir: Optional[PathLike] = None,
) -> dict[str, Any]:
    """Run independent initializations of one instance and summarize them.

    Trial t starts from init_seed + t, so any trial can be replayed with
    run_experiment by setting init_seed. A trial succeeds when its final
    consensus error is at most tol_consensus and opt_gap / ||Y||_F^2 at most 1e-4.

    Returns:
        Summary with success fractions overall and among trials that never left
        B_rho, the fraction that left, and one entry per trial; also written to
        mc_summary.json in the output directory
    """
    exp = prepare_experiment(config)
    cfg = exp.config
    trials = cfg.trials if trials is None else trials
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    mu = exp.stepsize()
    y_energy = frob_norm(exp.y)**2

    per_trial = []
    for t in range(trials):
        seed = cfg.init_seed + t
        trace = _run_once(exp, mu, seed)
        entry: dict[str, Any] = {'trial': t, 'init_seed': seed}
        entry.update(trace.summary())
        entry['descent_violations'] = trace.descent_violations
        entry['success'] = _trial_success(trace, cfg, y_energy)
        per_trial.append(entry)
        logger.info("Trial %d (init_seed %d): %s, success=%s", t, seed, entry['status'], entry['success'])

    in_ball = [e for e in per_trial if not e['left_ball_ever']]
    summary: dict[str, Any] = {
        'trials': trials,
        'mu': mu,
        'rho': exp.rho,
        'success_fraction': sum(e['success'] for e in per_trial) / trials,
        'success_fraction_in_ball': (sum(e['success'] for e in in_ball) / len(in_ball)) if in_ball else None,
        'left_ball_fraction': 1.0 - len(in_ball) / trials,
        'grad_tolerance_fraction': sum(e['status'] == RunStatus.GRAD_TOLERANCE_MET.value
                                       for e in per_trial) / trials,
        'descent_violations': sum(e['descent_violations'] for e in per_trial),
        'seeds': [e['init_seed'] for e in per_trial],
        'per_trial': per_trial,
    }

    out_dir = cfg.output_dir if output_dir is None else output_dir
    os.makedirs(out_dir, exist_ok=True)
    write_json(os.path.join(out_dir, MC_SUMMARY_FILE), summary)
    return summary
