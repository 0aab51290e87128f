"""
Shared plumbing for the CLI commands: run-config resolution, state loading,
element parsing and report writing.

Resolution order for every RunConfig field: dataclass default, then the JSON
file given with --config, then any flag given explicitly on the command line.
"""

import json
import logging
import os
import re
import sys
from dataclasses import asdict, dataclass
from types import SimpleNamespace
from typing import Optional

import numpy as np

from config import Config, __version__
from errors import ArgumentError
from models import DensityMatrix, ElementIndex, NoiseConfig, parse_bitstring
from protocol.noise import make_ghz_supplier, noisy_system
from protocol.sparse_scan import prepare_fig5_state
from protocol.state_core import epr_state, ghz_state, maximally_mixed, random_density_matrix

logger = logging.getLogger(__name__)

NAMED_STATES = ('epr', 'ghzN', 'fig5', 'mixed', 'random')


@dataclass
class RunConfig:
    state: Optional[str] = None
    state_file: Optional[str] = None
    theta: float = 56.0
    phi: float = 20.0
    num_qubits: Optional[int] = None
    rank: Optional[int] = None
    state_seed: int = 0
    m: Optional[str] = None
    nn: Optional[str] = None
    shots: int = 0
    exact: bool = False
    seed: int = 0
    p: float = 1.0
    ghz_p: float = 1.0
    depolarizing: float = 0.0
    postselect: str = 'subspace'
    threshold: float = Config.POPULATION_THRESHOLD
    reuse: bool = False
    dump_branches: bool = False
    teleporter_class: Optional[str] = None
    fit_target: Optional[float] = None
    tol: float = 1e-8
    jobs: int = Config.N_JOBS
    qubit_cap: int = Config.QUBIT_CAP
    out: Optional[str] = None
    format: str = 'json'

    @property
    def sampled(self):
        return not self.exact and self.shots > 0

    @property
    def noise(self):
        return NoiseConfig(ghz_werner_p=self.ghz_p, system_depolarizing=self.depolarizing)


# -----------------------------------------------------------------------------
# Argument groups
# -----------------------------------------------------------------------------
def add_common_args(parser):
    parser.add_argument('--config', help="JSON file with RunConfig values")
    parser.add_argument('--emit-config', action='store_true', help="Print the resolved config and exit")
    parser.add_argument('--jobs', type=int, default=None, help="Parallel workers (joblib)")
    parser.add_argument('--qubit-cap', dest='qubit_cap', type=int, default=None)
    parser.add_argument('--out', default=None, help="Output file (bare names go to the output directory)")
    parser.add_argument('--format', choices=('json', 'csv'), default=None)


def add_state_args(parser):
    parser.add_argument('--state', default=None, help="epr | ghzN (e.g. ghz3) | fig5 | mixed | random")
    parser.add_argument('--state-file', dest='state_file', default=None,
                        help="JSON with num_qubits and matrix or amplitudes as [re, im] pairs")
    parser.add_argument('--theta', type=float, default=None, help="fig5 rotation angle in degrees")
    parser.add_argument('--phi', type=float, default=None, help="fig5 phase angle in degrees")
    parser.add_argument('--n', dest='num_qubits', type=int, default=None, help="Number of system qubits")
    parser.add_argument('--rank', type=int, default=None)
    parser.add_argument('--state-seed', dest='state_seed', type=int, default=None)


def add_element_args(parser):
    parser.add_argument('--m', default=None, help="Row bitstring, qubit 1 first")
    parser.add_argument('--nn', default=None, help="Column bitstring, qubit 1 first")


def add_sampling_args(parser):
    parser.add_argument('--exact', action='store_true', default=None)
    parser.add_argument('--shots', type=int, default=None)
    parser.add_argument('--seed', type=int, default=None)


def add_noise_args(parser):
    parser.add_argument('--ghz-p', dest='ghz_p', type=float, default=None, help="Werner parameter of the GHZ resource")
    parser.add_argument('--depolarizing', type=float, default=None, help="Depolarizing strength on the system")
    parser.add_argument('--p', type=float, default=None, help="Noise level to divide out of recovered elements")


# -----------------------------------------------------------------------------
# Resolution
# -----------------------------------------------------------------------------
def resolve_config(args):
    values = asdict(RunConfig())
    names = set(values)

    if getattr(args, 'config', None):
        try:
            with open(args.config) as handle:
                overrides = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ArgumentError(f"Cannot read config file {args.config}: {exc}") from exc
        unknown = set(overrides) - names
        if unknown:
            raise ArgumentError(f"Unknown config keys: {sorted(unknown)}")
        values.update(overrides)

    for name in names:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return RunConfig(**values)


def extension_settings(cfg):
    return SimpleNamespace(N_JOBS=cfg.jobs, QUBIT_CAP=cfg.qubit_cap)


def load_state(cfg, apply_noise=True):
    if cfg.state and cfg.state_file:
        raise ArgumentError("Give either --state or --state-file, not both")
    if cfg.state_file:
        try:
            with open(cfg.state_file) as handle:
                rho = DensityMatrix.from_json(json.load(handle))
        except (OSError, json.JSONDecodeError) as exc:
            raise ArgumentError(f"Cannot read state file {cfg.state_file}: {exc}") from exc
    elif cfg.state:
        rho = _named_state(cfg)
    else:
        raise ArgumentError("No state given: use --state or --state-file")

    if cfg.num_qubits is not None and cfg.num_qubits != rho.num_qubits:
        raise ArgumentError(f"--n {cfg.num_qubits} does not match the {rho.num_qubits}-qubit state")
    logger.info("Loaded %d-qubit state (%s)", rho.num_qubits, cfg.state or cfg.state_file)
    return noisy_system(rho, cfg.noise) if apply_noise else rho


def _named_state(cfg):
    name = cfg.state.lower()
    if name == 'epr':
        return epr_state().projector()
    if name == 'fig5':
        return prepare_fig5_state(cfg.theta, cfg.phi)
    match = re.fullmatch(r'ghz(\d+)', name)
    if match:
        return ghz_state(int(match.group(1))).projector()
    if name in ('mixed', 'random'):
        if cfg.num_qubits is None:
            raise ArgumentError(f"--state {name} needs --n")
        if name == 'mixed':
            return maximally_mixed(cfg.num_qubits)
        return random_density_matrix(cfg.num_qubits, cfg.rank, np.random.default_rng(cfg.state_seed))
    raise ArgumentError(f"Unknown state {cfg.state!r}; expected one of {NAMED_STATES}")


def parse_element(cfg, num_qubits=None):
    if cfg.m is None or cfg.nn is None:
        raise ArgumentError("Both --m and --nn are required")
    if len(cfg.m) != len(cfg.nn):
        raise ArgumentError(f"Bitstrings {cfg.m!r} and {cfg.nn!r} differ in length")
    num_qubits = num_qubits or cfg.num_qubits or len(cfg.m)
    if len(cfg.m) != num_qubits:
        raise ArgumentError(f"Bitstrings have {len(cfg.m)} bits, state has {num_qubits} qubits")
    return ElementIndex(num_qubits, parse_bitstring(cfg.m), parse_bitstring(cfg.nn))


def ghz_supplier(cfg):
    return make_ghz_supplier(cfg.noise)


# -----------------------------------------------------------------------------
# Output
# -----------------------------------------------------------------------------
def _to_builtin(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Cannot serialise {type(value).__name__}")


def _recorded(cfg):
    """Config as embedded in reports; the output path is not part of the run."""
    values = asdict(cfg)
    values.pop('out')
    return values


def provenance(cfg, command):
    return {'version': __version__, 'command': command, 'seed': cfg.seed, 'config': _recorded(cfg)}


def _destination(out):
    if os.path.dirname(out):
        path = out
    else:
        path = os.path.join(Config.OUTPUT_DIR, out)
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    return path


def render(payload, cfg, command, frame=None):
    if cfg.format == 'csv':
        if frame is None:
            raise ArgumentError(f"'{command}' has no CSV form")
        header = f"# teleprobe {__version__} {command} seed={cfg.seed} config={json.dumps(_recorded(cfg), sort_keys=True)}\n"
        return header + frame.to_csv(index=False, float_format='%.17g', lineterminator='\n')
    document = dict(payload, provenance=provenance(cfg, command))
    return json.dumps(document, indent=2, default=_to_builtin) + '\n'


def write_report(payload, cfg, command, frame=None):
    text = render(payload, cfg, command, frame)
    if cfg.out is None:
        sys.stdout.write(text)
        return None
    path = _destination(cfg.out)
    with open(path, 'w', newline='') as handle:
        handle.write(text)
    logger.info("Wrote %s report to %s", command, path)
    return path


def emit_config(cfg):
    sys.stdout.write(json.dumps(asdict(cfg), indent=2) + '\n')
