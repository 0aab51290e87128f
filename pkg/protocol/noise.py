"""Noise knobs: depolarizing on the system state, Werner mixing on the GHZ resource."""

import logging

from errors import ArgumentError
from models import DensityMatrix
from protocol.state_core import maximally_mixed, werner_ghz

logger = logging.getLogger(__name__)


def apply_depolarizing(rho, strength):
    """(1 - strength) rho + strength I / 2^N."""
    if not 0.0 <= strength <= 1.0:
        raise ArgumentError(f"Depolarizing strength must lie in [0, 1], got {strength}")
    if strength == 0.0:
        return rho
    mixed = maximally_mixed(rho.num_qubits).entries
    return DensityMatrix(rho.num_qubits, (1 - strength) * rho.entries + strength * mixed, check=False)


def ghz_resource(width, noise):
    return werner_ghz(width, noise.ghz_werner_p)


def make_ghz_supplier(noise):
    """width -> GHZ resource under the given NoiseConfig (what scan and benchmark consume)."""
    def supplier(width):
        return ghz_resource(width, noise)
    return supplier


def noisy_system(rho, noise):
    if noise.system_depolarizing:
        logger.debug("Depolarizing system state with strength %.4f", noise.system_depolarizing)
    return apply_depolarizing(rho, noise.system_depolarizing)
