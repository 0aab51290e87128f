"""
Density-matrix element recovery from the teleportation engine.

The prober of a target branch, once its Pauli correction is undone, holds
[[rho_mm, rho_mn], [rho_nm, rho_nn]] / (rho_mm + rho_nn), so
<X> = 2 Re(rho_mn) / T and <Y> = -2 Im(rho_mn) / T with T = rho_mm + rho_nn.
The recovered element is therefore T * (<X> - i<Y>) / 2.

T itself is read from the same run: in exact mode it is the probability of
the accepted branches, in sampled mode the acceptance fraction. Both are
rescaled when only a subset of the target branches is post-selected.

Randomness is counter based: numpy's Philox keyed by
SeedSequence([seed, *stream labels]) with the shot-chunk index in the counter,
so chunks can be drawn in any order or in parallel and merge to the same sums.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from errors import ArgumentError, InsufficientStatisticsError, UnmeasurableElementError
from extensions import workers
from models import ElementEstimate, ShotRecord
from protocol.plan_compiler import compile_plan
from protocol.state_core import ghz_state
from protocol.teleport_engine import prober_correction, run_exact, weighted_bloch

logger = logging.getLogger(__name__)

POSTSELECT_MODES = ('subspace', 'identity')

# stream-label namespaces for the counter-based generator
ELEMENT_STREAM, CLASS_STREAM, POPULATION_STREAM = 0, 1, 2

MIN_POPULATION_SUM = 1e-12


def shot_generator(seed, labels, chunk_index=0):
    if seed < 0:
        raise ArgumentError(f"seed must be a non-negative integer, got {seed}")
    key = np.random.SeedSequence([int(seed), *map(int, labels)]).generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=int(chunk_index) << 128))


def ideal_ghz(plan):
    return ghz_state(plan.ghz_width).projector()


def accepted_branch_ids(table, postselect='subspace'):
    if postselect == 'subspace':
        return table.target_branch_ids
    if postselect == 'identity':
        return tuple(i for i in table.target_branch_ids
                     if table.branches[i].correction.is_identity and not table.branches[i].phase_flip)
    raise ArgumentError(f"Unknown post-selection mode {postselect!r}; expected one of {POSTSELECT_MODES}")


# -----------------------------------------------------------------------------
# Exact mode
# -----------------------------------------------------------------------------
def estimate_from_table(table, postselect='subspace'):
    element = table.plan.element
    ids = accepted_branch_ids(table, postselect)
    scale = len(table.target_branch_ids) / len(ids)
    population_sum = scale * float(sum(table.branches[i].probability for i in ids))
    if population_sum <= MIN_POPULATION_SUM:
        raise UnmeasurableElementError(
            f"Element {element.label} is unmeasurable: rho_mm + rho_nn = {population_sum:.3e}")

    bloch = scale * weighted_bloch(table, ids, first_index=element.m)
    value = complex(bloch[0], -bloch[1]) / 2
    return ElementEstimate(
        element=element,
        value=value,
        normalized_value=value / population_sum,
        x_mean=float(bloch[0] / population_sum),
        y_mean=float(bloch[1] / population_sum),
        stderr_re=0.0,
        stderr_im=0.0,
        shots_used=0,
        accepted_shots=0,
        population_sum=population_sum,
        postselect=postselect,
    )


def estimate_exact(rho, element, ghz=None, postselect='subspace'):
    plan = compile_plan(element)
    ghz = ideal_ghz(plan) if ghz is None else ghz
    table = run_exact(rho, plan, ghz)
    return estimate_from_table(table, postselect)


def estimate_class_exact(rho, teleporter_class, ghz=None):
    """Every element of a teleporter class from one branch table (branch reuse)."""
    members = teleporter_class.members()
    plan = compile_plan(members[0])
    ghz = ideal_ghz(plan) if ghz is None else ghz
    table = run_exact(rho, plan, ghz)

    estimates = {}
    for element in members:
        ids = _branches_for(table, element)
        population_sum = float(sum(table.branches[i].probability for i in ids))
        if population_sum <= MIN_POPULATION_SUM:
            logger.debug("Skipping unmeasurable element %s", element.label)
            continue
        bloch = weighted_bloch(table, ids, first_index=element.m)
        value = complex(bloch[0], -bloch[1]) / 2
        estimates[element] = ElementEstimate(
            element=element,
            value=value,
            normalized_value=value / population_sum,
            x_mean=float(bloch[0] / population_sum),
            y_mean=float(bloch[1] / population_sum),
            stderr_re=0.0,
            stderr_im=0.0,
            shots_used=0,
            accepted_shots=0,
            population_sum=population_sum,
        )
    return estimates


def _branches_for(table, element):
    target = {element.m, element.n}
    return tuple(b.branch_id for b in table.branches if set(b.subspace) == target)


# -----------------------------------------------------------------------------
# Sampled mode
# -----------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ShotBatch:
    branch_ids: np.ndarray
    bases: np.ndarray      # 0 -> X, 1 -> Y
    results: np.ndarray    # +1 / -1, raw prober outcome

    def records(self, table):
        for branch_id, basis, result in zip(self.branch_ids, self.bases, self.results):
            branch = table.branches[int(branch_id)]
            yield ShotRecord(
                branch_id=int(branch_id),
                z_outcomes=branch.z_outcomes,
                bell_outcomes=branch.bell_outcomes,
                prober_basis='XY'[int(basis)],
                prober_result=int(result),
            )


def _sampling_inputs(table):
    probabilities = table.probabilities().copy()
    raw_x = np.zeros(len(probabilities))
    raw_y = np.zeros(len(probabilities))
    for branch in table.branches:
        if branch.defined:
            raw_x[branch.branch_id], raw_y[branch.branch_id], _ = branch.prober_state.bloch()
        else:
            probabilities[branch.branch_id] = 0.0
    return probabilities / probabilities.sum(), raw_x, raw_y


def _draw_chunk(probabilities, raw_x, raw_y, seed, labels, chunk_index, size):
    rng = shot_generator(seed, labels, chunk_index)
    branch_ids = rng.choice(len(probabilities), size=size, p=probabilities)
    bases = rng.integers(0, 2, size=size)
    expect = np.where(bases == 0, raw_x[branch_ids], raw_y[branch_ids])
    results = np.where(rng.random(size) < (1.0 + expect) / 2.0, 1, -1)
    return ShotBatch(branch_ids, bases, results)


def _count_chunk(job):
    """Per group: accepted, X shots, sum of corrected X, Y shots, sum of corrected Y."""
    (probabilities, raw_x, raw_y, seed, labels, chunk_index, size,
     group_of_branch, sign_x, sign_y, n_groups) = job
    batch = _draw_chunk(probabilities, raw_x, raw_y, seed, labels, chunk_index, size)

    counts = np.zeros((n_groups, 5))
    groups = group_of_branch[batch.branch_ids]
    corrected_x = batch.results * sign_x[batch.branch_ids]
    corrected_y = batch.results * sign_y[batch.branch_ids]
    is_x = batch.bases == 0
    for g in range(n_groups):
        hit = groups == g
        counts[g] = (
            hit.sum(),
            (hit & is_x).sum(),
            corrected_x[hit & is_x].sum(),
            (hit & ~is_x).sum(),
            corrected_y[hit & ~is_x].sum(),
        )
    return counts


def _chunks(shots):
    size = workers.shot_chunk
    return [(c, min(size, shots - c * size)) for c in range(-(-shots // size))]


def sample_shots(table, shots, seed, labels):
    """Raw shot stream (same draws the estimators count)."""
    probabilities, raw_x, raw_y = _sampling_inputs(table)
    batches = [_draw_chunk(probabilities, raw_x, raw_y, seed, labels, c, size)
               for c, size in _chunks(shots)]
    return ShotBatch(
        np.concatenate([b.branch_ids for b in batches]),
        np.concatenate([b.bases for b in batches]),
        np.concatenate([b.results for b in batches]),
    )


def _run_shots(table, shots, seed, labels, groups):
    """groups: list of (branch ids, first index) -> counts array of shape (len(groups), 5)."""
    if shots < 1:
        raise ArgumentError(f"shots must be >= 1, got {shots}")
    probabilities, raw_x, raw_y = _sampling_inputs(table)

    n_branches = len(table.branches)
    group_of_branch = np.full(n_branches, -1)
    sign_x = np.ones(n_branches)
    sign_y = np.ones(n_branches)
    for g, (ids, first_index) in enumerate(groups):
        for branch_id in ids:
            branch = table.branches[branch_id]
            group_of_branch[branch_id] = g
            letter = prober_correction(branch, first_index).letters
            sign_x[branch_id] = 1.0 if letter in ('I', 'X') else -1.0
            sign_y[branch_id] = 1.0 if letter in ('I', 'Y') else -1.0

    jobs = [(probabilities, raw_x, raw_y, seed, labels, c, size,
             group_of_branch, sign_x, sign_y, len(groups))
            for c, size in _chunks(shots)]
    logger.debug("Sampling %d shots in %d chunks", shots, len(jobs))
    return np.sum(workers.map(_count_chunk, jobs), axis=0)


def _estimate_from_counts(element, counts, shots, scale, postselect='subspace'):
    accepted, n_x, sum_x, n_y, sum_y = counts
    accepted = int(accepted)
    if accepted == 0:
        raise InsufficientStatisticsError(
            f"No shots accepted for element {element.label} out of {shots}", accepted_shots=0)
    if n_x == 0 or n_y == 0:
        raise InsufficientStatisticsError(
            f"Element {element.label}: accepted shots cover only one prober basis",
            accepted_shots=accepted)

    x_mean, y_mean = sum_x / n_x, sum_y / n_y
    se_x = np.sqrt(_pm1_variance(x_mean, n_x) / n_x)
    se_y = np.sqrt(_pm1_variance(y_mean, n_y) / n_y)

    fraction = accepted / shots
    population_sum = scale * fraction
    se_population = scale * np.sqrt(fraction * (1.0 - fraction) / shots)

    normalized = complex(x_mean, -y_mean) / 2
    # delta method for value = normalized * population_sum
    stderr_re = np.hypot(population_sum * se_x / 2, x_mean / 2 * se_population)
    stderr_im = np.hypot(population_sum * se_y / 2, y_mean / 2 * se_population)
    return ElementEstimate(
        element=element,
        value=normalized * population_sum,
        normalized_value=normalized,
        x_mean=float(x_mean),
        y_mean=float(y_mean),
        stderr_re=float(stderr_re),
        stderr_im=float(stderr_im),
        shots_used=int(shots),
        accepted_shots=accepted,
        population_sum=float(population_sum),
        postselect=postselect,
    )


def _pm1_variance(mean, count):
    """Unbiased sample variance of +/-1 outcomes with the given mean."""
    if count < 2:
        return 1.0
    return max(0.0, 1.0 - mean ** 2) * count / (count - 1)


def estimate_sampled(rho, element, ghz=None, shots=1000, seed=0, postselect='subspace'):
    plan = compile_plan(element)
    ghz = ideal_ghz(plan) if ghz is None else ghz
    table = run_exact(rho, plan, ghz)
    ids = accepted_branch_ids(table, postselect)
    scale = len(table.target_branch_ids) / len(ids)

    labels = (ELEMENT_STREAM, element.num_qubits, element.m, element.n)
    counts = _run_shots(table, shots, seed, labels, [(ids, element.m)])
    estimate = _estimate_from_counts(element, counts[0], shots, scale, postselect)
    logger.debug("Sampled %s: accepted %d/%d", element.label, estimate.accepted_shots, shots)
    return estimate


def estimate_class_sampled(rho, teleporter_class, ghz=None, shots=1000, seed=0):
    """One shot stream through one teleporter configuration; every branch feeds its own element."""
    members = teleporter_class.members()
    plan = compile_plan(members[0])
    ghz = ideal_ghz(plan) if ghz is None else ghz
    table = run_exact(rho, plan, ghz)

    groups = [(_branches_for(table, element), element.m) for element in members]
    labels = (CLASS_STREAM, teleporter_class.num_qubits, teleporter_class.parity_pattern)
    counts = _run_shots(table, shots, seed, labels, groups)

    estimates = {}
    for element, row in zip(members, counts):
        try:
            estimates[element] = _estimate_from_counts(element, row, shots, 1.0)
        except InsufficientStatisticsError as exc:
            logger.debug("Class %s: %s", teleporter_class.label, exc)
    return estimates


# -----------------------------------------------------------------------------
# Populations and noise correction
# -----------------------------------------------------------------------------
def estimate_populations(rho, shots=None, seed=0):
    """Z^N readout: the exact diagonal, or multinomial frequencies when shots is given."""
    diagonal = rho.diagonal()
    if not shots:
        return diagonal
    if shots < 1:
        raise ArgumentError(f"shots must be >= 1, got {shots}")
    probabilities = np.clip(diagonal, 0.0, None)
    rng = shot_generator(seed, (POPULATION_STREAM, rho.num_qubits))
    counts = rng.multinomial(shots, probabilities / probabilities.sum())
    return counts / shots


def correct_for_noise(estimate, p):
    """Undo the Werner-GHZ contraction: value / p (the normalised prober readout is kept)."""
    if p <= 0.0 or p > 1.0:
        raise ArgumentError(f"Noise level p must lie in (0, 1], got {p}")
    return replace(
        estimate,
        value=estimate.value / p,
        stderr_re=estimate.stderr_re / p,
        stderr_im=estimate.stderr_im / p,
        p_correction=estimate.p_correction * p,
    )
