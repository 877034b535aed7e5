"""Synthetic smooth background curvature fields and their rank-one targets.

A background field is a matrix-valued polynomial on R^4 with i.i.d.
uniform coefficients, deterministic in its seed.  It stands in for the
slowly varying part of a glued curvature: the only things downstream code
ever consumes are the field's pointwise values at the two marked points
and their rank-one completion data (one magnitude and two rotations per
point).  No differential constraint is imposed; pointwise genericity is
what matters, and it is certified at construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .linalg3 import DEFAULT_REL_TOL, StratumTag, classify_stratum
from .instanton import TwoPointConfig
from .rank_one import OutcomeKind, RankOnePair, solve_rank_one
from .rotations import rotation_distance

MAX_GENERICITY_RETRIES = 100


class DegenerateFieldError(RuntimeError):
    """The field failed a genericity requirement at a marked point."""


@dataclass(frozen=True)
class BackgroundField:
    """Matrix-valued polynomial x -> sum_k coeffs[k] . x^(k).

    coeffs[k] has shape (4,)*k + (3, 3); evaluation contracts each of the
    first k axes with x.  seed/degree/amplitude/attempt reproduce the
    coefficients exactly.
    """

    coeffs: tuple[np.ndarray, ...]
    degree: int
    amplitude: float
    seed: int
    attempt: int

    def __call__(self, x) -> np.ndarray:
        return eval_background(self, x)


def _draw_coeffs(rng: np.random.Generator, degree: int, amplitude: float) -> tuple[np.ndarray, ...]:
    return tuple(rng.uniform(-amplitude, amplitude, size=(4,) * k + (3, 3)) for k in range(degree + 1))


def make_background(
    seed: int,
    degree: int = 2,
    amplitude: float = 1.0,
    check_points: list | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
) -> BackgroundField:
    """Seeded random polynomial field, certified generic at the check points.

    Coefficients are i.i.d. uniform in [-amplitude, amplitude].  If the
    singular values of the field at any check point fail to be distinct
    and positive at rel_tol, the coefficients are redrawn from a derived
    sub-seed, up to MAX_GENERICITY_RETRIES times.
    """
    if not amplitude > 0.0:
        raise ValueError("amplitude must be positive")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    points = [np.asarray(pt, dtype=float) for pt in (check_points or [])]
    for attempt in range(MAX_GENERICITY_RETRIES):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(attempt,)))
        field = BackgroundField(
            coeffs=_draw_coeffs(rng, degree, amplitude),
            degree=degree,
            amplitude=amplitude,
            seed=seed,
            attempt=attempt,
        )
        if all(classify_stratum(eval_background(field, pt), rel_tol).tag == StratumTag.GENERIC for pt in points):
            return field
    raise DegenerateFieldError(
        f"no generic field found for seed {seed} after {MAX_GENERICITY_RETRIES} attempts"
    )


def eval_background(field: BackgroundField, x) -> np.ndarray:
    """Evaluate the polynomial at x; x may carry leading batch axes."""
    x = np.asarray(x, dtype=float)
    batch = x.shape[:-1]
    xf = x.reshape(-1, 4)
    n = xf.shape[0]
    out = np.zeros((n, 3, 3))
    out += field.coeffs[0]
    for k in range(1, field.degree + 1):
        term = np.broadcast_to(field.coeffs[k], (n,) + field.coeffs[k].shape)
        for _ in range(k):
            # contract one coefficient axis with x at a time
            term = np.einsum("na...,na->n...", term, xf)
        out += term
    return out.reshape(batch + (3, 3))


@dataclass(frozen=True)
class TargetData:
    """Rank-one completion data of the field at the two marked points.

    m_p and m_q each hold the two completion rotations; index i of m_p
    corresponds to index i of m_q (labels at p follow the nonnegative-n1
    convention of the closed-form solver, labels at q are then matched to
    p by geodesic proximity).  match_margin is the gap between the
    rejected and the chosen matching, a health measure that shrinks when
    the two marked points stop resolving the labels.
    """

    s_p: float
    s_q: float
    m_p: tuple[np.ndarray, np.ndarray]
    m_q: tuple[np.ndarray, np.ndarray]
    residuals_p: tuple[float, float]
    residuals_q: tuple[float, float]
    match_margin: float
    ordering: str = "nonnegative-n1 at p; q labels matched to p by proximity"


def _two_pairs(p_matrix: np.ndarray, rel_tol: float, where: str) -> tuple[RankOnePair, RankOnePair]:
    outcome = solve_rank_one(p_matrix, rel_tol)
    if outcome.kind != OutcomeKind.TWO_DISTINCT:
        raise DegenerateFieldError(
            f"field is {outcome.stratum.value} at {where}; resample the field"
        )
    return outcome.pairs[0], outcome.pairs[1]


def targets(field: BackgroundField, cfg: TwoPointConfig, rel_tol: float = DEFAULT_REL_TOL) -> TargetData:
    """Magnitudes and rotation pairs that complete the field to rank one at p and q."""
    pair_p = _two_pairs(eval_background(field, cfg.p), rel_tol, "p")
    pair_q = _two_pairs(eval_background(field, cfg.q), rel_tol, "q")

    keep = sum(float(rotation_distance(pair_p[i].m, pair_q[i].m)) for i in range(2))
    swap = sum(float(rotation_distance(pair_p[i].m, pair_q[1 - i].m)) for i in range(2))
    if swap < keep:
        pair_q = (pair_q[1], pair_q[0])
    return TargetData(
        s_p=pair_p[0].s,
        s_q=pair_q[0].s,
        m_p=(pair_p[0].m, pair_p[1].m),
        m_q=(pair_q[0].m, pair_q[1].m),
        residuals_p=(pair_p[0].residual, pair_p[1].residual),
        residuals_q=(pair_q[0].residual, pair_q[1].residual),
        match_margin=abs(swap - keep),
    )


def field_to_json(field: BackgroundField) -> str:
    """Serialize coefficients and provenance; replayable byte for byte."""
    doc = {
        "seed": field.seed,
        "degree": field.degree,
        "amplitude": field.amplitude,
        "attempt": field.attempt,
        "coeffs": [c.tolist() for c in field.coeffs],
    }
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def field_from_json(text: str) -> BackgroundField:
    doc = json.loads(text)
    coeffs = tuple(np.asarray(c, dtype=float) for c in doc["coeffs"])
    return BackgroundField(
        coeffs=coeffs,
        degree=int(doc["degree"]),
        amplitude=float(doc["amplitude"]),
        seed=int(doc["seed"]),
        attempt=int(doc["attempt"]),
    )
