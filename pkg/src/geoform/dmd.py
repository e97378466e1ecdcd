"""Batch and online Dynamic Mode Decomposition.

The online form keeps ``T = Q P`` with ``Q = B A^T`` and ``P = (A A^T + ridge I)^-1``
and absorbs one snapshot pair at a time with the Sherman-Morrison identity, so
no matrix is ever inverted after initialisation.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

DEFAULT_RIDGE = 1e-6


class SingularGram(np.linalg.LinAlgError):
    pass


class BreakdownError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DmdState:
    T: np.ndarray
    P: np.ndarray
    count: int
    ridge: float = DEFAULT_RIDGE

    @property
    def dim(self) -> int:
        return self.T.shape[0]


def _check_pair(A, B):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape != B.shape:
        raise ValueError(f"A {A.shape} and B {B.shape} differ in shape")
    if A.shape[1] < 1:
        raise ValueError("need at least one snapshot column")
    return A, B


def _gram(A, ridge):
    gram = A @ A.T + ridge * np.eye(A.shape[0])
    if ridge == 0 and abs(np.linalg.det(gram)) < 1e-12:
        raise SingularGram("A A^T is singular; snapshots do not span the state space")
    return gram


def batch_fit(A, B, ridge: float = 0.0) -> np.ndarray:
    """Least-squares operator ``T = B A^T (A A^T + ridge I)^-1``."""
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    A, B = _check_pair(A, B)
    gram = _gram(A, ridge)
    # T gram = B A^T  ->  gram^T T^T = A B^T
    return np.linalg.solve(gram.T, A @ B.T).T


def init_online(A, B, ridge: float = DEFAULT_RIDGE) -> DmdState:
    """Seed the online state from the data-collection snapshots.

    ``T`` starts from the pseudoinverse fit ``B A^+``; with ``ridge = 0`` and
    full-rank ``A`` this is exactly :func:`batch_fit`.  ``P`` carries the ridge
    so later updates stay well defined on rank-deficient starts.
    """
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    A, B = _check_pair(A, B)
    gram = _gram(A, ridge)
    if ridge == 0:
        T = batch_fit(A, B, 0.0)
    else:
        T = B @ np.linalg.pinv(A)
    P = np.linalg.inv(gram)
    P = 0.5 * (P + P.T)
    return DmdState(T=T, P=P, count=A.shape[1], ridge=ridge)


def predict(st: DmdState, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (st.dim,):
        raise ValueError(f"state of shape {x.shape} for operator of dim {st.dim}")
    return st.T @ x


def update(st: DmdState, a, b, printed_denominator: bool = False) -> DmdState:
    """Absorb the pair ``(a, b)`` (``b`` follows ``a``).

    ``printed_denominator`` swaps ``1 + a^T P a`` for ``1 + a^T P b`` in the
    operator update; that variant no longer equals a batch refit and exists
    only for comparison.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    Pa = st.P @ a
    denom = 1.0 + a @ Pa
    if denom < 1e-12:
        raise BreakdownError(f"Sherman-Morrison denominator {denom}")
    t_denom = 1.0 + a @ st.P @ b if printed_denominator else denom
    if abs(t_denom) < 1e-12:
        raise BreakdownError(f"operator update denominator {t_denom}")
    T = st.T + np.outer(b - st.T @ a, Pa) / t_denom
    P = st.P - np.outer(Pa, Pa) / denom
    return replace(st, T=T, P=0.5 * (P + P.T), count=st.count + 1)
