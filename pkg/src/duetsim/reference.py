"""Numerical reference implementations used to validate the engine models.

Everything here is plain double-precision math with no awareness of the
hardware mapping: the recurrence below is the ground truth both engines are
checked against, and the matrix products are literal loop definitions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SsmTokenParams:
    """Per-token selective-SSM parameters.

    ``delta``, ``a_log``, ``d``, ``u`` are per-channel vectors of length ED;
    ``b`` and ``c`` are state-axis vectors of length N shared by all channels.
    """

    delta: np.ndarray
    a_log: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        ed = self.delta.shape[0]
        n = self.b.shape[0]
        for name in ("a_log", "d", "u"):
            if getattr(self, name).shape != (ed,):
                raise ValueError(f"{name} must have shape ({ed},)")
        if self.c.shape != (n,):
            raise ValueError(f"c must have shape ({n},)")
        arrays = (self.delta, self.a_log, self.b, self.c, self.d, self.u)
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("SSM parameters must be finite")
        if np.any(self.delta <= 0):
            raise ValueError("delta must be positive")

    @property
    def ed(self) -> int:
        return self.delta.shape[0]

    @property
    def n_state(self) -> int:
        return self.b.shape[0]

    @property
    def a_bar(self) -> np.ndarray:
        """Discretized per-channel state transition, exp(delta * a)."""
        return np.exp(self.delta * self.a_log)

    @property
    def u_bar(self) -> np.ndarray:
        """Discretized input, delta * u."""
        return self.delta * self.u


@dataclass(frozen=True)
class SsmState:
    """Recurrent state: one scalar per (channel, state) cell, shape ED x N."""

    x: np.ndarray

    def __post_init__(self):
        if self.x.ndim != 2:
            raise ValueError("state must be a 2-D array (ED x N)")
        if not np.all(np.isfinite(self.x)):
            raise ValueError("state entries must be finite")

    @classmethod
    def zeros(cls, ed: int, n_state: int) -> "SsmState":
        return cls(np.zeros((ed, n_state), dtype=np.float64))


def ssm_step_ref(state: SsmState, p: SsmTokenParams) -> tuple[SsmState, np.ndarray]:
    """One recurrence step.

    x'[e, n] = exp(delta[e] * a[e]) * x[e, n] + (delta[e] * u[e]) * b[n]
    y[e]     = sum_n c[n] * x'[e, n] + d[e] * u[e]
    """
    if state.x.shape != (p.ed, p.n_state):
        raise ValueError(
            f"state shape {state.x.shape} does not match params "
            f"({p.ed}, {p.n_state})")
    x_new = p.a_bar[:, None] * state.x + p.u_bar[:, None] * p.b[None, :]
    y = x_new @ p.c + p.d * p.u
    return SsmState(x_new), y


def ssm_scan_ref(params: list[SsmTokenParams],
                 init: SsmState) -> tuple[SsmState, np.ndarray]:
    """Sequential fold of ``ssm_step_ref`` over a token sequence.

    Returns the final state and the stacked outputs, shape L x ED.
    """
    if len(params) < 1:
        raise ValueError("need at least one token")
    state = init
    ys = np.empty((len(params), params[0].ed), dtype=np.float64)
    for k, p in enumerate(params):
        state, ys[k] = ssm_step_ref(state, p)
    return state, ys


def reorder_equivalence(p: SsmTokenParams, fp16: bool = False,
                        max_ulp: int = 2) -> bool:
    """Check (delta * b) * u == (delta * u) * b elementwise.

    Exact in double precision (scalar associativity up to rounding of the
    same two multiplies); in emulated FP16 the two evaluation orders must
    agree within ``max_ulp`` units in the last place.
    """
    if not fp16:
        lhs = (p.delta[:, None] * p.b[None, :]) * p.u[:, None]
        rhs = (p.delta[:, None] * p.u[:, None]) * p.b[None, :]
        return bool(np.allclose(lhs, rhs, rtol=1e-15, atol=0.0))
    f16 = np.float16
    lhs = (f16(p.delta)[:, None] * f16(p.b)[None, :]) * f16(p.u)[:, None]
    rhs = (f16(p.delta)[:, None] * f16(p.u)[:, None]) * f16(p.b)[None, :]
    ulps = np.abs(lhs.view(np.int16).astype(np.int64)
                  - rhs.view(np.int16).astype(np.int64))
    return bool(np.max(ulps) <= max_ulp)


def gemm_ref(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Triple-loop matrix product in double precision."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"shape mismatch: {a.shape} x {b.shape}")
    m, k = a.shape
    n = b.shape[1]
    out = np.zeros((m, n), dtype=np.float64)
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for t in range(k):
                acc += float(a[i, t]) * float(b[t, j])
            out[i, j] = acc
    return out


def gemv_ref(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Loop-definition vector-matrix product: y[j] = sum_t x[t] * w[t, j]."""
    if x.ndim != 1 or w.ndim != 2 or x.shape[0] != w.shape[0]:
        raise ValueError(f"shape mismatch: {x.shape} x {w.shape}")
    k, n = w.shape
    out = np.zeros(n, dtype=np.float64)
    for j in range(n):
        acc = 0.0
        for t in range(k):
            acc += float(x[t]) * float(w[t, j])
        out[j] = acc
    return out


def random_token_params(rng: np.random.Generator, ed: int, n_state: int,
                        stable: bool = True) -> SsmTokenParams:
    """Random well-conditioned parameters for validation runs."""
    a = -np.abs(rng.normal(0.5, 0.3, ed)) if stable else rng.normal(0, 0.5, ed)
    return SsmTokenParams(
        delta=rng.uniform(0.05, 1.0, ed),
        a_log=a,
        b=rng.normal(0, 1, n_state),
        c=rng.normal(0, 1, n_state),
        d=rng.normal(0, 1, ed),
        u=rng.normal(0, 1, ed),
    )
