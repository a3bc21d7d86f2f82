"""Density-matrix reference for the three-mode moment dynamics.

The master equation is solved on the Fock space of (A, C_k, a) truncated at
total excitation n. The Hamiltonian conserves that number and the loss
channels only lower it, so the truncation is exact.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.linalg import expm

from eitdecay.dynamics import A, C, P, CouplingConfig, EvolutionResult

MAX_PHOTONS = 4
TRACE_TOLERANCE = 1e-9


class OracleError(RuntimeError):
    pass


def fock_basis(n: int) -> list[tuple[int, int, int]]:
    """Occupations (n_A, n_C, n_a) with total <= n."""
    return [s for s in itertools.product(range(n + 1), repeat=3) if sum(s) <= n]


def annihilators(basis) -> list[np.ndarray]:
    index = {s: i for i, s in enumerate(basis)}
    ops = []
    for mode in range(3):
        op = np.zeros((len(basis), len(basis)))
        for j, s in enumerate(basis):
            if s[mode] > 0:
                lowered = list(s)
                lowered[mode] -= 1
                op[index[tuple(lowered)], j] = math.sqrt(s[mode])
        ops.append(op)
    return ops


def dark_state_vector(n: int, theta: float, basis) -> np.ndarray:
    """Beam-splitter state sum_m sqrt(C(n,m)) cos^(n-m) (-sin)^m |C:m, a:n-m>."""
    index = {s: i for i, s in enumerate(basis)}
    psi = np.zeros(len(basis), dtype=complex)
    c, s = math.cos(theta), math.sin(theta)
    for m in range(n + 1):
        # cos^n * (-tan)^m written so that theta = pi/2 stays finite
        psi[index[(0, m, n - m)]] = math.sqrt(math.comb(n, m)) * c ** (n - m) * (-s) ** m
    return psi


def _liouvillian(H: np.ndarray, jumps: list[np.ndarray]) -> np.ndarray:
    # row-major vec: vec(X rho Y) = kron(X, Y.T) vec(rho)
    d = H.shape[0]
    eye = np.eye(d)
    L = -1j * (np.kron(H, eye) - np.kron(eye, H.T))
    for J in jumps:
        JdJ = J.conj().T @ J
        L += np.kron(J, J.conj()) - 0.5 * (np.kron(JdJ, eye) + np.kron(eye, JdJ.T))
    return L


def lindblad_oracle(cfg: CouplingConfig, t_grid, n: int | None = None) -> EvolutionResult:
    """Evolve the dark state under the Lindblad equation and return moments.

    H/hbar = Omega (A^dag C + h.c.) + g sqrt(N0) (A^dag a + h.c.), loss
    sqrt(gamma_C) C, and sqrt(gamma_A) on A or on a following
    ``cfg.gamma_A_on_excited_state``.
    """
    if n is None:
        n = cfg.photon_number_n
    if n != int(n) or not 0 <= n <= MAX_PHOTONS:
        raise OracleError(f"oracle supports integer photon numbers 0..{MAX_PHOTONS}, got {n!r}")
    n = int(n)
    times = np.asarray(t_grid, dtype=float)
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("t_grid must be increasing from t >= 0")

    basis = fock_basis(n)
    ops = annihilators(basis)
    H = cfg.omega * (ops[A].T @ ops[C] + ops[C].T @ ops[A])
    H = H + cfg.g_root_N0 * (ops[A].T @ ops[P] + ops[P].T @ ops[A])
    lossy_mode = A if cfg.gamma_A_on_excited_state else P
    jumps = [math.sqrt(cfg.gamma_C) * ops[C], math.sqrt(cfg.gamma_A) * ops[lossy_mode]]
    L = _liouvillian(H.astype(complex), [J.astype(complex) for J in jumps])

    psi = dark_state_vector(n, cfg.theta, basis)
    rho = np.outer(psi, psi.conj()).ravel()
    pairs = [[ops[i].T @ ops[j] for j in range(3)] for i in range(3)]

    moments = []
    t_prev = 0.0
    step, step_prop = None, None
    for t in times:
        if t > t_prev:
            dt = t - t_prev
            # uniform grids differ only by rounding in dt; reuse the step propagator
            if step is None or abs(dt - step) > 1e-13 * step:
                step, step_prop = dt, expm(L * dt)
            rho = step_prop @ rho
            t_prev = t
        R = rho.reshape(len(basis), len(basis))
        trace = np.trace(R).real
        if abs(trace - 1.0) > TRACE_TOLERANCE:
            raise OracleError(f"trace drifted to {trace!r} at t = {t}")
        moments.append([[np.trace(pairs[i][j] @ R) for j in range(3)] for i in range(3)])
    return EvolutionResult(times, np.array(moments, dtype=complex), method="lindblad")
