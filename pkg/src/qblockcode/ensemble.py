"""Ensemble, block-conditional and block ensemble density matrices.

Matrices are plain complex ``numpy`` arrays in the computational basis of
``C^(d^q)``; the tensor factor of emission ``j`` is the ``j``-th Kronecker
factor.  States of a non-orthogonal alphabet are expanded explicitly, so no
orthogonality is ever assumed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DensityMatrixError, SourceError, UndefinedConditionalError
from .source_model import (
    DEFAULT_MAX_ENUMERATION,
    BlockConfig,
    SourceModel,
    _to_zero_based,
    joint_distribution,
)

HERMITIAN_TOL = 1e-9
TRACE_TOL = 1e-9
PSD_TOL = 1e-9
TIE_TOL = 1e-10
SIGNIFICANT = 1e-9

_BATCH = 4096


def check_density_matrix(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``rho`` as an array after checking it is a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] == 0:
        raise DensityMatrixError(f"expected a non-empty square matrix, got shape {rho.shape}")
    asym = np.max(np.abs(rho - rho.conj().T))
    if asym > tol:
        raise DensityMatrixError(f"matrix is not Hermitian (max deviation {asym:.3e})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise DensityMatrixError(f"trace is {tr!r}, not 1")
    lo = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
    if lo < -PSD_TOL:
        raise DensityMatrixError(f"matrix has negative eigenvalue {lo:.3e}")
    return rho


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Descending eigenvalues with eigenvectors as the *columns* of ``vectors``."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.values)

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    idx = int(np.argmax(np.abs(v) > SIGNIFICANT))
    a = v[idx]
    return v * (abs(a) / a)


def _first_significant(v: np.ndarray) -> tuple:
    idx = int(np.argmax(np.abs(v) > SIGNIFICANT))
    # rounded so float noise cannot reorder equal magnitudes
    return (-round(abs(v[idx]), 9), idx)


def _eigenspace_basis(vectors: np.ndarray) -> np.ndarray:
    """Basis of span(vectors) obtained by projecting e_0, e_1, ... and orthonormalizing.

    Depends only on the subspace, not on which orthonormal basis of it the
    eigensolver happened to return.
    """
    dim, g = vectors.shape
    proj = vectors @ vectors.conj().T
    chosen: list[np.ndarray] = []
    for j in range(dim):
        u = proj[:, j].copy()
        for _ in range(2):
            for c in chosen:
                u -= (c.conj() @ u) * c
        nrm = np.linalg.norm(u)
        if nrm > 1e-6:
            chosen.append(u / nrm)
            if len(chosen) == g:
                break
    return np.column_stack(chosen)


def spectrum(rho) -> Spectrum:
    """Canonical descending eigensystem of a density matrix.

    Degenerate eigenvalues (gaps ``<= 1e-10``) get a basis fixed by the
    eigenspace itself, ordered by ``(-|first significant component|, its
    index)``.  Every eigenvector's first significant component is made real
    and positive.
    """
    rho = check_density_matrix(rho)
    herm = (rho + rho.conj().T) / 2
    w, v = np.linalg.eigh(herm)
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]

    groups = [[0]]
    for i in range(1, len(w)):
        if w[i - 1] - w[i] <= TIE_TOL:
            groups[-1].append(i)
        else:
            groups.append([i])
    cols = []
    for grp in groups:
        block = v[:, grp]
        if len(grp) > 1:
            block = _eigenspace_basis(block)
        vecs = [_canonical_phase(block[:, j]) for j in range(block.shape[1])]
        vecs.sort(key=_first_significant)
        cols.extend(vecs)
    vectors = np.column_stack(cols)
    values = np.clip(w, 0.0, 1.0)
    values.setflags(write=False)
    vectors.setflags(write=False)
    return Spectrum(values, vectors)


def descending_eigenvalues(mats: np.ndarray) -> np.ndarray:
    """Sorted (descending), clamped eigenvalues of a stack of Hermitian matrices."""
    mats = np.asarray(mats)
    w = np.linalg.eigvalsh((mats + np.swapaxes(mats.conj(), -1, -2)) / 2)
    if np.any(w < -PSD_TOL):
        raise DensityMatrixError(f"negative eigenvalue {w.min():.3e}")
    return np.clip(w, 0.0, 1.0)[..., ::-1]


def mixture(product_rows: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """``sum_b p_b |s_b><s_b|`` for product states given as rows."""
    return (product_rows.T * probs) @ product_rows.conj()


def ensemble_state(model: SourceModel, q: int, max_enumeration: int = DEFAULT_MAX_ENUMERATION) -> np.ndarray:
    """Density matrix of ``q`` consecutive emissions from the start."""
    if q < 1:
        raise ValueError("q must be >= 1")
    BlockConfig(q, 1, max_enumeration).guard(model.size**q, "ensemble enumeration")
    p = joint_distribution(model, q).reshape(-1).astype(float)
    return mixture(model.alphabet.product_matrix(q), p)


class BlockEnsemble:
    """Memoized block-conditional and block ensemble states for one ``(model, cfg)``.

    Histories are 1-based tuples of length ``(k - 1) * l``; the empty history
    belongs to block 1.  Inserting into the caches is idempotent, so sharing
    an instance between readers is harmless.
    """

    def __init__(self, model: SourceModel, cfg: BlockConfig):
        cfg.require_depth(model)
        self.model = model
        self.cfg = cfg
        self.dim = cfg.codeword_dim(model.dimension)
        self._rows = model.alphabet.product_matrix(cfg.block_size)
        self._joint: dict[int, np.ndarray] = {}
        self._cond: dict[tuple, np.ndarray] = {}
        self._cond_spec: dict[tuple, Spectrum] = {}
        self._block: dict[int, np.ndarray] = {}
        self._block_spec: dict[int, Spectrum] = {}

    def _check_k(self, k: int) -> None:
        if not 1 <= k <= self.cfg.block_count:
            raise ValueError(f"block index {k} outside 1..{self.cfg.block_count}")

    def joint(self, k: int) -> np.ndarray:
        """``P(history, block k)`` as an array ``(N**((k-1)l), N**l)``."""
        self._check_k(k)
        if k not in self._joint:
            n, l = self.model.size, self.cfg.block_size
            self.cfg.guard(n ** ((k - 1) * l), "history enumeration")
            j = joint_distribution(self.model, k * l).reshape(n ** ((k - 1) * l), n**l)
            self._joint.setdefault(k, j)
        return self._joint[k]

    def histories(self, k: int):
        """Yield ``(history, probability)`` for the positive-probability histories of block ``k``."""
        n, l = self.model.size, self.cfg.block_size
        joint = self.joint(k)
        shape = (n,) * ((k - 1) * l)
        for h, row in enumerate(joint):
            ph = row.sum()
            if ph > 0:
                hist = tuple(int(x) + 1 for x in np.unravel_index(h, shape)) if shape else ()
                yield hist, ph

    def _history_index(self, history: tuple) -> int:
        h0 = _to_zero_based(self.model, history, "history")
        idx = 0
        for x in h0:
            idx = idx * self.model.size + x
        return idx

    def conditional_state(self, k: int, history=()) -> np.ndarray:
        self._check_k(k)
        history = tuple(int(x) for x in history)
        if len(history) != (k - 1) * self.cfg.block_size:
            raise SourceError(
                f"block {k} needs a history of length {(k - 1) * self.cfg.block_size}, got {len(history)}"
            )
        if k == 1:
            return self.block_state(1)
        if history not in self._cond:
            row = self.joint(k)[self._history_index(history)]
            ph = row.sum()
            if ph <= 0:
                raise UndefinedConditionalError(history)
            cond = np.array([x / ph for x in row], dtype=float)
            self._cond.setdefault(history, mixture(self._rows, cond))
        return self._cond[history]

    def conditional_spectrum(self, k: int, history=()) -> Spectrum:
        history = tuple(int(x) for x in history)
        if history not in self._cond_spec:
            self._cond_spec.setdefault(history, spectrum(self.conditional_state(k, history)))
        return self._cond_spec[history]

    def block_state(self, k: int) -> np.ndarray:
        self._check_k(k)
        if k not in self._block:
            marginal = self.joint(k).sum(axis=0).astype(float)
            self._block.setdefault(k, mixture(self._rows, marginal))
        return self._block[k]

    def block_spectrum(self, k: int) -> Spectrum:
        if k not in self._block_spec:
            self._block_spec.setdefault(k, spectrum(self.block_state(k)))
        return self._block_spec[k]

    def averaged_conditional_eigenvalues(self, k: int) -> np.ndarray:
        """``sum_h p(h) * lambda^h`` with each conditional spectrum sorted descending."""
        if k == 1:
            # the only history is the empty one, whose state is the block state
            return self.block_spectrum(1).values.astype(float)
        joint = self.joint(k)
        total = np.zeros(self.dim)
        probs = np.array([row.sum() for row in joint], dtype=object if joint.dtype == object else float)
        keep = np.nonzero(probs > 0)[0]
        for start in range(0, len(keep), _BATCH):
            idx = keep[start : start + _BATCH]
            ph = probs[idx]
            cond = np.array([[x / p for x in joint[h]] for h, p in zip(idx, ph)], dtype=float)
            mats = np.einsum("hb,bi,bj->hij", cond, self._rows, self._rows.conj())
            lam = descending_eigenvalues(mats)
            # row-wise reduction keeps one summation order for every column,
            # so sorted inputs stay sorted
            total += (np.asarray(ph, dtype=float)[:, None] * lam).sum(axis=0)
        return total


def block_conditional_state(model: SourceModel, cfg: BlockConfig, k: int, history=()) -> np.ndarray:
    """State of block ``k`` given the exact 1-based emissions of blocks ``1..k-1``."""
    return BlockEnsemble(model, cfg).conditional_state(k, history)


def block_ensemble_state(model: SourceModel, cfg: BlockConfig, k: int) -> np.ndarray:
    """History-averaged state of block ``k``."""
    return BlockEnsemble(model, cfg).block_state(k)
