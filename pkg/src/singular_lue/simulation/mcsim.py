"""Monte Carlo oracle for the moment generating function of sum_j 1/x_j under LUE.

Eigenvalues are drawn from the bidiagonal model T = B B^T with B lower
bidiagonal, B[i, i]^2 ~ Gamma(alpha + n - i + 1) and B[i+1, i]^2 ~ Gamma(n - i)
for i = 1..n, unit scale. For n = 1 this is Gamma(alpha + 1) and E[tr T] = n(n + alpha).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field
from scipy.linalg import eigvalsh_tridiagonal

logger = structlog.get_logger(__name__)

MIN_SAMPLES = 1000


class MCConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    alpha: float = Field(gt=0)
    s: float = Field(ge=0)
    samples: int = Field(default=100_000, ge=MIN_SAMPLES)
    seed: int = Field(default=0, ge=0, lt=2**64)
    chunk: int = Field(default=10_000, ge=1)

    @property
    def chunk_sizes(self) -> List[int]:
        full, rest = divmod(self.samples, self.chunk)
        return [self.chunk] * full + ([rest] if rest else [])


class MCResult(BaseModel):
    estimate: float
    std_error: float
    samples_used: int
    chunks: int

    def within(self, exact: float, k: float = 3.0) -> bool:
        """|estimate - exact| <= k standard errors."""
        return abs(self.estimate - exact) <= k * self.std_error


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, chunk index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _bidiagonal(n: int, alpha: float, rng: np.random.Generator, size: int) -> Tuple[np.ndarray, np.ndarray]:
    i = np.arange(1, n + 1)
    diag = np.sqrt(rng.standard_gamma(alpha + n - i + 1, size=(size, n)))
    if n > 1:
        sub = np.sqrt(rng.standard_gamma(n - i[:-1], size=(size, n - 1)))
    else:
        sub = np.empty((size, 0))
    return diag, sub


def _eigenvalues(diag: np.ndarray, sub: np.ndarray) -> np.ndarray:
    d = diag**2
    d[1:] += sub**2
    off = diag[:-1] * sub
    if off.size == 0:
        return d
    return eigvalsh_tridiagonal(d, off)


def sample_lue_batch(cfg: MCConfig, rng: np.random.Generator, size: int) -> np.ndarray:
    """(size, n) array of eigenvalue draws."""
    diag, sub = _bidiagonal(cfg.n, cfg.alpha, rng, size)
    return np.stack([_eigenvalues(diag[k], sub[k]) for k in range(size)])


def sample_lue(cfg: MCConfig, rng: np.random.Generator) -> np.ndarray:
    return sample_lue_batch(cfg, rng, 1)[0]


def _run_chunk(cfg: MCConfig, index: int, size: int) -> Tuple[int, float, float]:
    """(count, mean, sum of squared deviations) of exp(-s sum 1/x) over one chunk."""
    eigs = sample_lue_batch(cfg, chunk_rng(cfg.seed, index), size)
    stat = np.exp(-cfg.s * np.sum(1.0 / eigs, axis=1))
    mean = float(np.mean(stat))
    m2 = float(np.sum((stat - mean) ** 2))
    logger.debug("mc.chunk_done", chunk=index, size=size, mean=mean)
    return size, mean, m2


def _merge(a: Tuple[int, float, float], b: Tuple[int, float, float]) -> Tuple[int, float, float]:
    n_a, mean_a, m2_a = a
    n_b, mean_b, m2_b = b
    n = n_a + n_b
    delta = mean_b - mean_a
    return n, mean_a + delta * n_b / n, m2_a + m2_b + delta * delta * n_a * n_b / n


def mc_mgf(cfg: MCConfig, max_workers: Optional[int] = None) -> MCResult:
    """Sample mean of exp(-s sum_j 1/x_j); chunks are reduced in index order."""
    sizes = cfg.chunk_sizes
    if cfg.s == 0:
        return MCResult(estimate=1.0, std_error=0.0, samples_used=cfg.samples, chunks=len(sizes))

    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = [executor.submit(_run_chunk, cfg, i, size) for i, size in enumerate(sizes)]
        parts = [f.result() for f in futures]

    total = parts[0]
    for part in parts[1:]:
        total = _merge(total, part)
    count, mean, m2 = total
    std_error = math.sqrt(m2 / (count - 1) / count)
    logger.info(
        "mc.finished", n=cfg.n, alpha=cfg.alpha, s=cfg.s, samples=count, estimate=mean, std_error=std_error
    )
    return MCResult(estimate=mean, std_error=std_error, samples_used=count, chunks=len(sizes))
