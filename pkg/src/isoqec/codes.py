"""Abstract ``[n, m]`` codes in the syndrome-aligned basis.

The basis is chosen so that the code space is spanned by ``|0> .. |d'-1>`` and
the discrete error ``E_s`` maps ``|k>`` to ``|s d' + k>``. Measuring the
syndrome projects onto one of the ``d''`` contiguous blocks of ``d'``
amplitudes; recovery is a relabelling of that block back to the front.
Only ``d``, ``d'`` and ``d''`` enter anywhere, so any non-degenerate code is
represented by this index arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import StateVector


@dataclass(frozen=True)
class CodeParams:
    n: int
    m: int
    # d'' = 1 ("correction" that does nothing) is only meaningful as a test fixture
    allow_trivial: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("n and m must be positive")
        if self.m > self.n or (self.m == self.n and not self.allow_trivial):
            raise ValueError(f"need 1 <= m < n, got n={self.n}, m={self.m}")

    @property
    def d(self) -> int:
        return 2**self.n

    @property
    def d_logical(self) -> int:
        """d' = 2^m, dimension of the code space."""
        return 2**self.m

    @property
    def d_syndrome(self) -> int:
        """d'' = 2^(n-m), number of syndromes."""
        return 2 ** (self.n - self.m)

    def block(self, s: int) -> slice:
        """Real-coordinate slice of the subspace ``S_s``."""
        if not 0 <= s < self.d_syndrome:
            raise ValueError(f"syndrome {s} out of range [0, {self.d_syndrome})")
        w = 2 * self.d_logical
        return slice(s * w, (s + 1) * w)

    @classmethod
    def parse(cls, text: str) -> "CodeParams":
        """Parse ``"n,m"``."""
        try:
            n, m = (int(v) for v in text.split(","))
        except ValueError:
            raise ValueError(f"malformed code spec {text!r}, expected 'n,m'") from None
        return cls(n, m)


@dataclass(frozen=True)
class CorrectionOutcome:
    syndrome: int
    probability: float
    corrected: StateVector | None

    @property
    def empty(self) -> bool:
        """True for a zero-probability branch, which carries no state."""
        return self.corrected is None


def _check_dim(x: np.ndarray, code: CodeParams):
    if x.shape[-1] != 2 * code.d:
        raise ValueError(f"state has {x.shape[-1] // 2} amplitudes, code needs d={code.d}")


def blocks(x: np.ndarray, code: CodeParams) -> np.ndarray:
    """View ``(..., 2d)`` coordinates as ``(..., d'', 2d')`` syndrome blocks."""
    x = np.asarray(x, dtype=float)
    _check_dim(x, code)
    return x.reshape(x.shape[:-1] + (code.d_syndrome, 2 * code.d_logical))


def branch_probabilities(x: np.ndarray, code: CodeParams) -> np.ndarray:
    """Batched syndrome probabilities ``P_s``, shape ``(..., d'')``."""
    b = blocks(x, code)
    return np.einsum("...sj,...sj->...s", b, b)


def syndrome_probabilities(psi: StateVector, code: CodeParams) -> np.ndarray:
    return branch_probabilities(psi.coords, code)


def correct_all_branches(psi: StateVector, code: CodeParams) -> list[CorrectionOutcome]:
    """Project onto every ``S_s``, renormalise and apply ``E_s^-1``."""
    b = blocks(psi.coords, code)
    probs = np.einsum("sj,sj->s", b, b)
    out = []
    for s in range(code.d_syndrome):
        p = float(probs[s])
        if p > 0.0:
            out.append(CorrectionOutcome(s, p, StateVector(b[s] / np.sqrt(p))))
        else:
            out.append(CorrectionOutcome(s, 0.0, None))
    return out


def measure_and_correct(psi: StateVector, code: CodeParams, rng: np.random.Generator) -> CorrectionOutcome:
    """Sample a syndrome by the Born rule and return that corrected branch."""
    branches = correct_all_branches(psi, code)
    s = draw_syndromes(np.array([[o.probability for o in branches]]), rng)[0]
    return branches[s]


def draw_syndromes(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One syndrome per row of a ``(N, d'')`` probability table."""
    cum = np.cumsum(probs, axis=-1)
    u = rng.random(probs.shape[0]) * cum[:, -1]
    s = (u[:, None] >= cum).sum(axis=-1)
    return np.minimum(s, probs.shape[-1] - 1)


def embed_logical(logical: StateVector, s: int, code: CodeParams) -> StateVector:
    """Place a code-space state into block ``S_s`` (the state ``E_s |logical>``)."""
    if logical.d != code.d_logical:
        raise ValueError(f"logical state has d={logical.d}, code needs d'={code.d_logical}")
    x = np.zeros(2 * code.d)
    x[code.block(s)] = logical.coords
    return StateVector(x)
