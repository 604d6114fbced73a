"""Immutable quadrature rules and the shared integrand-evaluation protocol.

An integrand is any vectorized callable ``f(x)`` taking an ``(N, d)``
array (or ``(N,)`` in one dimension).  Integrands may also provide
``times_weight(x, weight)`` returning ``f(x) * weight(x)`` computed
stably; rules that know their weight then use weights divided by the
weight value, which keeps sums finite where ``f`` grows like ``1/w``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import IntegrandError


def _evaluate(f, x: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(x), dtype=float).reshape(-1)
    if vals.size != x.shape[0]:
        raise IntegrandError(f"integrand returned {vals.size} values for {x.shape[0]} nodes")
    return vals


def _check(vals: np.ndarray, x: np.ndarray) -> None:
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise IntegrandError(f"integrand is not finite at node {x[i].tolist()}", node=x[i])


def weighted_terms(f, x: np.ndarray, weights: np.ndarray, scaled: np.ndarray | None, weight) -> np.ndarray:
    """Per-node contributions ``weights * f(x)`` using the scaled route when possible.

    ``x`` has shape ``(N, d)``.  Nodes whose scaled weight is not finite
    (the weight vanishes there) fall back to ``weights * f``.
    """
    use_scaled = scaled is not None and weight is not None and hasattr(f, "times_weight")
    if use_scaled:
        good = np.isfinite(scaled)
        terms = np.empty(x.shape[0])
        if good.any():
            fw = np.asarray(f.times_weight(x[good], weight), dtype=float).reshape(-1)
            _check(fw, x[good])
            terms[good] = scaled[good] * fw
        if not good.all():
            fv = _evaluate(f, x[~good])
            _check(fv, x[~good])
            terms[~good] = weights[~good] * fv
        return terms
    vals = _evaluate(f, x)
    _check(vals, x)
    return weights * vals


def folded_sum(terms: np.ndarray) -> float:
    """Sum mirror pairs first, so odd integrands on symmetric rules cancel exactly."""
    n = terms.size
    half = n // 2
    paired = terms[:half] + terms[::-1][:half]
    total = float(np.sum(paired))
    if n % 2:
        total += float(terms[half])
    return total


def integrate_1d(nodes, weights, scaled, weight, f) -> float:
    """Integrate ``f`` with a sorted, mirror-symmetric 1-D rule."""
    x = np.asarray(nodes, dtype=float).reshape(-1, 1)
    return folded_sum(weighted_terms(_OneDimView(f), x, weights, scaled, weight))


class _OneDimView:
    """Adapter presenting ``(N, 1)`` points to an integrand as a flat array."""

    def __init__(self, f):
        self._f = f
        if hasattr(f, "times_weight"):
            self.times_weight = lambda x, weight: f.times_weight(x[:, 0], weight)

    def __call__(self, x):
        return self._f(x[:, 0])


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes ``(N, d)`` and weights ``(N,)`` for a measure, with provenance.

    ``scaled_weights``, when present, are ``weights / weight(nodes)``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    weight: Any = None
    scaled_weights: np.ndarray | None = None
    provenance: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return int(self.nodes.shape[1])

    @property
    def size(self) -> int:
        return int(self.nodes.shape[0])

    def integrate(self, f) -> float:
        terms = weighted_terms(f, self.nodes, self.weights, self.scaled_weights, self.weight)
        return float(np.sum(terms))
