"""Empirical zero-critical pair correlation with minus-sampling edge correction.

Input patterns are duck-typed: anything with complex-array attributes
``zeros``, ``criticals``, ``holo_criticals`` and a scalar ``window_radius``
works.  For each sample the reference points (zeros) are restricted to the
window eroded by the largest bin radius, so every annulus around a kept
reference point lies fully inside the window and no boundary correction
factors are needed.  The per-sample estimate in a bin is

    K̂ = pi² · pairs / (eroded area · annulus area),

and the curve is the across-sample mean with across-sample standard errors;
pairs within one sample are correlated, so pooled pair-count errors would be
dishonest.  The pi² prefactor absorbs the d·ell/pi area convention on both
factors, making the curve directly comparable to the exact evaluation.
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BinMismatch, BinningInvalid, TooFewSamples

MIN_PATTERNS = 50

_KIND_ATTR = {"zeros": "zeros", "criticals": "criticals", "holo": "holo_criticals"}
_WHICH_ATTR = {"chern": "criticals", "holo": "holo_criticals"}


@dataclass(frozen=True)
class CorrelationCurve:
    """Binned empirical estimates or exact evaluations of the correlation.

    Two layouts share the type, distinguished by metadata["kind"]: a binned
    curve has len(values) == len(bin_edges) - 1, a point-sampled curve has
    one value per grid entry in bin_edges.
    """

    bin_edges: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    pair_counts: np.ndarray
    normalization: str = "ktilde"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        values = np.asarray(self.values, dtype=float)
        stderr = np.asarray(self.stderr, dtype=float)
        pairs = np.asarray(self.pair_counts)
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "stderr", stderr)
        object.__setattr__(self, "pair_counts", pairs)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise BinningInvalid("bin edges must be strictly increasing, length >= 2")
        n = values.size
        if n not in (edges.size, edges.size - 1):
            raise BinningInvalid(
                f"{n} values incompatible with {edges.size} bin edges"
            )
        if stderr.size != n or pairs.size != n:
            raise BinningInvalid("values, stderr, pair_counts lengths differ")
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(stderr)):
            raise BinningInvalid("non-finite curve entries")
        if np.any(values < 0) or np.any(stderr < 0):
            raise BinningInvalid("negative values or stderr")

    @property
    def is_binned(self):
        return self.values.size == self.bin_edges.size - 1

    def bin_midpoints(self):
        if self.is_binned:
            return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])
        return self.bin_edges

    def to_csv(self, path):
        """Write the curve as CSV to a path or an open file object."""
        if hasattr(path, "write"):
            self._write_csv(path)
        else:
            with open(path, "w", newline="") as fh:
                self._write_csv(fh)

    def _write_csv(self, fh):
        writer = csv.writer(fh)
        if self.is_binned:
            writer.writerow(["bin_lo", "bin_hi", "value", "stderr", "pairs"])
            for lo, hi, v, s, p in zip(
                self.bin_edges[:-1], self.bin_edges[1:],
                self.values, self.stderr, self.pair_counts,
            ):
                writer.writerow(
                    [f"{lo:.17g}", f"{hi:.17g}", f"{v:.17g}", f"{s:.17g}", int(p)]
                )
        else:
            writer.writerow(["r", "value", "stderr"])
            for r, v, s in zip(self.bin_edges, self.values, self.stderr):
                writer.writerow([f"{r:.17g}", f"{v:.17g}", f"{s:.17g}"])

    def to_json_dict(self):
        return {
            "bin_edges": self.bin_edges.tolist(),
            "values": self.values.tolist(),
            "stderr": self.stderr.tolist(),
            "pair_counts": np.asarray(self.pair_counts).astype(int).tolist(),
            "normalization": self.normalization,
            "metadata": self.metadata,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json_dict(cls, data):
        return cls(
            bin_edges=np.asarray(data["bin_edges"], dtype=float),
            values=np.asarray(data["values"], dtype=float),
            stderr=np.asarray(data["stderr"], dtype=float),
            pair_counts=np.asarray(data["pair_counts"], dtype=int),
            normalization=data.get("normalization", "ktilde"),
            metadata=data.get("metadata", {}),
        )

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class ComparisonReport:
    """Per-bin agreement between an empirical curve and an exact reference."""

    bin_edges: np.ndarray
    empirical: np.ndarray
    exact: np.ndarray
    z_scores: np.ndarray
    max_abs_z: float
    fraction_within: float
    threshold: float
    passed: bool

    def to_json_dict(self):
        rows = []
        for i in range(self.z_scores.size):
            rows.append(
                {
                    "bin_lo": float(self.bin_edges[i]),
                    "bin_hi": float(self.bin_edges[i + 1]),
                    "empirical": float(self.empirical[i]),
                    "exact": float(self.exact[i]),
                    "z": float(self.z_scores[i]),
                }
            )
        return {
            "bins": rows,
            "max_abs_z": self.max_abs_z,
            "fraction_within": self.fraction_within,
            "threshold": self.threshold,
            "passed": self.passed,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _check_bins(bin_edges):
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise BinningInvalid("need at least two bin edges")
    if np.any(np.diff(edges) <= 0):
        raise BinningInvalid("bin edges must be strictly increasing")
    if edges[0] < 0:
        raise BinningInvalid("bin edges must be nonnegative")
    return edges


def estimate_ktilde(patterns, bin_edges, which="chern"):
    """Across-sample mean of the minus-sampled pair-correlation estimator.

    `which` selects the second point set: "chern" for connection critical
    points, "holo" for ordinary derivative zeros.
    """
    if which not in _WHICH_ATTR:
        raise ValueError(f"which must be 'chern' or 'holo', got {which!r}")
    patterns = list(patterns)
    if len(patterns) < MIN_PATTERNS:
        raise TooFewSamples(f"{len(patterns)} patterns < minimum {MIN_PATTERNS}")
    edges = _check_bins(bin_edges)
    r_max = edges[-1]
    attr = _WHICH_ATTR[which]

    annulus = np.pi * (edges[1:] ** 2 - edges[:-1] ** 2)
    per_sample = np.zeros((len(patterns), edges.size - 1))
    pair_totals = np.zeros(edges.size - 1, dtype=np.int64)
    for k, pat in enumerate(patterns):
        window = float(pat.window_radius)
        if r_max > 0.5 * window + 1e-12:
            raise BinningInvalid(
                f"max bin radius {r_max} exceeds half the window radius {window}"
            )
        eroded = window - r_max
        zeros = np.asarray(pat.zeros, dtype=complex).ravel()
        second = np.asarray(getattr(pat, attr), dtype=complex).ravel()
        zeros = zeros[np.abs(zeros) <= eroded]
        if zeros.size and second.size:
            dist = np.abs(zeros[:, None] - second[None, :]).ravel()
            counts, _ = np.histogram(dist, bins=edges)
        else:
            counts = np.zeros(edges.size - 1, dtype=np.int64)
        pair_totals += counts
        per_sample[k] = np.pi**2 * counts / (np.pi * eroded**2 * annulus)

    values = per_sample.mean(axis=0)
    stderr = per_sample.std(axis=0, ddof=1) / np.sqrt(len(patterns))
    return CorrelationCurve(
        bin_edges=edges,
        values=values,
        stderr=stderr,
        pair_counts=pair_totals,
        normalization="ktilde",
        metadata={
            "kind": "binned",
            "samples": len(patterns),
            "which": which,
            "window_radius": float(patterns[0].window_radius),
            "r_max": float(r_max),
        },
    )


def intensity(patterns, kind="zeros"):
    """Mean point count per unit window area, with across-sample stderr."""
    if kind not in _KIND_ATTR:
        raise ValueError(f"kind must be one of {sorted(_KIND_ATTR)}, got {kind!r}")
    patterns = list(patterns)
    if len(patterns) < MIN_PATTERNS:
        raise TooFewSamples(f"{len(patterns)} patterns < minimum {MIN_PATTERNS}")
    attr = _KIND_ATTR[kind]
    rates = np.array(
        [
            len(np.asarray(getattr(pat, attr)).ravel())
            / (np.pi * float(pat.window_radius) ** 2)
            for pat in patterns
        ]
    )
    value = float(rates.mean())
    stderr = float(rates.std(ddof=1) / np.sqrt(len(patterns)))
    return value, stderr


def compare_curves(empirical, exact, threshold=4.0):
    """Per-bin z-scores of empirical against exact, combined-stderr scaled."""
    if empirical.bin_edges.size != exact.bin_edges.size or not np.allclose(
        empirical.bin_edges, exact.bin_edges, rtol=0, atol=1e-12
    ):
        raise BinMismatch("curves have different bin edges")
    if empirical.values.size != exact.values.size:
        raise BinMismatch("curves have different layouts (binned vs point)")
    diff = empirical.values - exact.values
    combined = np.sqrt(empirical.stderr**2 + exact.stderr**2)
    z = np.zeros_like(diff)
    nonzero = combined > 0
    z[nonzero] = diff[nonzero] / combined[nonzero]
    exact_match = ~nonzero & (diff == 0)
    z[~nonzero & ~exact_match] = np.inf * np.sign(diff[~nonzero & ~exact_match])
    max_abs = float(np.max(np.abs(z))) if z.size else 0.0
    frac = float(np.mean(np.abs(z) <= threshold)) if z.size else 1.0
    return ComparisonReport(
        bin_edges=empirical.bin_edges,
        empirical=empirical.values,
        exact=exact.values,
        z_scores=z,
        max_abs_z=max_abs,
        fraction_within=frac,
        threshold=float(threshold),
        passed=bool(max_abs <= threshold),
    )
