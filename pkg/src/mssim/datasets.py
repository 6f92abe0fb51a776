"""CSV emission and ingestion for simulated and experimental datasets.

File shapes (defined by this package; headers are authoritative):

  drive sequences:  time_s, loop, then P_<z> / dP_<z> per bitstring (simulation)
                    or c_<z> shot counts per bitstring (experiment).
  heatmaps:         gamma, beta, r, stderr (simulation) or gamma, beta and
                    c_<z> shot counts per bitstring (experiment).

Bitstring columns must cover all 2^n outcomes in lexicographic order.
"""

import csv
import io
from pathlib import Path

import numpy as np
from dataclasses import dataclass

from .errors import ConfigError, DataMismatchError
from .qaoa import HeatmapGrid


def bitstrings(n):
    return [format(i, f"0{n}b") for i in range(2**n)]


def _fmt(x):
    return repr(float(x))


# ---------------------------------------------------------------- emission

def write_ms_csv(path, times, loops, probs, errs, purity):
    """One row per time point; probs/errs are (T, 2^n)."""
    n = int(round(np.log2(probs.shape[1])))
    cols = ["time_s", "loop"]
    cols += [f"P_{z}" for z in bitstrings(n)] + [f"dP_{z}" for z in bitstrings(n)]
    cols += ["purity"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for k in range(len(times)):
            row = [_fmt(times[k]), _fmt(loops[k])]
            row += [_fmt(x) for x in probs[k]] + [_fmt(x) for x in errs[k]]
            row += [_fmt(purity[k])]
            w.writerow(row)


def write_heatmap_csv(path, grid):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma", "beta", "r", "stderr"])
        for gi, g in enumerate(grid.gamma_axis):
            for bi, b in enumerate(grid.beta_axis):
                w.writerow([_fmt(g), _fmt(b), _fmt(grid.values[gi, bi]),
                            _fmt(grid.stderr[gi, bi])])


def write_counts_csv(path, key_cols, key_rows, counts):
    """Experiment-shaped file: key columns then c_<z> counts per bitstring."""
    n = int(round(np.log2(counts.shape[1])))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(key_cols) + [f"c_{z}" for z in bitstrings(n)])
        for k in range(counts.shape[0]):
            row = [_fmt(x) for x in np.atleast_1d(key_rows[k])]
            row += [str(int(c)) for c in counts[k]]
            w.writerow(row)


# ---------------------------------------------------------------- ingestion

def _read_rows(path):
    text = Path(path).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise DataMismatchError(f"{path}: no data rows")
    return rows[0], rows[1:]


def _count_columns(header, path):
    idx = [(k, h[2:]) for k, h in enumerate(header) if h.startswith("c_")]
    if not idx:
        raise DataMismatchError(f"{path}: no c_<bitstring> count columns")
    nbits = len(idx[0][1])
    want = bitstrings(nbits)
    got = [z for _, z in idx]
    if got != want:
        raise DataMismatchError(
            f"{path}: count columns must cover all {2**nbits} bitstrings in "
            f"lexicographic order; got {got[:4]}...")
    return [k for k, _ in idx], nbits


@dataclass(frozen=True)
class ExperimentDataset:
    """Shot-count records keyed by time (drive sequences) or (gamma, beta)."""

    kind: str                 # 'ms' or 'heatmap'
    keys: np.ndarray          # (T,) times or (T, 2) gamma/beta pairs
    counts: np.ndarray        # (T, 2^n) integer shot counts
    shots: np.ndarray         # (T,) row sums
    n: int

    def probabilities(self):
        return self.counts / self.shots[:, None]


def load_experiment_csv(path):
    header, rows = _read_rows(path)
    cidx, n = _count_columns(header, path)
    if "time_s" in header:
        kind = "ms"
        kcol = [header.index("time_s")]
    elif "gamma" in header and "beta" in header:
        kind = "heatmap"
        kcol = [header.index("gamma"), header.index("beta")]
    else:
        raise DataMismatchError(f"{path}: need a time_s column or gamma/beta columns")
    keys = []
    counts = []
    for r in rows:
        keys.append([float(r[k]) for k in kcol])
        row_counts = []
        for k in cidx:
            c = float(r[k])
            if c < 0 or c != int(c):
                raise DataMismatchError(f"{path}: counts must be non-negative integers")
            row_counts.append(int(c))
        counts.append(row_counts)
    counts = np.asarray(counts, dtype=int)
    shots = counts.sum(axis=1)
    if np.any(shots < 1):
        raise DataMismatchError(f"{path}: every row needs at least one shot")
    keys = np.asarray(keys, dtype=float)
    if kind == "ms":
        keys = keys[:, 0]
    return ExperimentDataset(kind=kind, keys=keys, counts=counts, shots=shots, n=n)


def load_sim_csv(path):
    """Round-trip loader for files written by write_ms_csv / write_heatmap_csv."""
    header, rows = _read_rows(path)
    data = np.asarray([[float(x) for x in r] for r in rows])
    if header[:2] == ["gamma", "beta"] and "r" in header:
        gammas = np.unique(data[:, 0])
        betas = np.unique(data[:, 1])
        if gammas.size * betas.size != data.shape[0]:
            raise DataMismatchError(f"{path}: heatmap rows do not form a full grid")
        order = np.lexsort((data[:, 1], data[:, 0]))
        vals = data[order, 2].reshape(gammas.size, betas.size)
        errs = data[order, 3].reshape(gammas.size, betas.size)
        return HeatmapGrid(gamma_axis=gammas, beta_axis=betas, values=vals,
                           stderr=errs, shots=0, provenance="noisy_sim")
    if header[0] == "time_s":
        pcols = [k for k, h in enumerate(header) if h.startswith("P_")]
        ecols = [k for k, h in enumerate(header) if h.startswith("dP_")]
        if not pcols or len(pcols) != len(ecols):
            raise DataMismatchError(f"{path}: expected matching P_/dP_ columns")
        return {
            "times": data[:, 0],
            "probs": data[:, pcols],
            "errs": data[:, ecols],
            "labels": [header[k][2:] for k in pcols],
        }
    raise ConfigError(f"{path}: unrecognized simulation CSV header")
