"""Topographic scalp maps: electrode coordinates, IDW interpolation, SVG export.

Electrode positions come from the idealized spherical layout of the 10-10
system: the midline and transverse arcs step 18 degrees, the outer ring
(Fpz-T7-Oz-T8 circle at 72 degrees inclination) carries the lateral-most
electrodes at 18-degree azimuth steps, and interior electrodes sit at equal
fractions along the great-circle arc between their ring anchor and the
midline. 2-D coordinates are the azimuthal-equidistant projection from the
vertex, scaled so the equator maps to the unit circle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .spectral import band_power, welch_psd


def _sph(incl_deg: float, azim_deg: float) -> np.ndarray:
    """Unit vector for inclination from vertex and azimuth (0=right, 90=front)."""
    incl = np.radians(incl_deg)
    azim = np.radians(azim_deg)
    return np.array([
        np.sin(incl) * np.cos(azim),
        np.sin(incl) * np.sin(azim),
        np.cos(incl),
    ])


def _slerp(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    omega = np.arccos(np.clip(np.dot(a, b), -1.0, 1.0))
    if omega < 1e-12:
        return a
    return (np.sin((1.0 - t) * omega) * a + np.sin(t * omega) * b) / np.sin(omega)


def _project(xyz: np.ndarray) -> tuple[float, float]:
    """Azimuthal-equidistant projection from the vertex; equator -> radius 1."""
    incl = np.arccos(np.clip(xyz[2], -1.0, 1.0))
    rho = incl / (np.pi / 2.0)
    azim = np.arctan2(xyz[1], xyz[0])
    return float(rho * np.cos(azim)), float(rho * np.sin(azim))


def _build_positions() -> dict[str, np.ndarray]:
    pos: dict[str, np.ndarray] = {}

    # Midline: nasion-inion arc in 18-degree steps (azimuth 90 front, 270 back).
    midline = [("FPZ", 72, 90), ("AFZ", 54, 90), ("FZ", 36, 90), ("FCZ", 18, 90),
               ("CZ", 0, 90), ("CPZ", 18, 270), ("PZ", 36, 270), ("POZ", 54, 270),
               ("OZ", 72, 270), ("IZ", 90, 270)]
    for label, incl, azim in midline:
        pos[label] = _sph(incl, azim)

    # Outer ring at 72 degrees inclination, 18-degree azimuth steps per side.
    left_ring = ["FP1", "AF7", "F7", "FT7", "T7", "TP7", "P7", "PO7", "O1"]
    right_ring = ["FP2", "AF8", "F8", "FT8", "T8", "TP8", "P8", "PO8", "O2"]
    for i, (ll, rl) in enumerate(zip(left_ring, right_ring), start=1):
        pos[ll] = _sph(72, 90 + 18 * i)
        pos[rl] = _sph(72, 90 - 18 * i)

    # T9/T10 sit on the equator below T7/T8.
    pos["T9"] = _sph(90, 180)
    pos["T10"] = _sph(90, 0)

    # Interior rows: equal great-circle fractions from the ring anchor to the
    # midline electrode of the same row (index 7 -> 0/4, 5 -> 1/4, 3 -> 2/4,
    # 1 -> 3/4).
    rows = {
        "AF": ("AF7", "AF8", "AFZ"),
        "F": ("F7", "F8", "FZ"),
        "FC": ("FT7", "FT8", "FCZ"),
        "C": ("T7", "T8", "CZ"),
        "CP": ("TP7", "TP8", "CPZ"),
        "P": ("P7", "P8", "PZ"),
        "PO": ("PO7", "PO8", "POZ"),
    }
    fractions = {7: 0.0, 5: 0.25, 3: 0.5, 1: 0.75}
    for row, (left_anchor, right_anchor, mid) in rows.items():
        for idx, frac in fractions.items():
            if frac == 0.0:
                continue  # anchors already placed
            pos[f"{row}{idx}"] = _slerp(pos[left_anchor], pos[mid], frac)
            pos[f"{row}{idx + 1}"] = _slerp(pos[right_anchor], pos[mid], frac)
    return pos


_POSITIONS_3D = _build_positions()

# 2-D montage: label -> (x, y), +x right, +y front, unit circle = equator.
MONTAGE_1010: dict[str, tuple[float, float]] = {
    label: _project(xyz) for label, xyz in sorted(_POSITIONS_3D.items())
}


def normalize_label(label: str) -> str:
    """Canonical electrode label: EDF labels like 'Fc5.' become 'FC5'."""
    return label.strip().rstrip(".").upper()


def montage_coordinates(labels) -> np.ndarray:
    """[n, 2] coordinates for the given channel labels (any EDF spelling)."""
    coords = []
    for label in labels:
        key = normalize_label(label)
        if key not in MONTAGE_1010:
            raise KeyError(f"unknown channel label {label!r} (normalized {key!r})")
        coords.append(MONTAGE_1010[key])
    return np.array(coords, dtype=np.float64)


@dataclass
class TopomapGrid:
    """Per-channel scalars interpolated onto a masked head grid."""

    labels: list
    coordinates: np.ndarray  # [n, 2]
    values: np.ndarray  # [n] raw channel scalars
    grid: np.ndarray  # [G, G] normalized values, NaN outside the head
    mask: np.ndarray  # [G, G] bool, True inside the head
    vmin: float
    vmax: float

    def to_json(self) -> dict:
        grid = np.where(self.mask, self.grid, np.nan)
        return {
            "labels": list(self.labels),
            "coordinates": self.coordinates.tolist(),
            "values": self.values.tolist(),
            "grid": [[None if not m else v for v, m in zip(row, mrow)]
                     for row, mrow in zip(grid.tolist(), self.mask.tolist())],
            "mask": self.mask.astype(int).tolist(),
            "vmin": self.vmin,
            "vmax": self.vmax,
        }

    def write_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json(), f)
            f.write("\n")


def channel_scalars(signals: np.ndarray, metric, fs: float = 160.0,
                    nperseg: int = 256) -> np.ndarray:
    """Reduce [N, C, L] signals to one scalar per channel.

    metric: "rms" or a (lo_hz, hi_hz) band for Welch band power, averaged
    over samples.
    """
    signals = np.asarray(signals, dtype=np.float64)
    if signals.ndim != 3:
        raise ValueError(f"expected [samples, channels, length], got {signals.shape}")
    n, c, length = signals.shape
    if metric == "rms":
        return np.sqrt(np.mean(signals ** 2, axis=(0, 2)))
    lo, hi = metric
    seg = min(nperseg, length)
    out = np.zeros(c)
    for ch in range(c):
        acc = 0.0
        for i in range(n):
            psd = welch_psd(signals[i, ch], fs=fs, nperseg=seg)
            acc += band_power(psd, lo, hi)
        out[ch] = acc / n
    return out


def topomap(values, labels, grid_size: int = 64, idw_power: float = 2.0,
            k_neighbors: int = 4) -> TopomapGrid:
    """Inverse-distance-weighted interpolation of channel scalars onto a disk."""
    values = np.asarray(values, dtype=np.float64)
    coords = montage_coordinates(labels)
    if values.shape != (coords.shape[0],):
        raise ValueError(f"{values.shape[0]} values for {coords.shape[0]} channels")

    axis = np.linspace(-1.0, 1.0, grid_size)
    gx, gy = np.meshgrid(axis, axis)
    mask = gx ** 2 + gy ** 2 <= 1.0

    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)  # [G*G, 2]
    d2 = ((pts[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2)
    dist = np.sqrt(d2)

    k = min(k_neighbors, coords.shape[0])
    nearest = np.argpartition(dist, k - 1, axis=1)[:, :k]
    nd = np.take_along_axis(dist, nearest, axis=1)
    nv = values[nearest]

    with np.errstate(divide="ignore"):
        w = 1.0 / nd ** idw_power
    exact = nd[:, 0] < 1e-12  # grid cell on top of an electrode
    interp = np.where(
        exact,
        nv[:, 0],
        (w * nv).sum(axis=1) / np.where(exact, 1.0, w.sum(axis=1)),
    )
    grid = interp.reshape(grid_size, grid_size)

    inside = grid[mask]
    vmin, vmax = float(inside.min()), float(inside.max())
    span = vmax - vmin
    if span <= 1e-12 * max(abs(vmin), abs(vmax), 1.0):  # constant map up to rounding
        norm = np.zeros_like(grid)
    else:
        norm = (grid - vmin) / span
    norm = np.where(mask, norm, np.nan)
    return TopomapGrid(labels=list(labels), coordinates=coords, values=values,
                       grid=norm, mask=mask, vmin=vmin, vmax=vmax)


def write_svg(grid: TopomapGrid, path, cell: int = 8) -> None:
    """Flat SVG heatmap: colored cells inside the head plus an outline."""
    g = grid.grid.shape[0]
    size = g * cell
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i in range(g):
        for j in range(g):
            if not grid.mask[i, j]:
                continue
            v = grid.grid[i, j]
            r = int(255 * v)
            b = int(255 * (1.0 - v))
            # Row 0 of the grid is y=-1 (back of the head); SVG y grows downward,
            # so flip rows to draw the nose up.
            y = (g - 1 - i) * cell
            parts.append(
                f'<rect x="{j * cell}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="rgb({r},60,{b})"/>'
            )
    c = size / 2
    parts.append(
        f'<circle cx="{c}" cy="{c}" r="{c - cell / 2}" fill="none" stroke="black" stroke-width="2"/>'
    )
    parts.append("</svg>")
    with open(path, "w") as f:
        f.write("\n".join(parts) + "\n")
