"""Images and superpixel extraction.

Images are (H, W, C) float arrays with intensities in [0, 1], C in {1, 3}.
Two segmenters are provided: a SLIC-style k-means in (color, position)
space, and an exactly reproducible rectangular grid fallback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image as PILImage

__all__ = [
    "Image",
    "SuperpixelMap",
    "slic_segments",
    "grid_segments",
    "load_image",
    "save_image",
]


@dataclass(frozen=True)
class Image:
    """Row-major image with intensities in [0, 1]."""

    pixels: np.ndarray  # (H, W, C)

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] not in (1, 3):
            raise ValueError("pixels must be (H, W, C) with C in {1, 3}")
        if p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("image dimensions must be positive")
        if p.min() < 0.0 or p.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


@dataclass(frozen=True)
class SuperpixelMap:
    """Per-pixel segment labels. Labels are contiguous ids [0, n_segments)."""

    labels: np.ndarray  # (H, W) int
    n_segments: int

    def __post_init__(self):
        present = np.unique(self.labels)
        if present[0] < 0 or present[-1] >= self.n_segments or present.size != self.n_segments:
            raise ValueError("labels must cover exactly the ids [0, n_segments)")


def grid_segments(img: Image, rows: int, cols: int) -> SuperpixelMap:
    """rows x cols rectangular tiles; tile sizes differ by at most one pixel.

    Labels run in row-major tile order, so results are bit-exact across runs.
    """
    h, w = img.height, img.width
    if not (1 <= rows <= h) or not (1 <= cols <= w):
        raise ValueError("grid shape must satisfy 1 <= rows <= height, 1 <= cols <= width")
    row_edges = np.array([len(c) for c in np.array_split(np.arange(h), rows)]).cumsum()
    col_edges = np.array([len(c) for c in np.array_split(np.arange(w), cols)]).cumsum()
    row_id = np.searchsorted(row_edges, np.arange(h), side="right")
    col_id = np.searchsorted(col_edges, np.arange(w), side="right")
    labels = row_id[:, None] * cols + col_id[None, :]
    labels.flags.writeable = False
    return SuperpixelMap(labels=labels, n_segments=rows * cols)


def slic_segments(
    img: Image,
    target_segments: int = 50,
    compactness: float = 10.0,
    iterations: int = 10,
) -> SuperpixelMap:
    """SLIC-style segmentation: k-means over (color, position) features.

    Centers start on a near-uniform grid; each iteration assigns pixels to
    the nearest center within a 2S window (S = grid step) using
    d = sqrt(d_color^2 + (compactness * d_xy / S)^2), then recomputes
    centers. A post-pass merges disconnected fragments into a 4-connected
    neighbor, so segments are guaranteed 4-connected but their count may
    drift from the target.
    """
    if target_segments < 1:
        raise ValueError("target_segments must be >= 1")
    h, w = img.height, img.width
    if target_segments > h * w:
        raise ValueError("target_segments exceeds pixel count")
    pixels = img.pixels.astype(np.float64)
    c = img.channels

    rows = int(round(np.sqrt(target_segments * h / w))) or 1
    rows = min(rows, h)
    cols = int(np.ceil(target_segments / rows))
    cols = min(cols, w)
    k = rows * cols
    step = np.sqrt(h * w / k)

    ys = (np.arange(rows) + 0.5) * h / rows
    xs = (np.arange(cols) + 0.5) * w / cols
    cy, cx = np.meshgrid(ys, xs, indexing="ij")
    cy = cy.ravel()
    cx = cx.ravel()
    ccol = pixels[np.clip(cy.astype(int), 0, h - 1), np.clip(cx.astype(int), 0, w - 1)]

    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    labels = np.zeros((h, w), dtype=np.int64)

    spatial_scale = (compactness / step) ** 2
    for _ in range(iterations):
        best = np.full((h, w), np.inf)
        for j in range(k):
            y0 = max(int(cy[j] - 2 * step), 0)
            y1 = min(int(cy[j] + 2 * step) + 1, h)
            x0 = max(int(cx[j] - 2 * step), 0)
            x1 = min(int(cx[j] + 2 * step) + 1, w)
            if y0 >= y1 or x0 >= x1:
                continue
            dcol = np.sum((pixels[y0:y1, x0:x1] - ccol[j]) ** 2, axis=2)
            dxy = (yy[y0:y1, x0:x1] - cy[j]) ** 2 + (xx[y0:y1, x0:x1] - cx[j]) ** 2
            dist = dcol + spatial_scale * dxy
            win = best[y0:y1, x0:x1]
            closer = dist < win
            win[closer] = dist[closer]
            labels[y0:y1, x0:x1][closer] = j
        for j in range(k):
            sel = labels == j
            if not sel.any():
                continue
            cy[j] = yy[sel].mean()
            cx[j] = xx[sel].mean()
            ccol[j] = pixels[sel].reshape(-1, c).mean(axis=0)

    labels = _enforce_connectivity(labels)
    labels.flags.writeable = False
    return SuperpixelMap(labels=labels, n_segments=int(labels.max()) + 1)


def _enforce_connectivity(labels: np.ndarray) -> np.ndarray:
    """Split labels into 4-connected components, keep the largest component
    of each label, and merge every other fragment into an adjacent one."""
    h, w = labels.shape
    comp = np.full((h, w), -1, dtype=np.int64)
    comp_label = []
    comp_size = []
    n_comp = 0
    for sy in range(h):
        for sx in range(w):
            if comp[sy, sx] >= 0:
                continue
            lab = labels[sy, sx]
            stack = [(sy, sx)]
            comp[sy, sx] = n_comp
            size = 0
            while stack:
                y, x = stack.pop()
                size += 1
                for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                    if 0 <= ny < h and 0 <= nx < w and comp[ny, nx] < 0 and labels[ny, nx] == lab:
                        comp[ny, nx] = n_comp
                        stack.append((ny, nx))
            comp_label.append(lab)
            comp_size.append(size)
            n_comp += 1

    comp_label = np.array(comp_label)
    comp_size = np.array(comp_size)
    keep = np.zeros(n_comp, dtype=bool)
    for lab in np.unique(comp_label):
        members = np.flatnonzero(comp_label == lab)
        keep[members[np.argmax(comp_size[members])]] = True

    # Orphan fragments adopt the label of their most common kept neighbor.
    # Iterate until stable; each pass resolves fragments touching a kept one.
    out = labels.copy()
    resolved = keep.copy()
    while not resolved.all():
        progress = False
        for ci in np.flatnonzero(~resolved):
            sel = comp == ci
            ys, xs = np.nonzero(sel)
            votes: dict[int, int] = {}
            for y, x in zip(ys, xs):
                for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                    if 0 <= ny < h and 0 <= nx < w and resolved[comp[ny, nx]] and comp[ny, nx] != ci:
                        key = int(out[ny, nx])
                        votes[key] = votes.get(key, 0) + 1
            if votes:
                out[sel] = max(votes.items(), key=lambda kv: (kv[1], -kv[0]))[0]
                resolved[ci] = True
                progress = True
        if not progress:  # isolated ring of orphans; absorb into label 0
            out[~resolved[comp]] = out.flat[np.argmax(resolved[comp])]
            break

    # compact label ids
    uniq, compacted = np.unique(out, return_inverse=True)
    return compacted.reshape(h, w)


def load_image(path: str) -> Image:
    """Read a PNG/PPM/PGM file into a [0, 1] float image."""
    with PILImage.open(path) as im:
        if im.mode in ("L", "I;16", "I"):
            arr = np.asarray(im.convert("L"), dtype=np.float64)[:, :, None] / 255.0
        else:
            arr = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    return Image(np.clip(arr, 0.0, 1.0))


def save_image(img_or_pixels, path: str) -> None:
    """Write an image (PNG/PPM/PGM chosen by extension)."""
    pixels = img_or_pixels.pixels if isinstance(img_or_pixels, Image) else np.asarray(img_or_pixels)
    arr = np.clip(np.round(pixels * 255.0), 0, 255).astype(np.uint8)
    if arr.shape[2] == 1:
        PILImage.fromarray(arr[:, :, 0], mode="L").save(path)
    else:
        PILImage.fromarray(arr, mode="RGB").save(path)
