"""Image-space localization measures, in pixel units."""

from __future__ import annotations

import numpy as np

from .core import Phantom, SimConfig, pixel_centers


def intensity_centroid(image: np.ndarray) -> np.ndarray:
    """(row, col) centroid of the positive part; NaN for an image with no positive pixel."""
    w = np.clip(np.asarray(image, dtype=np.float64), 0, None)
    total = w.sum()
    if total <= 0:
        return np.array([np.nan, np.nan])
    r, c = np.indices(w.shape)
    return np.array([(w * r).sum() / total, (w * c).sum() / total])


def centroid_errors(images, targets) -> np.ndarray:
    """Distance in pixels between output and target centroids; inf where the output is empty."""
    out = []
    for img, gt in zip(images, targets):
        d = np.linalg.norm(intensity_centroid(img) - intensity_centroid(gt))
        out.append(np.inf if np.isnan(d) else d)
    return np.array(out)


def disc_center_px(phantom: Phantom, config: SimConfig) -> np.ndarray:
    """Disc centers as fractional (row, col) pixel indices."""
    xs, _ = pixel_centers(config)
    arr = phantom.to_array()
    return np.stack([(arr[:, 1] - xs[0]) / config.pitch, (arr[:, 0] - xs[0]) / config.pitch], 1)


def local_centroid_errors(image: np.ndarray, phantom: Phantom, config: SimConfig,
                          search_px: float = 3.0, level: float = 0.5) -> np.ndarray:
    """Per disc: distance (pixels) from the true center to the reconstructed local peak.

    Around each disc (radius + search_px) the pixels at or above ``level`` times
    the local maximum form the peak; its intensity-weighted centroid is the
    estimate. A patch with no positive pixel gives inf.
    """
    centers = disc_center_px(phantom, config)
    radii = phantom.to_array()[:, 2] / config.pitch
    r, c = np.indices(image.shape)
    w = np.clip(image, 0, None)
    errs = []
    for (cr, cc), rad in zip(centers, radii):
        patch = (r - cr) ** 2 + (c - cc) ** 2 <= (rad + search_px) ** 2
        peak = w[patch].max() if patch.any() else 0.0
        if peak <= 0:
            errs.append(np.inf)
            continue
        sel = patch & (w >= level * peak)
        est = np.array([(w * r)[sel].sum(), (w * c)[sel].sum()]) / w[sel].sum()
        errs.append(float(np.linalg.norm(est - [cr, cc])))
    return np.array(errs)
