"""Foreground quality metrics: PSNR, SSIM/MSSIM, ROC curves and AUC.

Frames are 2-D arrays with pixel values in [0, 255]; ground-truth
masks are boolean arrays of the same shape. ROC evaluation pools
confusion counts over all frames into a single curve.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import DegenerateInputError

PEAK = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = (0.01 * PEAK) ** 2
SSIM_C2 = (0.03 * PEAK) ** 2


def _check_pair(E, G):
    E = np.asarray(E, dtype=np.float64)
    G = np.asarray(G, dtype=np.float64)
    if E.ndim != 2 or G.ndim != 2:
        raise ValueError("frames must be 2-D")
    if E.shape != G.shape:
        raise ValueError(f"frame shapes differ: {E.shape} vs {G.shape}")
    return E, G


def psnr(E, G):
    """Peak signal-to-noise ratio 10*log10(255^2 / MSE) in dB.

    Identical frames (MSE = 0) yield the +inf sentinel; aggregate it
    separately rather than averaging it raw.
    """
    E, G = _check_pair(E, G)
    mse = float(np.mean((E - G) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK**2 / mse)


def _gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords[:, None] ** 2 + coords[None, :] ** 2) / (2.0 * sigma**2))
    return g / g.sum()


def ssim_map(E, G):
    """Local structural similarity over an 11x11 Gaussian window (sigma 1.5).

    Uses valid-region convolution (no padding), so the returned map is
    smaller than the input by the window size minus one in each
    dimension; a 5-pixel border is excluded.

    Raises:
        ValueError: frames smaller than the window.
    """
    E, G = _check_pair(E, G)
    if min(E.shape) < SSIM_WINDOW:
        raise ValueError(f"frames must be at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {E.shape}")
    win = _gaussian_window()
    mu1 = convolve2d(E, win, mode="valid")
    mu2 = convolve2d(G, win, mode="valid")
    s11 = convolve2d(E * E, win, mode="valid") - mu1 * mu1
    s22 = convolve2d(G * G, win, mode="valid") - mu2 * mu2
    s12 = convolve2d(E * G, win, mode="valid") - mu1 * mu2
    num = (2.0 * mu1 * mu2 + SSIM_C1) * (2.0 * s12 + SSIM_C2)
    den = (mu1 * mu1 + mu2 * mu2 + SSIM_C1) * (s11 + s22 + SSIM_C2)
    return num / den


def mssim(E, G):
    """Mean of the valid SSIM map; 1 exactly for identical frames."""
    return float(np.mean(ssim_map(E, G)))


def foreground_mask(F, eps1):
    """Binary mask |pixel| >= eps1 (boundary pixels count as foreground)."""
    return np.abs(np.asarray(F, dtype=np.float64)) >= eps1


def default_roc_thresholds():
    """The non-uniform threshold vector {0,15,20,25,30} + 31:2.5:253.5."""
    return np.concatenate(([0.0, 15.0, 20.0, 25.0, 30.0], np.arange(31.0, 255.0 + 1e-9, 2.5)))


@dataclass(frozen=True)
class RocPoint:
    """One operating point; tp+fp+tn+fn equals the pooled pixel count."""

    threshold: float
    tpr: float
    fpr: float
    tp: int
    fp: int
    tn: int
    fn: int


def roc_curve(frames, masks, thresholds=None):
    """Pooled ROC over a sequence of foreground frames and truth masks.

    At each threshold t, pixels with |frame| >= t are predicted
    foreground; confusion counts are pooled over all frames before
    computing TPR and FPR.

    Args:
        frames: iterable of 2-D score frames.
        masks: aligned iterable of boolean ground-truth masks.
        thresholds: ascending threshold vector; defaults to the
            non-uniform vector of default_roc_thresholds().

    Raises:
        DegenerateInputError: ground truth with no positive (or no
            negative) pixels anywhere.
        ValueError: misaligned inputs or unsorted thresholds.
    """
    frames = [np.asarray(f, dtype=np.float64) for f in frames]
    masks = [np.asarray(m, dtype=bool) for m in masks]
    if len(frames) != len(masks):
        raise ValueError(f"{len(frames)} frames vs {len(masks)} masks")
    if len(frames) == 0:
        raise ValueError("empty sequence")
    for f, m in zip(frames, masks):
        if f.shape != m.shape:
            raise ValueError(f"frame/mask shape mismatch: {f.shape} vs {m.shape}")
    if thresholds is None:
        thresholds = default_roc_thresholds()
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if thresholds.size < 1 or np.any(np.diff(thresholds) < 0):
        raise ValueError("thresholds must be sorted ascending")

    scores = np.abs(np.concatenate([f.ravel() for f in frames]))
    truth = np.concatenate([m.ravel() for m in masks])
    P = int(truth.sum())
    N = truth.size - P
    if P == 0:
        raise DegenerateInputError("ground truth has no positive pixels; TPR undefined")
    if N == 0:
        raise DegenerateInputError("ground truth has no negative pixels; FPR undefined")

    points = []
    pos_scores = scores[truth]
    neg_scores = scores[~truth]
    for t in thresholds:
        tp = int((pos_scores >= t).sum())
        fp = int((neg_scores >= t).sum())
        points.append(
            RocPoint(
                threshold=float(t),
                tpr=tp / P,
                fpr=fp / N,
                tp=tp,
                fp=fp,
                tn=N - fp,
                fn=P - tp,
            )
        )
    return points


def auc(points):
    """Trapezoidal area under the ROC curve, over FPR-sorted points."""
    if len(points) < 2:
        raise ValueError("need at least two ROC points for an area")
    order = sorted(points, key=lambda p: (p.fpr, p.tpr))
    fpr = np.array([p.fpr for p in order])
    tpr = np.array([p.tpr for p in order])
    return float(np.trapezoid(tpr, fpr))


def metrics_report(foreground_frames, truth_masks, eps1, thresholds=None):
    """Evaluate a recovered foreground sequence against ground truth.

    PSNR compares |foreground| against the 0/255 truth image; MSSIM
    additionally zeroes foreground components below eps1 first. ROC
    pools all frames. Infinite PSNR values are reported as None in the
    lists, counted in inf_count, and excluded from mean_psnr_finite.

    Returns:
        dict with keys psnr, mean_psnr_finite, inf_count, mssim,
        mean_mssim, roc, auc.
    """
    fg = [np.abs(np.asarray(f, dtype=np.float64)) for f in foreground_frames]
    gt = [np.asarray(m, dtype=bool) for m in truth_masks]
    if len(fg) != len(gt):
        raise ValueError(f"{len(fg)} frames vs {len(gt)} masks")
    psnr_vals = []
    mssim_vals = []
    for f, m in zip(fg, gt):
        ref = m.astype(np.float64) * PEAK
        psnr_vals.append(psnr(f, ref))
        denoised = np.where(f >= eps1, f, 0.0)
        mssim_vals.append(mssim(denoised, ref))
    finite = [v for v in psnr_vals if math.isfinite(v)]
    points = roc_curve(fg, gt, thresholds)
    return {
        "psnr": [v if math.isfinite(v) else None for v in psnr_vals],
        "mean_psnr_finite": float(np.mean(finite)) if finite else None,
        "inf_count": len(psnr_vals) - len(finite),
        "mssim": [float(v) for v in mssim_vals],
        "mean_mssim": float(np.mean(mssim_vals)),
        "roc": [
            {"threshold": p.threshold, "tpr": p.tpr, "fpr": p.fpr} for p in points
        ],
        "auc": auc(points),
    }


def save_roc_csv(path, points):
    """Write ROC points as CSV with header threshold,tpr,fpr."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("threshold", "tpr", "fpr"))
        for p in points:
            writer.writerow([repr(p.threshold), repr(p.tpr), repr(p.fpr)])
