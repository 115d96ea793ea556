"""Clustering evaluation: label alignment, overall/average accuracy, kappa.

Cluster ids are arbitrary, so predicted clusters are first matched one-to-one
to ground-truth classes by maximizing the total matched count with an optimal
assignment solver (greedy matching is order-dependent and can understate
accuracy). Only labeled pixels (ground truth > 0) enter any metric; the
clustering itself always runs on every pixel.
"""

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DataError
from .validation import check_labels_vector


def confusion_counts(pred, gt_labels):
    """Raw (class, cluster) count matrix over labeled pixels.

    Returns (counts, class_ids, cluster_ids) where counts[r, c] is the
    number of labeled pixels of class_ids[r] assigned to cluster_ids[c].
    """
    pred = check_labels_vector(pred, name="predicted labels")
    gt_labels = check_labels_vector(gt_labels, n=pred.shape[0], name="ground truth")
    labeled = gt_labels > 0
    if not np.any(labeled):
        raise DataError("ground truth has no labeled pixels to evaluate")
    classes = np.unique(gt_labels[labeled])
    clusters = np.unique(pred[labeled])
    counts = np.zeros((classes.size, clusters.size), dtype=np.int64)
    class_pos = {int(v): r for r, v in enumerate(classes)}
    cluster_pos = {int(v): c for c, v in enumerate(clusters)}
    for g, p in zip(gt_labels[labeled], pred[labeled]):
        counts[class_pos[int(g)], cluster_pos[int(p)]] += 1
    return counts, classes, clusters


def align_labels(pred, gt_labels):
    """Optimal one-to-one mapping from predicted clusters to classes.

    The confusion matrix is padded square so surplus clusters can stay
    unmatched; unmatched clusters map to None and their pixels count as
    errors. Columns are put in a canonical content order before solving so
    that ties between equally good matchings are always broken the same
    way no matter what the arbitrary cluster ids are: all three metrics
    stay exactly invariant under cluster relabeling.
    Returns a dict {cluster_id: class_id or None}.
    """
    counts, classes, clusters = confusion_counts(pred, gt_labels)
    col_order = sorted(
        range(clusters.size), key=lambda c: tuple(counts[:, c]), reverse=True
    )
    side = max(classes.size, clusters.size)
    padded = np.zeros((side, side), dtype=np.int64)
    padded[: classes.size, : clusters.size] = counts[:, col_order]
    rows, cols = linear_sum_assignment(padded, maximize=True)
    matched = {c: r for r, c in zip(rows, cols)}
    mapping = {}
    for pos, c in enumerate(col_order):
        r = matched.get(pos)
        mapping[int(clusters[c])] = (
            int(classes[r]) if r is not None and r < classes.size else None
        )
    return mapping


def aligned_confusion(pred, gt_labels):
    """Confusion matrix after alignment, shape (n_classes, n_classes + 1).

    Rows follow the class ids present in the ground truth, ascending.
    Column j < n_classes counts pixels predicted as the j-th class after
    mapping; the final column collects pixels from unmatched clusters
    ("no class", always wrong).
    """
    counts, classes, clusters = confusion_counts(pred, gt_labels)
    mapping = align_labels(pred, gt_labels)
    class_pos = {int(v): r for r, v in enumerate(classes)}
    out = np.zeros((classes.size, classes.size + 1), dtype=np.int64)
    for c, cluster in enumerate(clusters):
        target = mapping[int(cluster)]
        col = class_pos[target] if target is not None else classes.size
        out[:, col] += counts[:, c]
    return out


def overall_accuracy(cm):
    """Fraction of labeled pixels on the aligned diagonal."""
    cm = np.asarray(cm)
    total = cm.sum()
    if total == 0:
        raise DataError("empty confusion matrix")
    square = min(cm.shape)
    return float(np.trace(cm[:square, :square]) / total)


def average_accuracy(cm):
    """Mean per-class recall; classes with no labeled pixels are excluded."""
    cm = np.asarray(cm)
    row_totals = cm.sum(axis=1)
    keep = row_totals > 0
    if not np.any(keep):
        raise DataError("empty confusion matrix")
    diag = np.diagonal(cm)[: cm.shape[0]]
    recalls = diag[keep] / row_totals[keep]
    return float(recalls.mean())


def kappa(cm):
    """Chance-corrected agreement.

    Expected agreement uses the product of matching row and column
    marginals. Can be negative for worse-than-chance clusterings; the raw
    value is reported (callers may flag negatives). When expected
    agreement is 1 (single class and cluster), defined as 1 for perfect
    agreement and 0 otherwise.
    """
    cm = np.asarray(cm, dtype=np.float64)
    total = cm.sum()
    if total == 0:
        raise DataError("empty confusion matrix")
    n_classes = cm.shape[0]
    p_o = np.trace(cm[:, :n_classes]) / total
    row = cm.sum(axis=1)
    col = cm.sum(axis=0)[:n_classes]
    p_e = float(row @ col) / (total * total)
    if p_e >= 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return float((p_o - p_e) / (1.0 - p_e))


def evaluate(pred, gt):
    """All metrics plus the alignment for a prediction against ground truth.

    Returns a dict with keys oa, aa, kappa, kappa_negative, mapping.
    """
    labels = gt.labels if hasattr(gt, "labels") else gt
    cm = aligned_confusion(pred, labels)
    k = kappa(cm)
    return {
        "oa": overall_accuracy(cm),
        "aa": average_accuracy(cm),
        "kappa": k,
        "kappa_negative": k < 0,
        "mapping": align_labels(pred, labels),
    }
