"""Pure numpy fallback for :mod:`newsflow._pairwise` (same signature, same output)."""

import numpy as np


def score_rows(gram_indptr, gram_ids, sizes, post_indptr, post_ids, row_start, row_stop, floor):
    n = sizes.shape[0]
    sizes = sizes.astype(np.int64)
    postings = np.split(post_ids, post_indptr[1:-1])
    out_i, out_j, out_s = [], [], []
    for i in range(row_start, row_stop):
        grams = gram_ids[gram_indptr[i]:gram_indptr[i + 1]]
        if grams.size:
            hits = np.concatenate([postings[g] for g in grams])
            counts = np.bincount(hits, minlength=n)[i + 1:]
        else:
            counts = np.zeros(n - i - 1, dtype=np.int64)
        denom = np.minimum(sizes[i], sizes[i + 1:])
        scores = counts.astype(np.float64) / denom.astype(np.float64)
        keep = np.flatnonzero(scores >= floor)
        if keep.size:
            out_i.append(np.full(keep.size, i, dtype=np.int32))
            out_j.append((keep + i + 1).astype(np.int32))
            out_s.append(scores[keep])
    if not out_i:
        return (np.empty(0, np.int32), np.empty(0, np.int32), np.empty(0, np.float64))
    return np.concatenate(out_i), np.concatenate(out_j), np.concatenate(out_s)
