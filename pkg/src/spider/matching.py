"""Sparse correspondences: extraction from head outputs, fusion, file format.

The interchange format is TSV with header ``xA yA xB yB conf source`` and
4-decimal floats; it is what the geometry and metrics stages consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import MatchFormatError, ShapeError

SOURCES = ("warp", "descriptor", "gt")


@dataclass(frozen=True)
class Match:
    xa: float
    ya: float
    xb: float
    yb: float
    conf: float
    source: str = "gt"


@dataclass
class MatchSet:
    """Ordered match list with provenance. (xa, ya, source) triples are unique."""

    matches: list[Match] = field(default_factory=list)
    pair_id: str = ""
    direction: str = "AtoB"
    flags: list[str] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for m in self.matches:
            if m.source not in SOURCES:
                raise ShapeError(f"unknown match source '{m.source}'")
            key = (m.xa, m.ya, m.source)
            if key in seen:
                raise ShapeError(f"duplicate source pixel {key}")
            seen.add(key)

    def __len__(self):
        return len(self.matches)

    def __iter__(self):
        return iter(self.matches)

    def count_by_source(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for m in self.matches:
            out[m.source] = out.get(m.source, 0) + 1
        return out

    def arrays(self):
        """(N,4) coordinate array, (N,) confidences, list of sources."""
        if not self.matches:
            return np.zeros((0, 4)), np.zeros(0), []
        coords = np.array([[m.xa, m.ya, m.xb, m.yb] for m in self.matches])
        conf = np.array([m.conf for m in self.matches])
        return coords, conf, [m.source for m in self.matches]


def write_matches(path, mset: MatchSet) -> None:
    lines = ["xA\tyA\txB\tyB\tconf\tsource"]
    for m in mset.matches:
        lines.append(
            f"{m.xa:.4f}\t{m.ya:.4f}\t{m.xb:.4f}\t{m.yb:.4f}\t{m.conf:.4f}\t{m.source}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def read_matches(path) -> MatchSet:
    text = Path(path).read_text().splitlines()
    if not text or text[0].split("\t") != ["xA", "yA", "xB", "yB", "conf", "source"]:
        raise MatchFormatError(f"{path}:1: bad or missing header")
    matches = []
    for lineno, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 6:
            raise MatchFormatError(f"{path}:{lineno}: expected 6 columns, got {len(parts)}")
        try:
            vals = [float(p) for p in parts[:5]]
        except ValueError as e:
            raise MatchFormatError(f"{path}:{lineno}: {e}") from None
        if parts[5] not in SOURCES:
            raise MatchFormatError(f"{path}:{lineno}: unknown source '{parts[5]}'")
        matches.append(Match(*vals, source=parts[5]))
    return MatchSet(matches)


# ---------------------------------------------------------------------------
# descriptor matching


def mutual_nn(desc_a, desc_b, conf_a, conf_b, block=512) -> MatchSet:
    """Reciprocal nearest neighbors between unit-norm descriptor maps.

    desc_*: [d, H, W]; conf_*: [H, W]. Ties break to the lowest linear index
    (argmax convention). Match confidence is the mean of the two per-pixel
    confidences.
    """
    d, ha, wa = desc_a.shape
    _, hb, wb = desc_b.shape
    a = desc_a.reshape(d, -1).T
    b = desc_b.reshape(d, -1).T
    na, nb = a.shape[0], b.shape[0]
    best_ab = np.empty(na, dtype=np.int64)
    for lo in range(0, na, block):
        hi = min(lo + block, na)
        best_ab[lo:hi] = np.argmax(a[lo:hi] @ b.T, axis=1)
    best_ba = np.empty(nb, dtype=np.int64)
    for lo in range(0, nb, block):
        hi = min(lo + block, nb)
        best_ba[lo:hi] = np.argmax(b[lo:hi] @ a.T, axis=1)
    ia = np.arange(na)
    mutual = best_ba[best_ab] == ia
    ca = conf_a.reshape(-1)
    cb = conf_b.reshape(-1)
    matches = []
    for i in np.nonzero(mutual)[0]:
        j = best_ab[i]
        matches.append(
            Match(
                float(i % wa),
                float(i // wa),
                float(j % wb),
                float(j // wb),
                float(0.5 * (ca[i] + cb[j])),
                source="descriptor",
            )
        )
    return MatchSet(matches)


# ---------------------------------------------------------------------------
# warp sampling


def sample_warp_matches(
    warp, conf, n: int, certainty_floor: float, seed: int, bounds=None
) -> MatchSet:
    """Draw up to n source pixels without replacement, probability ~ confidence.

    Pixels below the certainty floor or warped out of bounds are ineligible.
    Philox (counter-based) randomness keys the draw to the seed alone.
    """
    _, h, w = warp.shape
    hb, wb = bounds if bounds is not None else (h, w)
    c = np.asarray(conf, dtype=np.float64).reshape(-1)
    wx = warp[0].reshape(-1)
    wy = warp[1].reshape(-1)
    eligible = (c >= certainty_floor) & (wx >= 0) & (wx <= wb - 1) & (wy >= 0) & (wy <= hb - 1)
    idx = np.nonzero(eligible)[0]
    flags = []
    if idx.size == 0:
        return MatchSet([], flags=["no-eligible-pixels"])
    take = min(n, idx.size)
    if idx.size < n:
        flags.append("short")
        chosen = idx
    else:
        p = c[idx]
        total = p.sum()
        if total <= 0:
            p = np.full(idx.size, 1.0 / idx.size)
        else:
            p = p / total
        rng = np.random.Generator(np.random.Philox(key=seed))
        chosen = rng.choice(idx, size=take, replace=False, p=p, shuffle=False)
        chosen = np.sort(chosen)
    matches = [
        Match(float(i % w), float(i // w), float(wx[i]), float(wy[i]), float(c[i]), "warp")
        for i in chosen
    ]
    return MatchSet(matches, flags=flags)


# ---------------------------------------------------------------------------
# fusion and bidirectional merging


def fuse_matches(warp_set: MatchSet, desc_set: MatchSet, n_total: int) -> MatchSet:
    """Confidence-balanced union: rank within each head, never across heads.

    Each head contributes ~n_total/2 of its own top-confidence matches; when
    one head runs short the other absorbs the remainder. An odd slot goes to
    the head with more candidates.
    """
    if len(warp_set) == 0 and len(desc_set) == 0:
        return MatchSet([], flags=["both-empty"])
    if len(warp_set) == 0:
        return _top_k(desc_set, n_total, extra_flags=["warp-empty"])
    if len(desc_set) == 0:
        return _top_k(warp_set, n_total, extra_flags=["desc-empty"])
    base = n_total // 2
    share_w, share_d = base, base
    if n_total % 2:
        if len(warp_set) >= len(desc_set):
            share_w += 1
        else:
            share_d += 1
    take_w = min(share_w, len(warp_set))
    take_d = min(share_d, len(desc_set))
    spare = n_total - take_w - take_d
    if spare > 0:
        if take_w < share_w:
            take_d = min(take_d + spare, len(desc_set))
        elif take_d < share_d:
            take_w = min(take_w + spare, len(warp_set))
    picked = _best(warp_set, take_w) + _best(desc_set, take_d)
    return MatchSet(picked, pair_id=warp_set.pair_id or desc_set.pair_id,
                    direction=warp_set.direction)


def _sort_key(m: Match):
    return (-m.conf, m.xa, m.ya, m.xb, m.yb, m.source)


def _best(mset: MatchSet, k: int) -> list[Match]:
    return sorted(mset.matches, key=_sort_key)[:k]


def _top_k(mset: MatchSet, k: int, extra_flags=()) -> MatchSet:
    return MatchSet(_best(mset, k), pair_id=mset.pair_id, direction=mset.direction,
                    flags=list(mset.flags) + list(extra_flags))


def bidirectional_merge(set_ab: MatchSet, set_ba: MatchSet, radius: float = 0.5) -> MatchSet:
    """Merge A->B matches with B->A matches (coordinate-swapped into A->B).

    Entries within `radius` px at both endpoints collapse to the highest
    confidence one; the greedy pass runs in a deterministic global order so
    the result is symmetric in its inputs.
    """
    swapped = [Match(m.xb, m.yb, m.xa, m.ya, m.conf, m.source) for m in set_ba.matches]
    pool = sorted(list(set_ab.matches) + swapped, key=_sort_key)
    kept: list[Match] = []
    cell: dict[tuple, list[int]] = {}
    inv = 1.0 / radius if radius > 0 else 0.0

    def cells_near(m):
        cxa, cya = int(np.floor(m.xa * inv)), int(np.floor(m.ya * inv))
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                yield (cxa + dx, cya + dy)

    for m in pool:
        dup = False
        if radius > 0:
            for key in cells_near(m):
                for ki in cell.get(key, ()):
                    k = kept[ki]
                    if (m.xa - k.xa) ** 2 + (m.ya - k.ya) ** 2 < radius**2 and (
                        m.xb - k.xb
                    ) ** 2 + (m.yb - k.yb) ** 2 < radius**2:
                        dup = True
                        break
                if dup:
                    break
        if not dup:
            kept.append(m)
            if radius > 0:
                key = (int(np.floor(m.xa * inv)), int(np.floor(m.ya * inv)))
                cell.setdefault(key, []).append(len(kept) - 1)
    try:
        return MatchSet(kept, pair_id=set_ab.pair_id, direction="AtoB")
    except ShapeError:
        # exact (xa, ya, source) collisions with distinct targets survive the
        # radius test; keep the first (highest confidence) of each triple
        seen = set()
        unique = []
        for m in kept:
            key = (m.xa, m.ya, m.source)
            if key not in seen:
                seen.add(key)
                unique.append(m)
        return MatchSet(unique, pair_id=set_ab.pair_id, direction="AtoB")
