"""Sparse exact linear algebra over Q(k).

Vectors are plain dicts mapping hashable coordinate keys to
:class:`~virmart.kappa.KappaRational` entries (zero entries are never stored).
"""

from __future__ import annotations

from .kappa import ONE, KappaRational

__all__ = ["Echelon", "nullspace", "solve", "rank", "vec_add", "vec_scale"]


def _weight(v: KappaRational) -> int:
    if v.is_constant:
        return 0
    return len(v.num_coeffs()) + len(v.den_coeffs())


def vec_add(a: dict, b: dict, s=ONE) -> dict:
    """Return ``a + s*b`` without mutating either argument."""
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k)
        nv = v * s if nv is None else nv + v * s
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def vec_scale(a: dict, s) -> dict:
    if not s:
        return {}
    return {k: v * s for k, v in a.items()}


class Echelon:
    """Incrementally built echelon basis that remembers how each row was made.

    ``add`` inserts a vector and reports whether it was independent of the
    previous ones.  ``express`` writes a vector in terms of the inserted
    (independent) vectors.  Pivots are chosen by lowest polynomial weight of
    the entry and then by ``key_order``, which keeps layouts reproducible.
    """

    def __init__(self, key_order=None):
        self.rows: list[tuple[object, dict, dict]] = []  # (pivot, row, combo)
        self.pivots: dict = {}
        self.basis: list[dict] = []
        self._key_order = key_order

    def __len__(self):
        return len(self.basis)

    def _reduce(self, vec: dict, combo: dict):
        vec = dict(vec)
        for piv, row, rcombo in self.rows:
            f = vec.get(piv)
            if f is None:
                continue
            neg = -f
            for k, v in row.items():
                nv = vec.get(k)
                nv = v * neg if nv is None else nv + v * neg
                if nv:
                    vec[k] = nv
                else:
                    del vec[k]
            for k, v in rcombo.items():
                nv = combo.get(k)
                nv = v * neg if nv is None else nv + v * neg
                if nv:
                    combo[k] = nv
                else:
                    combo.pop(k, None)
        return vec, combo

    def reduce(self, vec: dict):
        """Residual of ``vec`` and the combination of basis vectors removed."""
        res, combo = self._reduce(vec, {})
        return res, {k: -v for k, v in combo.items()}

    def add(self, vec: dict) -> bool:
        idx = len(self.basis)
        res, combo = self._reduce(vec, {idx: ONE})
        if not res:
            self._last_relation = combo
            return False
        if self._key_order is None:
            piv = min(res, key=lambda k: _weight(res[k]))
        else:
            piv = min(res, key=lambda k: (_weight(res[k]), self._key_order(k)))
        inv = ONE / res[piv]
        row = {k: v * inv for k, v in res.items()}
        combo = {k: v * inv for k, v in combo.items()}
        self.rows.append((piv, row, combo))
        self.pivots[piv] = len(self.rows) - 1
        self.basis.append(vec)
        return True

    def last_relation(self) -> dict:
        """After a failed ``add``: coefficients of the dependency found.

        The rejected vector carries index ``len(self.basis)``.
        """
        return self._last_relation

    def express(self, vec: dict) -> dict | None:
        """Coordinates of ``vec`` in the stored basis, or None if outside the span."""
        res, combo = self.reduce(vec)
        if res:
            return None
        return combo

    def contains(self, vec: dict) -> bool:
        res, _ = self._reduce(vec, {})
        return not res


def nullspace(columns: list[dict], key_order=None) -> list[dict]:
    """Basis of ``{x : sum_j x_j columns[j] = 0}``; each element maps j -> x_j."""
    ech = Echelon(key_order)
    index_of = []
    out = []
    for j, col in enumerate(columns):
        n = len(ech.basis)
        if ech.add(col):
            index_of.append(j)
        else:
            rel = ech.last_relation()
            vec = {}
            for i, v in rel.items():
                jj = j if i == n else index_of[i]
                vec[jj] = v
            out.append(vec)
    return out


def rank(columns: list[dict], key_order=None) -> int:
    ech = Echelon(key_order)
    for col in columns:
        ech.add(col)
    return len(ech.basis)


def solve(columns: list[dict], rhs: dict, key_order=None):
    """A particular solution x with ``sum_j x_j columns[j] = rhs`` or None."""
    ech = Echelon(key_order)
    index_of = []
    for j, col in enumerate(columns):
        if ech.add(col):
            index_of.append(j)
    coords = ech.express(rhs)
    if coords is None:
        return None
    return {index_of[i]: v for i, v in coords.items()}
