"""Finite cell complexes with oriented incidence data.

A complex is a list of cells (id, dimension, anchor vertex) plus incidence
records.  Each record connects a coface to one face *occurrence* and carries
an integer coefficient and a connector path in the 1-skeleton from the
coface's anchor to the face's anchor.  The integer boundary matrix is the sum
of record coefficients per (coface, face) pair; the per-occurrence paths are
what twisted assembly consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg_exact as lx
from .errors import InvalidComplexError, PathComplexMismatchError


@dataclass(frozen=True)
class EdgePath:
    """Walk in the 1-skeleton: ordered (edge id, direction) steps."""

    steps: tuple = ()
    src: object = None
    dst: object = None

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple((e, int(d)) for e, d in self.steps))
        if not self.steps and self.dst is None:
            object.__setattr__(self, "dst", self.src)

    @property
    def is_empty(self):
        return not self.steps

    @property
    def is_closed(self):
        return self.src == self.dst

    def reverse(self):
        return EdgePath(tuple((e, -d) for e, d in reversed(self.steps)), self.dst, self.src)

    def compose(self, other):
        if self.dst != other.src:
            raise PathComplexMismatchError(
                f"cannot compose path ending at {self.dst!r} with path starting at {other.src!r}"
            )
        return EdgePath(self.steps + other.steps, self.src, other.dst)

    def __mul__(self, other):
        return self.compose(other)

    def repeat(self, n):
        out = EdgePath((), self.src, self.src)
        base = self if n >= 0 else self.reverse()
        for _ in range(abs(n)):
            out = out.compose(base)
        return out


@dataclass(frozen=True)
class Cell:
    id: object
    dim: int
    anchor: object


@dataclass(frozen=True)
class Incidence:
    coface: object
    face: object
    coeff: int
    path: EdgePath


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    def add(self, code, message):
        self.violations.append((code, message))

    @property
    def ok(self):
        return not self.violations

    def summary(self):
        if self.ok:
            return "ok"
        return "; ".join(f"[{code}] {msg}" for code, msg in self.violations)


class ComplexDescription:
    """Immutable finite complex with oriented incidence data and a base vertex."""

    def __init__(self, cells, incidences, base_vertex, name="", simplex_vertices=None):
        self.cells = tuple(
            c if isinstance(c, Cell) else Cell(c[0], int(c[1]), c[2]) for c in cells
        )
        self.incidences = tuple(
            i if isinstance(i, Incidence) else Incidence(i[0], i[1], int(i[2]), i[3])
            for i in incidences
        )
        self.base_vertex = base_vertex
        self.name = name
        # optional simplicial structure: cell id -> ordered vertex tuple
        self.simplex_vertices = dict(simplex_vertices) if simplex_vertices else None
        self._cell_by_id = {c.id: c for c in self.cells}
        self._by_dim = {}
        for c in self.cells:
            self._by_dim.setdefault(c.dim, []).append(c)
        for cs in self._by_dim.values():
            cs.sort(key=lambda c: str(c.id))
        self._incident_by_coface = {}
        for rec in self.incidences:
            self._incident_by_coface.setdefault(rec.coface, []).append(rec)
        self._validation = None
        self._walks = {}
        self._h1 = None
        self._tree = None

    # -- basic structure ----------------------------------------------------

    @property
    def dim(self):
        return max(self._by_dim) if self._by_dim else 0

    def cells_of_dim(self, d):
        return list(self._by_dim.get(d, []))

    def cell(self, cell_id):
        return self._cell_by_id[cell_id]

    def has_cell(self, cell_id):
        return cell_id in self._cell_by_id

    def records_of(self, coface_id):
        return list(self._incident_by_coface.get(coface_id, []))

    def edge_endpoints(self, edge_id):
        """(tail, head) of a 1-cell, from its signed vertex records."""
        tail = head = None
        for rec in self.records_of(edge_id):
            if rec.coeff == 1:
                head = rec.face
            elif rec.coeff == -1:
                tail = rec.face
        if tail is None or head is None:
            raise PathComplexMismatchError(
                f"1-cell {edge_id!r} lacks a (+1, -1) vertex record pair"
            )
        return tail, head

    def step_endpoints(self, step):
        e, d = step
        tail, head = self.edge_endpoints(e)
        return (tail, head) if d == 1 else (head, tail)

    def path_is_valid(self, path, src=None, dst=None):
        at = path.src if src is None else src
        for step in path.steps:
            if not self.has_cell(step[0]) or self.cell(step[0]).dim != 1:
                return False
            s, t = self.step_endpoints(step)
            if s != at:
                return False
            at = t
        if path.src is not None and src is not None and path.src != src:
            return False
        want = path.dst if dst is None else dst
        return at == want

    def path_chain(self, path):
        """Integer 1-chain of a walk, as {edge id: coefficient}."""
        out = {}
        for e, d in path.steps:
            out[e] = out.get(e, 0) + d
        return {e: c for e, c in out.items() if c != 0}

    # -- validation ----------------------------------------------------------

    def validate(self):
        if self._validation is not None:
            return self._validation
        rep = ValidationReport()
        ids = [c.id for c in self.cells]
        if len(set(ids)) != len(ids):
            rep.add("duplicate-id", "cell ids are not unique")
        if not self.has_cell(self.base_vertex) or self.cell(self.base_vertex).dim != 0:
            rep.add("base-vertex", f"base vertex {self.base_vertex!r} is not a 0-cell")
        for c in self.cells:
            if c.dim < 0:
                rep.add("dimension", f"cell {c.id!r} has negative dimension")
            if c.dim == 0:
                if c.anchor != c.id:
                    rep.add("anchor", f"0-cell {c.id!r} must anchor itself")
            elif not self.has_cell(c.anchor) or self.cell(c.anchor).dim != 0:
                rep.add("anchor", f"cell {c.id!r} anchor {c.anchor!r} is not a 0-cell")
        for rec in self.incidences:
            if not self.has_cell(rec.coface) or not self.has_cell(rec.face):
                rep.add("incidence", f"incidence {rec.coface!r}->{rec.face!r} names unknown cells")
                continue
            dc, df = self.cell(rec.coface).dim, self.cell(rec.face).dim
            if dc != df + 1:
                rep.add(
                    "incidence-dim",
                    f"incidence {rec.coface!r}->{rec.face!r} connects dim {dc} to dim {df}",
                )
            if rec.coeff == 0:
                rep.add("incidence-coeff", f"incidence {rec.coface!r}->{rec.face!r} has coefficient 0")
        # 1-cells need well-defined endpoints before path checks mean anything
        endpoints_ok = True
        for c in self.cells_of_dim(1):
            recs = self.records_of(c.id)
            plus = [r for r in recs if r.coeff == 1]
            minus = [r for r in recs if r.coeff == -1]
            if len(plus) != 1 or len(minus) != 1 or len(recs) != 2:
                rep.add(
                    "edge-endpoints",
                    f"1-cell {c.id!r} needs exactly one +1 and one -1 vertex record",
                )
                endpoints_ok = False
        if endpoints_ok:
            for rec in self.incidences:
                if not self.has_cell(rec.coface) or not self.has_cell(rec.face):
                    continue
                if self.cell(rec.coface).dim == 0:
                    continue
                a_from = self.cell(rec.coface).anchor
                a_to = self.cell(rec.face).anchor
                if rec.path.src != a_from or rec.path.dst != a_to or not self.path_is_valid(rec.path):
                    rep.add(
                        "connector",
                        f"incidence {rec.coface!r}->{rec.face!r} connector is not a walk "
                        f"{a_from!r} -> {a_to!r}",
                    )
            if not self._skeleton_connected():
                rep.add("connectivity", "1-skeleton is not connected")
        # integer boundary-of-boundary; int64 is exact at desk scale and the
        # magnitude guard rejects anything that could wrap
        for d in range(2, self.dim + 1):
            bd = np.array(self.boundary_matrix_int(d), dtype=np.int64)
            bd1 = np.array(self.boundary_matrix_int(d - 1), dtype=np.int64)
            if bd.size == 0 or bd1.size == 0:
                continue
            if max(np.abs(bd).max(initial=0), np.abs(bd1).max(initial=0)) > 2**20:
                rep.add("boundary-coeff", "incidence coefficients too large to verify")
                continue
            prod = bd1 @ bd
            faces = self.cells_of_dim(d - 2)
            cofs = self.cells_of_dim(d)
            for i, f in enumerate(faces):
                for j, cf in enumerate(cofs):
                    if prod[i][j] != 0:
                        rep.add(
                            "boundary-squared",
                            f"d(d({cf.id!r})) has coefficient {prod[i][j]} on {f.id!r}",
                        )
        self._validation = rep
        return rep

    def require_valid(self):
        rep = self.validate()
        if not rep.ok:
            raise InvalidComplexError(rep)

    def _skeleton_connected(self):
        verts = {c.id for c in self.cells_of_dim(0)}
        if self.base_vertex not in verts:
            return False
        adj = {v: set() for v in verts}
        for c in self.cells_of_dim(1):
            try:
                t, h = self.edge_endpoints(c.id)
            except PathComplexMismatchError:
                return False
            adj[t].add(h)
            adj[h].add(t)
        seen = {self.base_vertex}
        stack = [self.base_vertex]
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == verts

    # -- integer chain complex ----------------------------------------------

    def boundary_matrix_int(self, d):
        """Integer boundary matrix, rows (d-1)-cells, columns d-cells."""
        rows = self.cells_of_dim(d - 1)
        cols = self.cells_of_dim(d)
        ri = {c.id: i for i, c in enumerate(rows)}
        ci = {c.id: j for j, c in enumerate(cols)}
        m = [[0] * len(cols) for _ in rows]
        for rec in self.incidences:
            if rec.coface in ci and rec.face in ri:
                m[ri[rec.face]][ci[rec.coface]] += rec.coeff
        return m

    def euler_characteristic(self):
        self.require_valid()
        return sum((-1) ** d * len(cs) for d, cs in self._by_dim.items())

    def integral_homology(self, degree):
        """(betti, torsion coefficients) of H_degree over the integers."""
        self.require_valid()
        n = len(self.cells_of_dim(degree))
        if n == 0:
            return 0, []
        bd = self.boundary_matrix_int(degree)
        bd_up = self.boundary_matrix_int(degree + 1)
        rank_down = _int_rank(bd)
        _, d_up, _ = lx.smith_normal_form(bd_up) if bd_up and bd_up[0] else (None, [], None)
        divisors = [d_up[i][i] for i in range(min(len(d_up), len(d_up[0]) if d_up else 0))] if d_up else []
        divisors = [x for x in divisors if x != 0]
        betti = n - rank_down - len(divisors)
        torsion = sorted(x for x in divisors if x > 1)
        return betti, torsion

    # -- spanning tree and H1 machinery --------------------------------------

    def spanning_tree(self):
        """Deterministic spanning tree, lowest-id-first growth from the base."""
        if self._tree is not None:
            return self._tree
        self.require_valid()
        edges = self.cells_of_dim(1)
        in_tree_vertices = {self.base_vertex}
        tree_edges = []
        parent = {self.base_vertex: None}  # vertex -> (edge, dir) into it
        changed = True
        while changed:
            changed = False
            for e in edges:
                t, h = self.edge_endpoints(e.id)
                if t in in_tree_vertices and h not in in_tree_vertices:
                    tree_edges.append(e.id)
                    parent[h] = (e.id, 1, t)
                    in_tree_vertices.add(h)
                    changed = True
                    break
                if h in in_tree_vertices and t not in in_tree_vertices:
                    tree_edges.append(e.id)
                    parent[t] = (e.id, -1, h)
                    in_tree_vertices.add(t)
                    changed = True
                    break
        self._tree = (set(tree_edges), parent)
        return self._tree

    def tree_path(self, vertex):
        """EdgePath from the base vertex to `vertex` inside the spanning tree."""
        _, parent = self.spanning_tree()
        steps = []
        v = vertex
        while parent[v] is not None:
            e, d, prev = parent[v]
            steps.append((e, d))
            v = prev
        steps.reverse()
        return EdgePath(tuple(steps), self.base_vertex, vertex)

    def fundamental_loop(self, edge_id):
        """Based loop through a non-tree edge: tree path, edge, tree path back."""
        t, h = self.edge_endpoints(edge_id)
        mid = EdgePath(((edge_id, 1),), t, h)
        return self.tree_path(t).compose(mid).compose(self.tree_path(h).reverse())

    def h1_lattice(self):
        if self._h1 is None:
            self._h1 = H1Lattice(self)
        return self._h1

    def attaching_walk(self, face_id):
        """Reconstruct the attaching walk of a 2-cell from its records.

        Records are placed by connector length: a +1 record with prefix p sits
        at position len(p)+1, a -1 record with connector q at position len(q).
        Every connector must equal the walk prefix it claims to be.
        """
        if face_id in self._walks:
            return self._walks[face_id]
        cell = self.cell(face_id)
        if cell.dim != 2:
            raise PathComplexMismatchError(f"{face_id!r} is not a 2-cell")
        recs = self.records_of(face_id)
        slots = {}
        for rec in recs:
            if abs(rec.coeff) != 1:
                raise PathComplexMismatchError(
                    f"2-cell {face_id!r} has a record with |coeff| != 1; no attaching walk"
                )
            pos = len(rec.path.steps) + 1 if rec.coeff == 1 else len(rec.path.steps)
            if pos in slots:
                raise PathComplexMismatchError(
                    f"2-cell {face_id!r} records do not form a single walk"
                )
            slots[pos] = rec
        walk = EdgePath((), cell.anchor, cell.anchor)
        for pos in range(1, len(recs) + 1):
            if pos not in slots:
                raise PathComplexMismatchError(
                    f"2-cell {face_id!r} records do not form a single walk"
                )
            rec = slots[pos]
            step = (rec.face, rec.coeff)
            prefix = walk
            claimed = rec.path if rec.coeff == 1 else EdgePath(
                rec.path.steps[:-1], rec.path.src
            )
            if claimed.steps != prefix.steps:
                raise PathComplexMismatchError(
                    f"2-cell {face_id!r} connector at position {pos} is not the walk prefix"
                )
            if rec.coeff == -1 and rec.path.steps[-1:] != ((rec.face, -1),):
                raise PathComplexMismatchError(
                    f"2-cell {face_id!r} reversed record must end with its own edge"
                )
            s, t = self.step_endpoints(step)
            if prefix.dst != s:
                raise PathComplexMismatchError(f"2-cell {face_id!r} walk is not head-to-tail")
            walk = EdgePath(prefix.steps + (step,), prefix.src, t)
        if walk.dst != cell.anchor:
            raise PathComplexMismatchError(f"2-cell {face_id!r} walk does not close at its anchor")
        self._walks[face_id] = walk
        return walk


def _int_rank(m):
    if not m or not m[0]:
        return 0
    return lx.rank([[Fraction(x) for x in row] for row in m])


class H1Lattice:
    """H_1(M; Z) in Smith normal form coordinates, with representative loops.

    Coordinates are (torsion coords..., free coords...); torsion coordinate i
    is reduced mod its coefficient.
    """

    def __init__(self, complex_):
        complex_.require_valid()
        self.complex = complex_
        edges = complex_.cells_of_dim(1)
        self.edge_index = {c.id: i for i, c in enumerate(edges)}
        ne = len(edges)
        b1 = complex_.boundary_matrix_int(1)
        b2 = complex_.boundary_matrix_int(2)
        kernel = lx.int_kernel_basis(b1) if ne else []
        self._kernel_cols = kernel  # columns, each length ne
        r = len(kernel)
        if b2 and b2[0] and r:
            x = [
                lx.int_solve_in_basis(kernel, [b2[i][j] for i in range(ne)])
                for j in range(len(b2[0]))
            ]
            x_mat = [[x[j][i] for j in range(len(x))] for i in range(r)]
        else:
            x_mat = [[0] * 0 for _ in range(r)] if r else []
        if r and x_mat and x_mat[0]:
            u, d, _ = lx.smith_normal_form(x_mat)
            diag = [d[i][i] for i in range(min(r, len(d[0])))]
        else:
            u = [[int(i == j) for j in range(r)] for i in range(r)]
            diag = []
        diag = diag + [0] * (r - len(diag))
        self._u = u
        self._uinv = lx.int_inverse(u) if r else []
        # coordinate slots: drop divisor-1 rows, keep torsion then free
        self.torsion = [diag[i] for i in range(r) if diag[i] > 1]
        self._torsion_rows = [i for i in range(r) if diag[i] > 1]
        self._free_rows = [i for i in range(r) if diag[i] == 0]
        self.rank = len(self._free_rows)

    @property
    def n_coords(self):
        return len(self.torsion) + self.rank

    def zero(self):
        return tuple([0] * self.n_coords)

    def reduce(self, coords):
        coords = list(coords)
        if len(coords) != self.n_coords:
            raise ValueError("wrong coordinate length")
        for i, c in enumerate(self.torsion):
            coords[i] %= c
        return tuple(coords)

    def add(self, a, b):
        return self.reduce([x + y for x, y in zip(a, b)])

    def neg(self, a):
        return self.reduce([-x for x in a])

    def class_of_chain(self, chain):
        """H1 coordinates of an integer 1-cycle given as {edge: coeff}."""
        ne = len(self.edge_index)
        z = [0] * ne
        for e, c in chain.items():
            z[self.edge_index[e]] = c
        w = lx.int_solve_in_basis(self._kernel_cols, z) if self._kernel_cols else []
        y = [sum(self._u[i][j] * w[j] for j in range(len(w))) for i in range(len(w))]
        coords = [y[i] for i in self._torsion_rows] + [y[i] for i in self._free_rows]
        return self.reduce(coords)

    def class_of_loop(self, path):
        if not path.is_closed:
            raise PathComplexMismatchError("path is not closed")
        return self.class_of_chain(self.complex.path_chain(path))

    def generator_cycle(self, slot):
        """Integer cycle (edge vector) of the slot-th SNF generator."""
        rows = (self._torsion_rows + self._free_rows)[slot]
        r = len(self._uinv)
        w = [self._uinv[i][rows] for i in range(r)]
        ne = len(self.edge_index)
        return [
            sum(self._kernel_cols[j][i] * w[j] for j in range(r)) for i in range(ne)
        ]

    def loop_of_cycle(self, z):
        """Based loop whose 1-chain equals the cycle z exactly.

        Decomposes z over fundamental cycles of the spanning tree; the
        concatenated fundamental loops reproduce z on the nose.
        """
        cx = self.complex
        tree, _ = cx.spanning_tree()
        loop = EdgePath((), cx.base_vertex, cx.base_vertex)
        edges = cx.cells_of_dim(1)
        for e in edges:
            if e.id in tree:
                continue
            coeff = z[self.edge_index[e.id]]
            if coeff:
                loop = loop.compose(cx.fundamental_loop(e.id).repeat(coeff))
        return loop

    def representative_loop(self, coords):
        coords = self.reduce(coords)
        ne = len(self.edge_index)
        z = [0] * ne
        for slot, c in enumerate(coords):
            if c:
                g = self.generator_cycle(slot)
                z = [zi + c * gi for zi, gi in zip(z, g)]
        return self.loop_of_cycle(z)

    def generator_loops(self):
        return [
            self.loop_of_cycle(self.generator_cycle(s)) for s in range(self.n_coords)
        ]


# ---------------------------------------------------------------------------
# module-level operation names


def validate(complex_):
    return complex_.validate()


def euler_characteristic(complex_):
    return complex_.euler_characteristic()


def integral_homology(complex_, degree):
    return complex_.integral_homology(degree)


# ---------------------------------------------------------------------------
# constructors


def point_complex(name="point", vertex="m"):
    return ComplexDescription([Cell(vertex, 0, vertex)], [], vertex, name)


def cw_complex_from_words(name, vertices, edges, faces, base_vertex):
    """Build a 2-complex from attaching words.

    vertices: iterable of ids.  edges: {id: (tail, head)}.
    faces: {id: [(edge, dir), ...]} with the walk starting (and closing) at the
    face's anchor, which is the walk's first vertex.
    """
    cells = [Cell(v, 0, v) for v in vertices]
    incidences = []
    for e, (t, h) in edges.items():
        cells.append(Cell(e, 1, t))
        incidences.append(Incidence(e, h, 1, EdgePath(((e, 1),), t, h)))
        incidences.append(Incidence(e, t, -1, EdgePath((), t, t)))
    sk1 = ComplexDescription(cells, incidences, base_vertex, name)
    for f, word in faces.items():
        if not word:
            raise PathComplexMismatchError(f"face {f!r} has an empty attaching word")
        first_tail, _ = sk1.step_endpoints(word[0])
        anchor = first_tail
        cells.append(Cell(f, 2, anchor))
        at = anchor
        prefix = EdgePath((), anchor, anchor)
        for e, d in word:
            s, t = sk1.step_endpoints((e, d))
            if s != at:
                raise PathComplexMismatchError(f"face {f!r} word is not head-to-tail")
            edge_anchor = sk1.cell(e).anchor
            if d == 1:
                conn = prefix
            else:
                conn = EdgePath(prefix.steps + ((e, -1),), anchor, t)
            if conn.dst != edge_anchor:
                # connector must land on the edge's anchor; append tree-free fix
                raise PathComplexMismatchError(
                    f"face {f!r}: edge {e!r} anchor is not its tail; unsupported layout"
                )
            incidences.append(Incidence(f, e, d, conn))
            prefix = EdgePath(prefix.steps + ((e, d),), anchor, t)
            at = t
        if at != anchor:
            raise PathComplexMismatchError(f"face {f!r} word does not close")
    return ComplexDescription(cells, incidences, base_vertex, name)


def simplicial_complex(name, simplices, base_vertex=None):
    """Build a complex from simplices given as vertex tuples.

    Vertices are ordered by id inside each simplex, which fixes orientations.
    All faces are generated automatically.
    """
    simps = set()
    for s in simplices:
        s = tuple(sorted(set(s), key=str))
        if not s:
            continue
        for k in range(1, len(s) + 1):
            from itertools import combinations

            for sub in combinations(s, k):
                simps.add(sub)
    verts = sorted({s[0] for s in simps if len(s) == 1}, key=str)
    if base_vertex is None:
        base_vertex = verts[0]

    def sid(s):
        return s[0] if len(s) == 1 else "|".join(str(v) for v in s)

    cells = []
    incidences = []
    simplex_vertices = {}
    edge_of = {}
    for s in sorted(simps, key=lambda s: (len(s), [str(v) for v in s])):
        cid = sid(s)
        simplex_vertices[cid] = s
        d = len(s) - 1
        cells.append(Cell(cid, d, s[0]))
        if d == 1:
            edge_of[s] = cid
            incidences.append(Incidence(cid, s[1], 1, EdgePath(((cid, 1),), s[0], s[1])))
            incidences.append(Incidence(cid, s[0], -1, EdgePath((), s[0], s[0])))

    def epath(u, v):
        """Single-edge path u -> v (vertices of a common simplex)."""
        if u == v:
            return EdgePath((), u, u)
        key = tuple(sorted((u, v), key=str))
        e = edge_of[key]
        return EdgePath(((e, 1),), key[0], key[1]) if key[0] == u else EdgePath(
            ((e, -1),), key[1], key[0]
        )

    for s in sorted(simps, key=lambda s: (len(s), [str(v) for v in s])):
        d = len(s) - 1
        if d < 2:
            continue
        cid = sid(s)
        anchor = s[0]
        if d == 2:
            # attaching walk v0 -> v1 -> v2 -> v0; records carry prefix connectors
            walk = [
                (epath(s[0], s[1]), s[1]),
                (epath(s[1], s[2]), s[2]),
                (epath(s[2], s[0]), s[0]),
            ]
            prefix_steps = ()
            at = anchor
            for leg, target in walk:
                (e, dd) = leg.steps[0]
                if dd == 1:
                    conn = EdgePath(prefix_steps, anchor, at)
                else:
                    conn = EdgePath(prefix_steps + ((e, -1),), anchor, target)
                incidences.append(Incidence(cid, e, dd, conn))
                prefix_steps = prefix_steps + ((e, dd),)
                at = target
            continue
        # d >= 3: boundary faces with alternating signs; connector between anchors
        for omit in range(d + 1):
            face = s[:omit] + s[omit + 1 :]
            incidences.append(
                Incidence(cid, sid(face), (-1) ** omit, epath(s[0], face[0]))
            )
    cx = ComplexDescription(cells, incidences, base_vertex, name, simplex_vertices)
    return cx
