"""Rotated surface-code patch and its Majorana (C4) network.

Qubits sit on a ``d x d`` grid, indexed row-major from the top-left corner.
Faces are labelled by the grid cell ``(R, C)`` whose top-left corner is qubit
``(R, C)``; boundary faces live at ``R = -1``, ``R = d-1``, ``C = -1`` or
``C = d-1``. A cell is an X-check iff ``R + C`` is even. Top and bottom
boundaries carry weight-2 X-checks, left and right carry weight-2 Z-checks.

Each qubit ``m`` owns Majoranas ``4m .. 4m+3`` (``c1 .. c4``) with
``X = i c1 c2``, ``Z = i c2 c3``, ``Y = i c3 c1`` and ``S = -c1 c2 c3 c4``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .majorana import Monomial, bilinear, c4_stabilizer, gf2_solve, product

# Majorana slot (0..3 = c1..c4) for each direction. Checkerboard parity of the
# qubit decides which quadrants are X-faces; every other C4 code is rotated.
_DIRS_EVEN = {"N": 0, "W": 1, "S": 2, "E": 3}  # NW, SE quadrants are X-faces
_DIRS_ODD = {"N": 0, "E": 1, "S": 2, "W": 3}  # NE, SW quadrants are X-faces


def _is_x_cell(R: int, C: int) -> bool:
    return (R + C) % 2 == 0


@dataclass(frozen=True)
class CodePatch:
    d: int
    x_faces: tuple[tuple[int, ...], ...]
    z_faces: tuple[tuple[int, ...], ...]
    x_face_cells: tuple[tuple[int, int], ...]
    z_face_cells: tuple[tuple[int, int], ...]
    x_logical_support: tuple[int, ...]
    z_logical_support: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.d * self.d

    @property
    def normalization(self) -> float:
        """Normalizing factor ``2**((d^2 - 1) / 4)`` of the logical basis states."""
        return 2.0 ** ((self.n - 1) / 4)

    def coords(self, q: int) -> tuple[int, int]:
        return divmod(q, self.d)

    def qubit(self, r: int, c: int) -> int:
        return r * self.d + c

    @cached_property
    def x_check_matrix(self) -> np.ndarray:
        """(num X-faces, n) incidence matrix over GF(2)."""
        h = np.zeros((len(self.x_faces), self.n), dtype=np.uint8)
        for f, supp in enumerate(self.x_faces):
            h[f, list(supp)] = 1
        return h

    @cached_property
    def z_check_matrix(self) -> np.ndarray:
        h = np.zeros((len(self.z_faces), self.n), dtype=np.uint8)
        for f, supp in enumerate(self.z_faces):
            h[f, list(supp)] = 1
        return h

    @cached_property
    def qubit_x_faces(self) -> tuple[tuple[int, ...], ...]:
        """X-faces touching each qubit (one or two; none only for d=1)."""
        out: list[list[int]] = [[] for _ in range(self.n)]
        for f, supp in enumerate(self.x_faces):
            for q in supp:
                out[q].append(f)
        return tuple(tuple(v) for v in out)

    def x_syndrome(self, z_support) -> np.ndarray:
        """±1 X-face outcomes produced by a Z-string on ``z_support``."""
        v = np.zeros(self.n, dtype=np.uint8)
        v[list(z_support)] = 1
        flips = (self.x_check_matrix @ v) % 2
        return (1 - 2 * flips.astype(np.int8)).astype(np.int8)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "qubit_coords": [list(self.coords(q)) for q in range(self.n)],
            "x_faces": [{"cell": list(c), "support": list(s)} for c, s in zip(self.x_face_cells, self.x_faces)],
            "z_faces": [{"cell": list(c), "support": list(s)} for c, s in zip(self.z_face_cells, self.z_faces)],
            "x_logical_support": list(self.x_logical_support),
            "z_logical_support": list(self.z_logical_support),
        }


def build_patch(d: int) -> CodePatch:
    if not isinstance(d, (int, np.integer)) or d < 1 or d % 2 == 0:
        raise ValueError(f"code distance must be a positive odd integer, got {d!r}")
    d = int(d)

    def q(r, c):
        return r * d + c

    x_faces, z_faces, x_cells, z_cells = [], [], [], []
    for R in range(-1, d):
        for C in range(-1, d):
            corners = [(r, c) for r in (R, R + 1) for c in (C, C + 1) if 0 <= r < d and 0 <= c < d]
            is_x = _is_x_cell(R, C)
            if len(corners) == 4:
                pass
            elif len(corners) == 2:
                # boundary cells: keep X-checks on top/bottom, Z-checks on left/right
                on_tb = R in (-1, d - 1)
                if on_tb != is_x:
                    continue
            else:
                continue
            supp = tuple(sorted(q(r, c) for r, c in corners))
            if is_x:
                x_faces.append(supp)
                x_cells.append((R, C))
            else:
                z_faces.append(supp)
                z_cells.append((R, C))

    return CodePatch(
        d=d,
        x_faces=tuple(x_faces),
        z_faces=tuple(z_faces),
        x_face_cells=tuple(x_cells),
        z_face_cells=tuple(z_cells),
        x_logical_support=tuple(q(r, 0) for r in range(d)),
        z_logical_support=tuple(q(0, c) for c in range(d)),
    )


@dataclass(frozen=True)
class MajoranaNetwork:
    """Majorana indexing, oriented link operators and logical pairings.

    ``link_ops`` holds ordered pairs ``(p, q)``: the prepared state satisfies
    ``i c_p c_q = +1``. ``pauli_reps[m]`` maps ``"X"``, ``"Z"``, ``"Y"`` and
    ``"SX"`` to ordered pairs with ``op = i c_p c_q``.
    """

    patch: CodePatch
    majorana_count: int
    c4_groups: tuple[tuple[int, int, int, int], ...]
    link_ops: tuple[tuple[int, int], ...]
    logical_c4: tuple[int, int, int, int]
    pauli_reps: tuple[dict, ...]
    logical_pairs: dict = field(repr=False)
    face_links: tuple[tuple[int, ...], ...] = field(repr=False, default=())
    face_targets: tuple[Monomial, ...] = field(repr=False, default=())

    def initial_pairs(self, logical_state: str = "+") -> list[tuple[int, int]]:
        """Stabilizing pairs for the link state times a logical C4 state.

        ``"+"`` prepares the code state ``|+_L>``, ``"Y"`` the ``+1``
        eigenstate of the logical Y operator.
        """
        if logical_state not in self.logical_pairs:
            raise ValueError(f"unknown logical state {logical_state!r}")
        return list(self.link_ops) + list(self.logical_pairs[logical_state])

    def to_dict(self) -> dict:
        return {
            "patch": self.patch.to_dict(),
            "majorana_count": self.majorana_count,
            "c4_groups": [list(g) for g in self.c4_groups],
            "link_ops": [list(e) for e in self.link_ops],
            "logical_c4": list(self.logical_c4),
            "logical_pairs": {k: [list(p) for p in v] for k, v in self.logical_pairs.items()},
        }


def _slot(d: int, r: int, c: int, direction: str) -> int:
    dirs = _DIRS_EVEN if (r + c) % 2 == 0 else _DIRS_ODD
    return 4 * (r * d + c) + dirs[direction]


def _pauli_monomials(group) -> dict[str, Monomial]:
    c1, c2, c3, c4 = group
    X, Z, Y = bilinear(c1, c2), bilinear(c2, c3), bilinear(c3, c1)
    S = c4_stabilizer(*group)
    return {"X": X, "Z": Z, "Y": Y, "S": S, "SX": S * X, "SZ": S * Z}


def _as_pair(mono: Monomial) -> tuple[int, int]:
    """Write a bilinear monomial as an ordered pair with ``mono = i c_p c_q``."""
    if len(mono.indices) != 2:
        raise ValueError(f"not a bilinear: {mono}")
    p, q = mono.indices
    return (p, q) if mono.sign_against(bilinear(p, q)) == 1 else (q, p)


def face_link_product(network: MajoranaNetwork, links) -> Monomial:
    """Ordered product of the oriented link operators ``i c_p c_q`` in ``links``."""
    return product(bilinear(*network.link_ops[e]) for e in links)


def build_majorana_network(patch: CodePatch) -> MajoranaNetwork:
    d, n = patch.d, patch.n
    groups = tuple(tuple(4 * m + k for k in range(4)) for m in range(n))
    reps = [_pauli_monomials(g) for g in groups]

    # unordered links, each tagged with the cells (faces) it bounds
    links: list[tuple[int, int]] = []
    bounds: list[tuple[tuple[int, int], ...]] = []
    for r in range(d):
        for c in range(d):
            if c + 1 < d:
                links.append((_slot(d, r, c, "E"), _slot(d, r, c + 1, "W")))
                bounds.append(((r - 1, c), (r, c)))
            if r + 1 < d:
                links.append((_slot(d, r, c, "S"), _slot(d, r + 1, c, "N")))
                bounds.append(((r, c - 1), (r, c)))
    for R, C in patch.x_face_cells + patch.z_face_cells:
        if R == -1:
            links.append((_slot(d, 0, C, "N"), _slot(d, 0, C + 1, "N")))
        elif R == d - 1:
            links.append((_slot(d, d - 1, C, "S"), _slot(d, d - 1, C + 1, "S")))
        elif C == -1:
            links.append((_slot(d, R, 0, "W"), _slot(d, R + 1, 0, "W")))
        elif C == d - 1:
            links.append((_slot(d, R, d - 1, "E"), _slot(d, R + 1, d - 1, "E")))
        else:
            continue
        bounds.append(((R, C),))
    links = [tuple(sorted(e)) for e in links]
    owner = {}
    for e, (p, q) in enumerate(links):
        for k in (p, q):
            if k in owner:
                raise RuntimeError(f"Majorana {k} used by two links")
            owner[k] = e
    corners = tuple(sorted(set(range(4 * n)) - set(owner)))
    if len(corners) != 4:
        raise RuntimeError(f"expected 4 unpaired corner Majoranas, found {len(corners)}")

    # per face: its links and the target stabilizer written in matching C4 reps
    faces = []
    cells = [(c, s, "X") for c, s in zip(patch.x_face_cells, patch.x_faces)]
    cells += [(c, s, "Z") for c, s in zip(patch.z_face_cells, patch.z_faces)]
    for cell, supp, kind in cells:
        fl = sorted(e for e, b in enumerate(bounds) if cell in b)
        target_terms = []
        for q in supp:
            mine = {k for e in fl for k in links[e] if k // 4 == q}
            a = reps[q][kind]
            b = reps[q]["S" + kind]
            if mine == set(a.indices):
                target_terms.append(a)
            elif mine == set(b.indices):
                target_terms.append(b)
            else:
                raise RuntimeError(f"face {supp} uses Majoranas {sorted(mine)} of qubit {q}, not a {kind} pair")
        faces.append((fl, product(target_terms)))

    # orient links so every face product equals its stabilizer (GF(2) solve)
    orient = list(links)

    def mismatches():
        bits = 0
        for f, (fl, target) in enumerate(faces):
            got = product(bilinear(*orient[e]) for e in fl)
            if got.sign_against(target) == -1:
                bits |= 1 << f
        return bits

    cols = [0] * len(links)
    for f, (fl, _) in enumerate(faces):
        for e in fl:
            cols[e] |= 1 << f
    flips = gf2_solve(cols, mismatches(), len(links))
    if flips is None:
        raise RuntimeError("no link orientation satisfies the face-product constraints")
    for e in range(len(links)):
        if flips >> e & 1:
            orient[e] = (orient[e][1], orient[e][0])
    if mismatches():
        raise RuntimeError("link orientation failed symbolic verification")

    # reduce logical operators to the corner Majoranas modulo links and C4 stabilizers
    corner_set = set(corners)
    noncorner = [k for k in range(4 * n) if k not in corner_set]
    bit = {k: i for i, k in enumerate(noncorner)}

    def mask(indices):
        m = 0
        for k in indices:
            if k in bit:
                m |= 1 << bit[k]
        return m

    link_gens = [bilinear(*e) for e in orient]
    s_gens = [reps[q]["S"] for q in range(n)]
    gens = link_gens + s_gens
    gen_masks = [mask(g.indices) for g in gens]

    def reduce_to_corners(op: Monomial) -> Monomial:
        """Corner monomial ``D`` with ``op Pi_S |links> = Pi_S D |links>``.

        Links anticommute with the C4 stabilizers of their endpoints, so the
        seed state is not an S eigenstate. Writing ``D = S_A op L_B`` puts the
        S factors next to the projector and the links next to the seed.
        """
        sol = gf2_solve(gen_masks, mask(op.indices), len(gens))
        if sol is None:
            raise RuntimeError(f"operator {op} cannot be reduced to the corner Majoranas")
        chosen = [j for j in range(len(gens)) if sol >> j & 1]
        s_part = product(gens[j] for j in chosen if j >= len(link_gens))
        l_part = product(gens[j] for j in chosen if j < len(link_gens))
        out = s_part * op * l_part
        if not set(out.indices) <= corner_set:
            raise RuntimeError("reduction left non-corner Majoranas")
        return out

    XL = product(reps[q]["X"] for q in patch.x_logical_support)
    ZL = product(reps[q]["Z"] for q in patch.z_logical_support)
    YL = Monomial(1, ()) * XL * ZL
    parity = reduce_to_corners(product(reps[q]["S"] for q in range(n)))
    if parity.indices != corners:
        raise RuntimeError("total C4 parity does not reduce to the four corners")

    def logical_pairs_for(op: Monomial) -> tuple[tuple[int, int], tuple[int, int]]:
        red = reduce_to_corners(op)
        if len(red.indices) == 4:
            red = red * parity
        first = _as_pair(red)
        rest = tuple(k for k in corners if k not in first)
        # fix the complementary pair so that the total C4 parity is +1
        kappa = (bilinear(*first) * bilinear(*rest)).sign_against(parity)
        second = rest if kappa == 1 else (rest[1], rest[0])
        return first, second

    logical_pairs = {"+": logical_pairs_for(XL), "Y": logical_pairs_for(YL)}

    pauli_reps = tuple(
        {name: _as_pair(reps[q][name]) for name in ("X", "Z", "Y", "SX")} for q in range(n)
    )
    return MajoranaNetwork(
        patch=patch,
        majorana_count=4 * n,
        c4_groups=groups,
        link_ops=tuple(orient),
        logical_c4=corners,
        pauli_reps=pauli_reps,
        logical_pairs=logical_pairs,
        face_links=tuple(tuple(fl) for fl, _ in faces),
        face_targets=tuple(t for _, t in faces),
    )


def dump_json(d: int, path=None) -> str:
    net = build_majorana_network(build_patch(d))
    text = json.dumps(net.to_dict(), indent=1)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
