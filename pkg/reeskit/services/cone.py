"""
Exact rational polyhedral cones generated by finitely many integer points.

The double description (extreme rays, facet inequalities, equations of the linear span)
comes from the Parma Polyhedra Library through pplpy; generators and constraints are
minimized there, so rays and normals come back as primitive integer vectors.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence

import ppl

Vector = tuple[int, ...]


def _dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def _vector(item, ambient_dim: int) -> Vector:
    return tuple(int(item.coefficient(ppl.Variable(i))) for i in range(ambient_dim))


@dataclass(frozen=True)
class RationalCone:
    """
    Cone described both ways: extreme ``rays`` and the inequalities ⟨a, x⟩ ≥ 0 for a in
    ``facets`` together with ⟨b, x⟩ = 0 for b in ``equations``.
    """

    ambient_dim: int
    rays: tuple[Vector, ...]
    facets: tuple[Vector, ...]
    equations: tuple[Vector, ...]

    @property
    def dimension(self) -> int:
        return self.ambient_dim - len(self.equations)

    def contains(self, point: Sequence[int]) -> bool:
        if any(_dot(b, point) != 0 for b in self.equations):
            return False
        return all(_dot(a, point) >= 0 for a in self.facets)

    def is_empty(self) -> bool:
        return not self.rays


def cone_from_generators(points: Iterable[Sequence[int]], ambient_dim: int) -> RationalCone:
    """
    The cone spanned by ``points``; assumes the points lie in a pointed cone (true for
    points with non-negative coordinates).
    """
    variables = [ppl.Variable(i) for i in range(ambient_dim)]
    generators = ppl.Generator_System()
    generators.insert(ppl.point())
    for p in points:
        if any(p):
            generators.insert(ppl.ray(sum(int(c) * v for c, v in zip(p, variables))))
    cone = ppl.C_Polyhedron(ambient_dim, "empty")
    cone.add_generators(generators)

    rays = sorted(
        _vector(g, ambient_dim) for g in cone.minimized_generators() if g.is_ray()
    )
    facets, equations = [], []
    for constraint in cone.minimized_constraints():
        normal = _vector(constraint, ambient_dim)
        if constraint.is_equality():
            equations.append(normal)
        else:
            facets.append(normal)
    return RationalCone(
        ambient_dim, tuple(rays), tuple(sorted(facets)), tuple(sorted(equations))
    )
