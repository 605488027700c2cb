"""Periodic low-dimensional lattice geometry.

Sites are canonical coordinate tuples on a periodic grid of extent ``m`` per
axis in dimension 1 or 2.  The metric is the wrap-around l1 (Manhattan)
distance, matching nearest-neighbour edges of the torus graph.  Site sets are
ordered, duplicate-free tuples in the global row-major order (lexicographic on
canonical coordinates); that order fixes tensor-leg ordering everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable

from .errors import ConfigError, LatticeMismatchError

Site = tuple[int, ...]
SiteSet = tuple[Site, ...]


def siteset(sites: Iterable[Site]) -> SiteSet:
    """Sorted, duplicate-free tuple of sites (the canonical SiteSet form)."""
    return tuple(sorted(set(map(tuple, sites))))


@dataclass(frozen=True)
class Lattice:
    """Periodic lattice of ``extent**dimension`` sites, dimension 1 or 2."""

    dimension: int
    extent: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigError(f"lattice dimension must be 1 or 2, got {self.dimension}")
        if self.extent < 1:
            raise ConfigError(f"lattice extent must be positive, got {self.extent}")

    @property
    def n_sites(self) -> int:
        return self.extent**self.dimension

    def canon(self, site: Iterable[int]) -> Site:
        """Canonical representative: every coordinate reduced mod extent."""
        site = tuple(site)
        if len(site) != self.dimension:
            raise LatticeMismatchError(
                f"site {site} has {len(site)} coordinates on a {self.dimension}D lattice"
            )
        return tuple(c % self.extent for c in site)

    def sites(self) -> SiteSet:
        """All sites in row-major order."""
        return tuple(product(range(self.extent), repeat=self.dimension))

    def origin(self) -> Site:
        return (0,) * self.dimension

    def distance(self, a: Site, b: Site) -> int:
        """Wrap-around l1 graph distance."""
        a = self.canon(a)
        b = self.canon(b)
        m = self.extent
        total = 0
        for ca, cb in zip(a, b):
            d = abs(ca - cb)
            total += min(d, m - d)
        return total

    def ball(self, center: Site, radius: int) -> SiteSet:
        """Sites within graph distance ``radius`` of ``center``."""
        if radius < 0:
            raise ConfigError(f"ball radius must be nonnegative, got {radius}")
        if radius >= self.extent:
            raise ConfigError(
                f"ball radius {radius} >= extent {self.extent}; the ball would self-wrap"
            )
        center = self.canon(center)
        return siteset(s for s in self.sites() if self.distance(center, s) <= radius)

    def sumset(self, left: Iterable[Site], right: Iterable[Site]) -> SiteSet:
        """Componentwise mod-extent sums {x + y}."""
        left = [self.canon(s) for s in left]
        right = [self.canon(s) for s in right]
        return siteset(
            tuple((cx + cy) % self.extent for cx, cy in zip(x, y))
            for x in left
            for y in right
        )

    def translate(self, sites: Iterable[Site], shift: Site) -> SiteSet:
        """Shift every site by ``shift`` mod extent."""
        shift = self.canon(shift)
        return siteset(
            tuple((c + d) % self.extent for c, d in zip(self.canon(s), shift))
            for s in sites
        )

    def set_distance(self, site: Site, sites: Iterable[Site]) -> int:
        """Distance from a site to the nearest member of a set."""
        return min(self.distance(site, s) for s in sites)
