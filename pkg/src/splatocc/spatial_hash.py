"""Uniform-grid spatial hash over 3D points.

Maps each point's cell (floor of coordinate / cell size) to the member ids
stored there. Radius queries visit only the cells overlapping the query
ball's bounding box, which is the 27-cell neighborhood whenever the radius
is at most the cell size. Distance filtering is left to the caller, which
owns the coordinate array.
"""

from __future__ import annotations

from math import floor

import numpy as np


class SpatialHashGrid:
    def __init__(self, cell_size: float):
        if not cell_size > 0:
            raise ValueError("cell_size must be > 0")
        self.cell_size = float(cell_size)
        self._inv = 1.0 / float(cell_size)
        self._cells: dict = {}
        self._count = 0

    def __len__(self) -> int:
        return self._count

    def key(self, point) -> tuple:
        inv = self._inv
        return (
            floor(float(point[0]) * inv),
            floor(float(point[1]) * inv),
            floor(float(point[2]) * inv),
        )

    def insert(self, member: int, point) -> None:
        self._cells.setdefault(self.key(point), []).append(member)
        self._count += 1

    def insert_many(self, members, points) -> None:
        for m, p in zip(members, np.asarray(points, dtype=np.float64)):
            self.insert(int(m), p)

    def remove(self, member: int, point) -> None:
        """Remove a member given the point it was inserted under."""
        key = self.key(point)
        cell = self._cells.get(key)
        if cell is None or member not in cell:
            raise KeyError(f"member {member} not indexed in cell {key}")
        cell.remove(member)
        if not cell:
            del self._cells[key]
        self._count -= 1

    def move(self, member: int, old_point, new_point) -> None:
        old_key = self.key(old_point)
        new_key = self.key(new_point)
        if old_key == new_key:
            return
        self.remove(member, old_point)
        self._cells.setdefault(new_key, []).append(member)
        self._count += 1

    def candidates(self, center, radius: float) -> list:
        """Member ids from every cell overlapping the ball's bounding box."""
        inv = self._inv
        cx, cy, cz = float(center[0]), float(center[1]), float(center[2])
        x0 = floor((cx - radius) * inv)
        x1 = floor((cx + radius) * inv)
        y0 = floor((cy - radius) * inv)
        y1 = floor((cy + radius) * inv)
        z0 = floor((cz - radius) * inv)
        z1 = floor((cz + radius) * inv)
        out: list = []
        cells = self._cells
        for ix in range(x0, x1 + 1):
            for iy in range(y0, y1 + 1):
                for iz in range(z0, z1 + 1):
                    bucket = cells.get((ix, iy, iz))
                    if bucket:
                        out.extend(bucket)
        return out
