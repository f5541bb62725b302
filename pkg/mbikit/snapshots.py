"""Snapshot files for solver states.

Each snapshot is three files sharing a stem:

- ``<stem>_b.f64`` and ``<stem>_d.f64``: raw little-endian float64,
  component-major then z, y, x row-major
- ``<stem>.meta``: text sidecar with ``key=value`` lines
  (n, h, origin, t, mode, order, seed, format_version)

Values are written with ``repr`` so a reload is bit-identical.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .field_solver import FieldState, Grid

FORMAT_VERSION = 1
DTYPE = np.dtype('<f8')


@dataclass(frozen=True)
class SnapshotMeta:
    n: int
    h: float
    origin: tuple
    t: float
    mode: str
    order: int
    seed: int
    format_version: int = FORMAT_VERSION

    def to_text(self) -> str:
        lines = [
            f'n={self.n}',
            f'h={self.h!r}',
            'origin=' + ','.join(repr(float(c)) for c in self.origin),
            f't={self.t!r}',
            f'mode={self.mode}',
            f'order={self.order}',
            f'seed={self.seed}',
            f'format_version={self.format_version}',
        ]
        return '\n'.join(lines) + '\n'

    @classmethod
    def from_text(cls, text: str) -> 'SnapshotMeta':
        values: Dict[str, str] = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            key, sep, value = line.partition('=')
            if not sep:
                raise ValueError(f'malformed metadata line: {raw!r}')
            values[key.strip()] = value.strip()
        try:
            version = int(values.get('format_version', '0'))
            if version != FORMAT_VERSION:
                raise ValueError(f'unsupported snapshot format_version {version}')
            return cls(
                n=int(values['n']),
                h=float(values['h']),
                origin=tuple(float(v) for v in values['origin'].split(',')),
                t=float(values['t']),
                mode=values['mode'],
                order=int(values['order']),
                seed=int(values['seed']),
                format_version=version,
            )
        except KeyError as e:
            raise ValueError(f'snapshot metadata missing key {e}') from None


def _paths(stem: Path):
    return (
        stem.with_name(stem.name + '_b.f64'),
        stem.with_name(stem.name + '_d.f64'),
        stem.with_name(stem.name + '.meta'),
    )


def write_snapshot(
    state: FieldState,
    stem: str | os.PathLike,
    mode: str,
    order: int,
    seed: int = 0,
) -> Path:
    """Write ``state`` next to ``stem``; returns the metadata path."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    b_path, d_path, meta_path = _paths(stem)
    np.ascontiguousarray(state.b, dtype=DTYPE).tofile(b_path)
    np.ascontiguousarray(state.d, dtype=DTYPE).tofile(d_path)
    meta = SnapshotMeta(
        n=state.grid.n,
        h=state.grid.h,
        origin=state.grid.origin,
        t=state.t,
        mode=mode,
        order=order,
        seed=seed,
    )
    meta_path.write_text(meta.to_text(), encoding='utf-8')
    logging.debug('Wrote snapshot %s at t=%g', stem, state.t)
    return meta_path


def read_snapshot(stem: str | os.PathLike) -> tuple[FieldState, SnapshotMeta]:
    stem = Path(stem)
    if stem.suffix == '.meta':
        stem = stem.with_suffix('')
    b_path, d_path, meta_path = _paths(stem)
    meta = SnapshotMeta.from_text(meta_path.read_text(encoding='utf-8'))
    grid = Grid(meta.n, meta.h, meta.origin)
    shape = (3,) + grid.shape
    fields = []
    for path in (b_path, d_path):
        data = np.fromfile(path, dtype=DTYPE)
        if data.size != int(np.prod(shape)):
            raise ValueError(f'{path} holds {data.size} values, expected {int(np.prod(shape))}')
        fields.append(data.reshape(shape).astype(float))
    return FieldState(fields[0], fields[1], meta.t, grid), meta


def list_snapshots(directory: str | os.PathLike) -> List[Path]:
    """Snapshot stems in ``directory`` ordered by time."""
    directory = Path(directory)
    found = []
    for meta_path in directory.glob('*.meta'):
        meta = SnapshotMeta.from_text(meta_path.read_text(encoding='utf-8'))
        found.append((meta.t, meta_path.with_suffix('')))
    return [stem for _, stem in sorted(found)]


def snapshot_stem(directory: str | os.PathLike, step: int, prefix: Optional[str] = 'snap') -> Path:
    return Path(directory) / f'{prefix}_{step:06d}'


__all__ = [
    'FORMAT_VERSION',
    'SnapshotMeta',
    'write_snapshot',
    'read_snapshot',
    'list_snapshots',
    'snapshot_stem',
]
