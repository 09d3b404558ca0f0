"""File formats: cloud CSV, meshes (PLY, OBJ), scalar-field CSV, JSON reports.

Floats are written with 17 significant digits so every file round-trips
float64 exactly.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .separatrix import SeparatrixCloud, boundary_name


def fmt(v) -> str:
    return format(float(v), ".17g")


def write_cloud_csv(path, cloud: SeparatrixCloud) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("x,y,z,boundary\n")
        for p in cloud.points:
            x, y, z = p.position
            fh.write(f"{fmt(x)},{fmt(y)},{fmt(z)},{boundary_name(p.boundary)}\n")


def write_directions_csv(path, cloud: SeparatrixCloud) -> None:
    """Row-aligned companion of cloud.csv: segment direction, segment index, bracket width."""
    with open(path, "w", newline="") as fh:
        fh.write("dx,dy,dz,segment,width\n")
        for p in cloud.points:
            dx, dy, dz = p.direction
            fh.write(f"{fmt(dx)},{fmt(dy)},{fmt(dz)},{p.segment},{fmt(p.width)}\n")


def read_cloud_csv(path) -> tuple[np.ndarray, list[str]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["x", "y", "z", "boundary"]:
        raise ValueError(f"{path}: expected header x,y,z,boundary")
    pts = np.array([[float(r[0]), float(r[1]), float(r[2])] for r in rows[1:]]).reshape(-1, 3)
    return pts, [r[3] for r in rows[1:]]


def read_directions_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:3] != ["dx", "dy", "dz"]:
        raise ValueError(f"{path}: expected header dx,dy,dz,...")
    return np.array([[float(r[0]), float(r[1]), float(r[2])] for r in rows[1:]]).reshape(-1, 3)


def write_ply(path, mesh) -> None:
    V, F = mesh.vertices, mesh.faces
    with open(path, "w", newline="\n") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(V)}\nproperty float x\nproperty float y\nproperty float z\n")
        fh.write(f"element face {len(F)}\nproperty list uchar int vertex_indices\nend_header\n")
        for x, y, z in V:
            fh.write(f"{fmt(x)} {fmt(y)} {fmt(z)}\n")
        for a, b, c in F:
            fh.write(f"3 {a} {b} {c}\n")


def read_ply(path):
    from .surface import Mesh

    with open(path) as fh:
        lines = fh.read().splitlines()
    nv = nf = 0
    for i, line in enumerate(lines):
        if line.startswith("element vertex"):
            nv = int(line.split()[-1])
        elif line.startswith("element face"):
            nf = int(line.split()[-1])
        elif line == "end_header":
            body = lines[i + 1:]
            break
    else:
        raise ValueError(f"{path}: missing end_header")
    V = np.array([[float(t) for t in ln.split()] for ln in body[:nv]]).reshape(-1, 3)
    F = np.array([[int(t) for t in ln.split()[1:]] for ln in body[nv:nv + nf]], dtype=np.int64).reshape(-1, 3)
    return Mesh(V, F)


def write_obj(path, mesh) -> None:
    with open(path, "w", newline="\n") as fh:
        for x, y, z in mesh.vertices:
            fh.write(f"v {fmt(x)} {fmt(y)} {fmt(z)}\n")
        for a, b, c in mesh.faces:
            fh.write(f"f {a + 1} {b + 1} {c + 1}\n")


def write_field_csv(path, grid: np.ndarray, values: np.ndarray) -> None:
    G = np.asarray(grid).reshape(-1, 3)
    v = np.asarray(values).reshape(-1)
    with open(path, "w", newline="") as fh:
        fh.write("x,y,z,value\n")
        for (x, y, z), f in zip(G, v):
            fh.write(f"{fmt(x)},{fmt(y)},{fmt(z)},{fmt(f)}\n")


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())
