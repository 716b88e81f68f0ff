"""JSON body descriptions.

A document is a tree of objects ``{"shape": ..., <fields>}`` with a
``"space": {"m": int, "a": real}`` entry at the root (children of an
intersection inherit it).  Points are given by their m spatial hyperboloid
coordinates (the time coordinate is implied); directions are m spatial
components, projected to the tangent space at the point and normalized.

    {"space": {"m": 2, "a": 1.0}, "shape": "ball", "center": [0, 0], "radius": 1.0}

Diagnostics carry the line (and column) of the offending text.
"""

from __future__ import annotations

import json

import numpy as np

from .bodies import Ball, GeodesicTube, Horoball, HalfSpace, HyperplaneTube, Intersection
from .geometry import SpaceParams


class BodySpecError(ValueError):
    def __init__(self, message, line=None, column=None, source="<body>"):
        where = source if line is None else f"{source}:{line}:{column}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


def _object_offsets(text):
    """Offsets of every '{' outside string literals, in document order."""
    out, in_str, esc = [], False, False
    for i, ch in enumerate(text):
        if in_str:
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch == "{":
            out.append(i)
    return out


def _line_col(text, offset):
    line = text.count("\n", 0, offset) + 1
    return line, offset - (text.rfind("\n", 0, offset) + 1) + 1


class _Parser:
    def __init__(self, text, source):
        self.text = text
        self.source = source
        self.offsets = _object_offsets(text)
        self.index = {}

    def _number(self, obj):
        """Pre-order traversal index of every dict, matching the order of '{' in the text."""
        def walk(node):
            if isinstance(node, dict):
                self.index[id(node)] = len(self.index)
                for v in node.values():
                    walk(v)
            elif isinstance(node, list):
                for v in node:
                    walk(v)
        walk(obj)

    def fail(self, obj, message, key=None):
        k = self.index.get(id(obj))
        line = col = None
        if k is not None and k < len(self.offsets):
            pos = self.offsets[k]
            if key is not None:
                hit = self.text.find(f'"{key}"', pos)
                pos = hit if hit >= 0 else pos
            line, col = _line_col(self.text, pos)
        raise BodySpecError(message, line, col, self.source)

    def field(self, obj, key, kind, path):
        if key not in obj:
            self.fail(obj, f"{path}: missing field '{key}'")
        val = obj[key]
        if kind == "real":
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                self.fail(obj, f"{path}.{key}: expected a number", key)
            return float(val)
        if kind == "int":
            if isinstance(val, bool) or not isinstance(val, int):
                self.fail(obj, f"{path}.{key}: expected an integer", key)
            return val
        return val

    def vector(self, obj, key, m, path, default=None):
        if key not in obj:
            if default is not None:
                return default
            self.fail(obj, f"{path}: missing field '{key}'")
        val = obj[key]
        if (not isinstance(val, list) or len(val) != m
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val)):
            self.fail(obj, f"{path}.{key}: expected a list of {m} numbers", key)
        return np.array(val, dtype=float)

    def space(self, obj, path):
        sp = obj.get("space")
        if not isinstance(sp, dict):
            self.fail(obj, f"{path}: missing 'space' object", "space" if "space" in obj else None)
        try:
            return SpaceParams(self.field(sp, "m", "int", f"{path}.space"),
                               self.field(sp, "a", "real", f"{path}.space"))
        except ValueError as exc:
            if isinstance(exc, BodySpecError):
                raise
            self.fail(sp, f"{path}.space: {exc}")

    def body(self, obj, space, path):
        if not isinstance(obj, dict):
            raise BodySpecError(f"{path}: expected an object", source=self.source)
        if "space" in obj:
            inner = self.space(obj, path)
            if space is not None and inner != space:
                self.fail(obj, f"{path}: space differs from the enclosing one", "space")
            space = inner
        if space is None:
            self.fail(obj, f"{path}: missing 'space' object")
        shape = self.field(obj, "shape", "str", path)
        m = space.m
        origin = np.zeros(m)
        try:
            if shape == "ball":
                return Ball(space, space.from_spatial(self.vector(obj, "center", m, path, origin)),
                            self.field(obj, "radius", "real", path))
            if shape == "horoball":
                d = self.vector(obj, "ideal", m, path)
                if np.linalg.norm(d) == 0:
                    self.fail(obj, f"{path}.ideal: direction must be nonzero", "ideal")
                ideal = np.concatenate([[1.0], d / np.linalg.norm(d)])
                return Horoball(space, ideal, float(obj.get("level", 0.0)))
            if shape in ("geodesic_tube", "hyperplane_tube", "half_space"):
                p = space.from_spatial(self.vector(obj, "point", m, path, origin))
                key = "direction" if shape == "geodesic_tube" else "normal"
                w = space.proj_tangent(p, np.concatenate([[0.0], self.vector(obj, key, m, path)]))
                if space.norm(w) == 0:
                    self.fail(obj, f"{path}.{key}: vector must be nonzero", key)
                w = w / space.norm(w)
                if shape == "geodesic_tube":
                    return GeodesicTube(space, p, w, self.field(obj, "radius", "real", path))
                if shape == "hyperplane_tube":
                    return HyperplaneTube(space, p, w, self.field(obj, "radius", "real", path))
                return HalfSpace(space, p, w, float(obj.get("offset", 0.0)))
            if shape == "intersection":
                parts = obj.get("parts")
                if not isinstance(parts, list) or not parts:
                    self.fail(obj, f"{path}.parts: expected a nonempty list", "parts")
                return Intersection(tuple(self.body(p, space, f"{path}.parts[{i}]")
                                          for i, p in enumerate(parts)))
        except BodySpecError:
            raise
        except ValueError as exc:
            self.fail(obj, f"{path}: {exc}")
        self.fail(obj, f"{path}.shape: unknown shape {shape!r}", "shape")


def parse_body(text, source="<body>"):
    """Build a body from a JSON document; raises BodySpecError with a line number."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BodySpecError(exc.msg, exc.lineno, exc.colno, source) from None
    p = _Parser(text, source)
    p._number(doc)
    return p.body(doc, None, "body")


def load_body(path):
    with open(path, encoding="utf-8") as fh:
        return parse_body(fh.read(), source=str(path))
