"""Occlusion-aware conditioning: rendering, masks, guidance and metrics.

Thin wrappers over the compiled core. JSON documents cross the boundary as
text; the helpers here accept and return Python objects.
"""

import json as _json

from ._occond import (
    DimensionError,
    Error,
    IoError,
    ValidationError,
    blend_shapes,
    compose_residuals,
    occ_cfg,
    occlusion_mask,
    rasterize,
    refine_mask,
    shape_distance,
    uniform_cfg,
    verify_bundle,
)
from . import _occond

__all__ = [
    "DimensionError",
    "Error",
    "IoError",
    "ValidationError",
    "blend_shapes",
    "compose_residuals",
    "evaluate",
    "fixture_scene",
    "occ_cfg",
    "occlusion_mask",
    "rasterize_scene",
    "rasterize",
    "refine_mask",
    "render_bundle",
    "shape_distance",
    "uniform_cfg",
    "verify_bundle",
]


def _text(doc):
    return doc if isinstance(doc, str) else _json.dumps(doc)


def fixture_scene(width=512, height=512):
    """Two-body procedural scene as a dict."""
    return _json.loads(_occond.fixture_scene_json(width, height))


def rasterize_scene(scene, model_ref="", threads=0):
    """(depth, normal, count) for a scene dict or JSON text."""
    return _occond.rasterize(_text(scene), model_ref, threads)


def render_bundle(scene, out, **options):
    """Writes a bundle directory; returns the manifest dict."""
    return _json.loads(_occond.render_bundle(_text(scene), str(out), **options))


def evaluate(annotations, metrics=()):
    """Metric report dict for an annotations dict or JSON text."""
    return _json.loads(_occond.evaluate(_text(annotations), list(metrics)))
