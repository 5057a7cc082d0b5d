"""Geolocated flood tweets: annotation pipeline, statistics and query API."""

import json

from . import _core
from ._core import Error, bbox_surface_km2, embed, synthesize

__all__ = [
    "Api",
    "Error",
    "annotate",
    "bbox_surface_km2",
    "correlate",
    "default_roi",
    "embed",
    "geocoder_fixture",
    "ingest",
    "postfilter",
    "report",
    "synthesize",
]


def _mix(mix):
    return "" if mix is None else json.dumps(mix)


def _roi(roi):
    return "" if roi is None else json.dumps(roi)


def correlate(x, y):
    """Pearson and Kendall statistics of two paired samples."""
    return json.loads(_core.correlate(list(x), list(y)))


def default_roi():
    return json.loads(_core.default_roi())


def geocoder_fixture(seed=7, mix=None):
    return json.loads(_core.geocoder_fixture(seed, _mix(mix)))


def ingest(input_path, store):
    return json.loads(_core.ingest(str(input_path), str(store)))


def annotate(store, fixture=None):
    return json.loads(_core.annotate(str(store), "" if fixture is None else str(fixture)))


def postfilter(store, roi=None):
    return json.loads(_core.postfilter(str(store), _roi(roi)))


def report(store, threshold_km2=350.0):
    return json.loads(_core.report(str(store), threshold_km2))


class Api:
    """In-process view of the HTTP endpoints over a processed store."""

    def __init__(self, store, roi=None, threshold_km2=350.0):
        self._api = _core.Api(str(store), _roi(roi), threshold_km2)

    def get(self, path, **params):
        status, body, headers = self._api.handle(path, {k: str(v) for k, v in params.items()})
        return status, json.loads(body), headers
