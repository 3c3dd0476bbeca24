"""Python access to the motiv analytics core."""

import json

from ._core import (
    ApiError,
    Dataset,
    InputError,
    ModelError,
    Service,
    assign_county,
    classify,
    ingest,
    mercator,
    score_text,
)

__all__ = [
    "ApiError",
    "Dataset",
    "InputError",
    "ModelError",
    "Service",
    "Session",
    "assign_county",
    "classify",
    "ingest",
    "mercator",
    "score_text",
]


class Session:
    """Endpoint payloads of one dataset as Python objects."""

    def __init__(self, dataset):
        self.dataset = dataset
        self.service = Service(dataset)

    @classmethod
    def open(cls, path):
        return cls(Dataset.read(str(path)))

    def _get(self, path, **query):
        query = {k: v for k, v in query.items() if v is not None}
        return json.loads(self.service.get(path, query))

    def frames(self):
        return self._get("/api/frames")

    def summary(self, sort=None, dir=None):
        return self._get("/api/summary", sort=sort, dir=dir)

    def timeline(self, frame=None, color=None):
        return self._get("/api/timeline", frame=frame, color=color)

    def map(self, frame=None, color=None):
        return self._get("/api/map", frame=frame, color=color)

    def gam(self, spec):
        return json.loads(self.service.gam(json.dumps(spec)))
