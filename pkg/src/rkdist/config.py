import json
from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings shared by the automorphism and rescaling searches.

    ``refine_top`` is the number of best pool candidates handed to the local
    search; every other candidate is only evaluated.
    """

    seed: int = 0
    random_restarts: int = 64
    local_search_iters: int = 200
    tolerance: float = 1e-8
    refine_top: int = 4

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown OptimizerConfig fields: {sorted(unknown)}")
        return cls(**data)

    def replace(self, **changes):
        return OptimizerConfig(**{**asdict(self), **changes})
