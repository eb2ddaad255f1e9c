"""Synthetic traces that stand in for the three dataset shapes.

- checkin: visits cluster around a fixed set of hotspots; each visit is a
  fresh draw, so consecutive positions of one oid are only loosely related.
- moving: every oid walks with small Gaussian steps from a uniform start.
- pickup: every position is uniform over the world box and independent.

The first occurrence of an oid is an insert and later ones are updates. With a
``delete_ratio`` a live oid may be deleted instead; its next occurrence
re-inserts it. Queries are centred on a random live object with an area drawn
uniformly up to ``max_query_area`` of the world box.
"""

import logging
from pathlib import Path

import numpy as np

from ..domain.contracts.workload import TraceStoreContract, WorkloadKind, WorkloadSpec
from ..domain.core import Location, ObjectId, OpKind, Rect, WorkloadOp

logger = logging.getLogger(__name__)

HOTSPOT_SIGMA = 0.01  # checkin scatter around a hotspot, fraction of world extent


class GenerateWorkloadError(Exception):
    pass


class GenerateWorkload:
    def __init__(self, trace_store: TraceStoreContract) -> None:
        self._trace_store = trace_store

    def run(self, spec: WorkloadSpec, out: Path) -> int:
        ops = self.generate(spec)
        count = self._trace_store.write(out, ops)
        logger.info("Wrote %d %s ops to %s", count, spec.kind.value, out)
        return count

    def generate(self, spec: WorkloadSpec) -> list[WorkloadOp]:
        self._validate(spec)
        rng = np.random.default_rng(spec.seed)
        min_x, min_y, max_x, max_y = spec.world
        width, height = max_x - min_x, max_y - min_y

        n_queries = int(round(spec.n_ops * spec.query_ratio))
        n_data = spec.n_ops - n_queries
        if n_data < spec.n_oids:
            raise GenerateWorkloadError(
                f"{n_data} data ops cannot cover {spec.n_oids} oids; "
                f"lower --query-ratio or --oids"
            )

        is_query = np.zeros(spec.n_ops, dtype=bool)
        if n_queries:
            # the first op is always a data op so queries have something to hit
            is_query[1 + rng.choice(spec.n_ops - 1, n_queries, replace=False)] = True

        oids = np.concatenate(
            [
                rng.permutation(spec.n_oids),
                rng.integers(0, spec.n_oids, n_data - spec.n_oids),
            ]
        ).tolist()
        uniform = rng.random((n_data, 2))
        noise = rng.normal(size=(n_data, 2))
        delete_draws = rng.random(n_data).tolist()
        hotspots = rng.random((spec.hotspots, 2))
        hotspot_pick = rng.integers(0, spec.hotspots, n_data).tolist()
        query_draws = rng.random((n_queries, 2)).tolist()

        def clip(x: float, y: float) -> Location:
            return Location(
                float(min(max(x, min_x), max_x)), float(min(max(y, min_y), max_y))
            )

        def position(i: int, previous: Location | None) -> Location:
            if spec.kind is WorkloadKind.PICKUP or (
                spec.kind is WorkloadKind.MOVING and previous is None
            ):
                ux, uy = uniform[i]
                return Location(float(min_x + ux * width), float(min_y + uy * height))
            if spec.kind is WorkloadKind.MOVING:
                assert previous is not None
                nx, ny = noise[i]
                return clip(
                    previous.x + nx * spec.step_fraction * width,
                    previous.y + ny * spec.step_fraction * height,
                )
            hx, hy = hotspots[hotspot_pick[i]]
            nx, ny = noise[i]
            return clip(
                min_x + (hx + nx * HOTSPOT_SIGMA) * width,
                min_y + (hy + ny * HOTSPOT_SIGMA) * height,
            )

        ops: list[WorkloadOp] = []
        last: dict[int, Location] = {}
        live: dict[int, Location] = {}
        live_order: list[int] = []  # oids in first-insert order, for query centres
        data_i = query_i = 0

        for position_in_trace in range(spec.n_ops):
            if is_query[position_in_trace]:
                ops.append(self._query(spec, live, live_order, query_draws[query_i]))
                query_i += 1
                continue

            oid = oids[data_i]
            previous = last.get(oid)
            if oid not in live:
                loc = position(data_i, previous)
                ops.append(WorkloadOp(OpKind.INSERT, oid=ObjectId(oid), loc=loc))
                if previous is None:
                    live_order.append(oid)
                live[oid] = last[oid] = loc
            elif delete_draws[data_i] < spec.delete_ratio:
                ops.append(
                    WorkloadOp(OpKind.DELETE, oid=ObjectId(oid), old_loc=live.pop(oid))
                )
            else:
                loc = position(data_i, previous)
                ops.append(
                    WorkloadOp(
                        OpKind.UPDATE, oid=ObjectId(oid), loc=loc, old_loc=live[oid]
                    )
                )
                live[oid] = last[oid] = loc
            data_i += 1

        return ops

    def _query(
        self,
        spec: WorkloadSpec,
        live: dict[int, Location],
        live_order: list[int],
        draws: list[float],
    ) -> WorkloadOp:
        min_x, min_y, max_x, max_y = spec.world
        world_area = (max_x - min_x) * (max_y - min_y)
        pick, size = draws
        candidates = [oid for oid in live_order if oid in live] or live_order
        centre = live.get(candidates[int(pick * len(candidates))]) or Location(
            (min_x + max_x) / 2, (min_y + max_y) / 2
        )
        area = size * spec.max_query_area * world_area
        return WorkloadOp(OpKind.QUERY, window=Rect.from_center(centre, area))

    def _validate(self, spec: WorkloadSpec) -> None:
        if spec.n_ops < 1 or spec.n_oids < 1:
            raise GenerateWorkloadError("ops and oids must be >= 1")
        if spec.n_oids > spec.n_ops:
            raise GenerateWorkloadError(
                f"oids ({spec.n_oids}) must not exceed ops ({spec.n_ops})"
            )
        if not 0.0 <= spec.query_ratio < 1.0:
            raise GenerateWorkloadError("query ratio must be in [0, 1)")
        if not 0.0 <= spec.delete_ratio < 1.0:
            raise GenerateWorkloadError("delete ratio must be in [0, 1)")
        if not 0.0 < spec.max_query_area <= 1.0:
            raise GenerateWorkloadError("max query area must be in (0, 1]")
        if spec.step_fraction <= 0.0:
            raise GenerateWorkloadError("step fraction must be > 0")
        if spec.hotspots < 1:
            raise GenerateWorkloadError("hotspots must be >= 1")
