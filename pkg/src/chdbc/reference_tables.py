"""Published convergence tables for the offline arithmetic cross-check.

Each table stores the published error columns and the published order
columns of the full-scale studies (mesh refinement, time-step refinement,
and both adsorption-rate limits).  Recomputing the orders from the error
columns with the standard log-ratio formula is a milliseconds-scale sanity
check that the order computation matches the published convention.

Note the published error values carry three significant digits; orders
recomputed from them can differ from the published orders by up to ~0.02
where consecutive errors are close (ratio near 1), since the published
orders were evidently computed from unrounded errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .eoc import compute_eoc

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ReferenceTable:
    name: str
    axis: str
    parameters: tuple
    errors_bulk: tuple
    errors_bnd: tuple
    published_eoc_bulk: tuple   # one entry per row after the first
    published_eoc_bnd: tuple


MESH_REFINEMENT = ReferenceTable(
    name="mesh refinement",
    axis="h",
    parameters=(SQRT2 * 2.0**-7, SQRT2 * 2.0**-6),
    errors_bulk=(6.28e-3, 3.06e-2),
    errors_bnd=(8.33e-2, 1.82e-1),
    published_eoc_bulk=(2.28,),
    published_eoc_bnd=(1.13,),
)

TIME_REFINEMENT = ReferenceTable(
    name="time-step refinement",
    axis="tau",
    parameters=(2e-5, 4e-5),
    errors_bulk=(4.79e-3, 1.44e-2),
    errors_bnd=(2.48e-2, 7.38e-2),
    published_eoc_bulk=(1.59,),
    published_eoc_bnd=(1.58,),
)

_XI_VALUES = (1e-4, 2e-4, 3e-4, 4e-4, 5e-4, 7.5e-4, 1e-3, 1e-2, 1e-1, 1.0)

XI_TO_ZERO = ReferenceTable(
    name="adsorption-rate limit xi -> 0",
    axis="xi",
    parameters=_XI_VALUES,
    errors_bulk=(3.11e-4, 6.20e-4, 9.29e-4, 1.24e-3, 1.54e-3,
                 2.31e-3, 3.07e-3, 2.72e-2, 1.40e-1, 3.73e-1),
    errors_bnd=(3.54e-4, 7.07e-4, 1.06e-3, 1.41e-3, 1.76e-3,
                2.64e-3, 3.50e-3, 3.21e-2, 1.96e-1, 6.09e-1),
    published_eoc_bulk=(1.00, 1.00, 1.00, 0.99, 0.99, 0.99, 0.95, 0.71, 0.42),
    published_eoc_bnd=(1.00, 1.00, 1.00, 1.00, 0.99, 0.99, 0.96, 0.77, 0.49),
)

XI_INVERSE_TO_ZERO = ReferenceTable(
    name="adsorption-rate limit xi -> inf",
    axis="xi_inverse",
    parameters=_XI_VALUES,
    errors_bulk=(2.85e-4, 5.69e-4, 8.52e-4, 1.13e-3, 1.42e-3,
                 2.12e-3, 2.81e-3, 2.54e-2, 1.54e-1, 4.02e-1),
    errors_bnd=(4.83e-4, 9.64e-4, 1.44e-3, 1.92e-3, 2.40e-3,
                3.59e-3, 4.77e-3, 4.31e-2, 2.64e-1, 7.10e-1),
    published_eoc_bulk=(1.00, 1.00, 1.00, 0.99, 0.99, 0.99, 0.96, 0.78, 0.42),
    published_eoc_bnd=(1.00, 1.00, 1.00, 0.99, 0.99, 0.99, 0.96, 0.79, 0.43),
)

ALL_TABLES = (MESH_REFINEMENT, TIME_REFINEMENT, XI_TO_ZERO, XI_INVERSE_TO_ZERO)


def recompute(table: ReferenceTable) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Orders recomputed from the published error columns."""
    eoc_bulk = compute_eoc(zip(table.parameters, table.errors_bulk))
    eoc_bnd = compute_eoc(zip(table.parameters, table.errors_bnd))
    return tuple(float(v) for v in eoc_bulk), tuple(float(v) for v in eoc_bnd)


def format_tables() -> str:
    """Human-readable dump of all tables with recomputed order columns."""
    lines = []
    for table in ALL_TABLES:
        eoc_bulk, eoc_bnd = recompute(table)
        lines.append(f"{table.name} (axis {table.axis})")
        lines.append(f"  {'parameter':>12} {'err_bulk':>10} {'eoc_bulk':>9} "
                     f"{'pub':>6} {'err_bnd':>10} {'eoc_bnd':>8} {'pub':>6}")
        for k, p in enumerate(table.parameters):
            if k == 0:
                lines.append(f"  {p:>12.6g} {table.errors_bulk[k]:>10.3g} {'-':>9} {'-':>6} "
                             f"{table.errors_bnd[k]:>10.3g} {'-':>8} {'-':>6}")
            else:
                lines.append(
                    f"  {p:>12.6g} {table.errors_bulk[k]:>10.3g} {eoc_bulk[k-1]:>9.2f} "
                    f"{table.published_eoc_bulk[k-1]:>6.2f} "
                    f"{table.errors_bnd[k]:>10.3g} {eoc_bnd[k-1]:>8.2f} "
                    f"{table.published_eoc_bnd[k-1]:>6.2f}"
                )
        lines.append("")
    return "\n".join(lines)
