"""Built-in simulation scenarios: phase separation and droplet adsorption."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .stepper import Params


@dataclass(frozen=True)
class Scenario:
    """Initial condition plus default parameters on the unit square.

    shift_bulk / shift_bnd are the total energy offsets c0*|Omega| and
    g0*|Gamma|; the per-node shift constants follow from the measures of the
    assembled mesh.
    """

    name: str
    phi0: Callable[[np.ndarray, np.ndarray], np.ndarray]
    shift_bulk: float
    shift_bnd: float
    params: Params


def scenario_separation() -> Scenario:
    """Unstable striped initial data that separates into bulk phases."""

    def phi0(x, y):
        return np.maximum(0.1 * np.sin(np.pi * x), 0.1 * np.sin(np.pi * y))

    return Scenario(
        name="separation",
        phi0=phi0,
        shift_bulk=0.01,
        shift_bnd=0.01,
        params=Params(m=0.01, m_gamma=0.02, epsilon=0.02, sigma=2.0,
                      delta=0.02, beta=1.0, xi=0.0, tau=2e-5, t_end=1.0),
    )


def scenario_adsorption() -> Scenario:
    """Half-elliptical droplet attached to the left boundary.

    Ellipse barycenter (0.1, 0.5), full horizontal extent 0.6814 and full
    vertical extent 0.367; the phase boundary is mollified with a tanh
    profile over the scaled algebraic level-set value of the ellipse.
    """
    center = np.array([0.1, 0.5])
    semi_x = 0.6814 / 2.0
    semi_y = 0.367 / 2.0
    width_scale = min(semi_x, semi_y)
    eps = 0.01

    def phi0(x, y):
        rho = np.sqrt(((x - center[0]) / semi_x) ** 2 + ((y - center[1]) / semi_y) ** 2)
        signed = (1.0 - rho) * width_scale
        return np.tanh(signed / (np.sqrt(2.0) * eps))

    return Scenario(
        name="adsorption",
        phi0=phi0,
        shift_bulk=0.001,
        shift_bnd=0.001,
        params=Params(m=0.01, m_gamma=0.02, epsilon=eps, sigma=2.0,
                      delta=0.01, beta=4.0, xi=0.0, tau=3e-5, t_end=2.5),
    )


_BUILTIN = {
    "separation": scenario_separation,
    "adsorption": scenario_adsorption,
}


def get_scenario(name: str) -> Scenario:
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; choose from {sorted(_BUILTIN)}") from None


def with_params(scenario: Scenario, **overrides) -> Scenario:
    """Scenario with selected parameter fields replaced."""
    return replace(scenario, params=replace(scenario.params, **overrides))
