from typing import Callable, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

ComplexFunction = Callable[[np.ndarray], np.ndarray]

DEFAULT_ANGLES = 1024
DEFAULT_SEGMENT_POINTS = 4096


def _refine_peak(modulus: Callable[[float], float], lo: float, hi: float) -> Tuple[float, float]:
    """Bounded golden-section/Brent search for the maximum of modulus on [lo, hi]"""
    result = minimize_scalar(lambda t: -modulus(t), bounds=(lo, hi), method='bounded',
                             options={'xatol': 1e-12})
    return float(result.x), float(-result.fun)


def circle_sup(func: ComplexFunction, center: complex, radius: float,
               angles: int = DEFAULT_ANGLES, refine: bool = True) -> Tuple[float, complex]:
    """
    Maximum of |func| on the circle |z - center| = radius

    Args:
        func: Vectorized complex function
        center (complex): Circle center
        radius (float): Circle radius
        angles (int): Number of equispaced sample angles
        refine (bool): Polish the best sample with a bounded scalar search

    Returns:
        Tuple[float, complex]: The sup estimate and the point attaining it
    """
    theta = 2.0 * np.pi * np.arange(angles) / angles
    points = center + radius * np.exp(1j * theta)
    values = np.abs(func(points))
    best = int(np.argmax(values))
    sup, argmax = float(values[best]), complex(points[best])
    if refine:
        step = 2.0 * np.pi / angles

        def modulus(t: float) -> float:
            return float(np.abs(func(np.array([center + radius * np.exp(1j * t)]))[0]))

        t_best, refined = _refine_peak(modulus, theta[best] - step, theta[best] + step)
        if refined > sup:
            sup, argmax = refined, center + radius * np.exp(1j * t_best)
    return sup, argmax


def segment_sup(func: ComplexFunction, start: complex, end: complex,
                points: int = DEFAULT_SEGMENT_POINTS, refine: bool = True) -> Tuple[float, complex]:
    """Maximum of |func| on the closed segment [start, end] (endpoints included)"""
    points = max(int(points), 2)
    t = np.linspace(0.0, 1.0, points)
    nodes = start + (end - start) * t
    values = np.abs(func(nodes))
    best = int(np.argmax(values))
    sup, argmax = float(values[best]), complex(nodes[best])
    if refine and start != end:
        step = 1.0 / (points - 1)

        def modulus(s: float) -> float:
            return float(np.abs(func(np.array([start + (end - start) * s]))[0]))

        s_best, refined = _refine_peak(modulus, max(0.0, t[best] - step), min(1.0, t[best] + step))
        if refined > sup:
            sup, argmax = refined, start + (end - start) * s_best
    return sup, argmax
