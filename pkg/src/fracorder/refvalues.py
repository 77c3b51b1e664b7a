"""Benchmark estimates for the three preset observation sweeps.

Each sweep runs 54 cells: nine leading orders, the three deterministic
perturbation shapes, and two perturbation amplitudes.  The values here
are the target (ratio, log-comparator) estimate pairs that the sweep
tooling diffs against; agreement bands are 0.02 for the ratio estimate
and 0.03 for the log comparator.
"""

from __future__ import annotations

__all__ = [
    "LOG_BAND",
    "RATIO_BAND",
    "SWEEP_AMPLITUDES",
    "SWEEP_IDS",
    "SWEEP_ORDERS",
    "expected_pair",
    "sweep_cells",
]

RATIO_BAND = 0.02
LOG_BAND = 0.03

SWEEP_IDS = (1, 2, 3)
SWEEP_ORDERS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
SWEEP_AMPLITUDES = {1: (0.03, 0.3), 2: (0.03, 0.3), 3: (0.04, 0.4)}

# key: (nu0, noise shape, amplitude) -> (ratio estimate, log estimate)
_SWEEP_1 = {
    (0.1, "N1", 0.03): (0.1002, 0.0922), (0.1, "N1", 0.3): (0.1024, 0.0915),
    (0.1, "N2", 0.03): (0.1000, 0.0880), (0.1, "N2", 0.3): (0.1000, 0.0537),
    (0.1, "N3", 0.03): (0.0764, 0.0661), (0.1, "N3", 0.3): (0.0084, -0.0691),
    (0.2, "N1", 0.03): (0.2005, 0.1867), (0.2, "N1", 0.3): (0.2042, 0.1854),
    (0.2, "N2", 0.03): (0.2001, 0.1827), (0.2, "N2", 0.3): (0.2000, 0.1495),
    (0.2, "N3", 0.03): (0.1771, 0.1615), (0.2, "N3", 0.3): (0.1088, 0.0290),
    (0.3, "N1", 0.03): (0.3007, 0.2831), (0.3, "N1", 0.3): (0.3069, 0.2805),
    (0.3, "N2", 0.03): (0.2999, 0.2793), (0.3, "N2", 0.3): (0.2999, 0.2467),
    (0.3, "N3", 0.03): (0.2773, 0.2586), (0.3, "N3", 0.3): (0.2092, 0.1277),
    (0.4, "N1", 0.03): (0.4010, 0.3811), (0.4, "N1", 0.3): (0.4111, 0.3763),
    (0.4, "N2", 0.03): (0.3995, 0.3776), (0.4, "N2", 0.3): (0.3998, 0.3453),
    (0.4, "N3", 0.03): (0.3773, 0.3571), (0.4, "N3", 0.3): (0.3090, 0.2271),
    (0.5, "N1", 0.03): (0.5017, 0.4804), (0.5, "N1", 0.3): (0.5180, 0.4715),
    (0.5, "N2", 0.03): (0.4998, 0.4774), (0.5, "N2", 0.3): (0.4997, 0.4452),
    (0.5, "N3", 0.03): (0.4774, 0.4569), (0.5, "N3", 0.3): (0.4086, 0.3270),
    (0.6, "N1", 0.03): (0.6027, 0.5807), (0.6, "N1", 0.3): (0.6248, 0.5640),
    (0.6, "N2", 0.03): (0.5995, 0.5786), (0.6, "N2", 0.3): (0.5995, 0.5462),
    (0.6, "N3", 0.03): (0.5773, 0.5580), (0.6, "N3", 0.3): (0.5082, 0.4275),
    (0.7, "N1", 0.03): (0.7033, 0.6814), (0.7, "N1", 0.3): (0.7291, 0.6507),
    (0.7, "N2", 0.03): (0.6998, 0.6811), (0.7, "N2", 0.3): (0.6996, 0.6482),
    (0.7, "N3", 0.03): (0.6769, 0.6602), (0.7, "N3", 0.3): (0.6069, 0.5284),
    (0.8, "N1", 0.03): (0.8018, 0.7816), (0.8, "N1", 0.3): (0.8184, 0.7272),
    (0.8, "N2", 0.03): (0.8003, 0.7848), (0.8, "N2", 0.3): (0.8001, 0.7512),
    (0.8, "N3", 0.03): (0.7768, 0.7634), (0.8, "N3", 0.3): (0.7061, 0.6298),
    (0.9, "N1", 0.03): (0.8960, 0.8796), (0.9, "N1", 0.3): (0.8783, 0.7890),
    (0.9, "N2", 0.03): (0.8997, 0.8896), (0.9, "N2", 0.3): (0.8998, 0.8550),
    (0.9, "N3", 0.03): (0.8758, 0.8676), (0.9, "N3", 0.3): (0.8045, 0.7315),
}

_SWEEP_2 = {
    (0.1, "N1", 0.03): (0.1010, 0.0920), (0.1, "N1", 0.3): (0.1031, 0.0913),
    (0.1, "N2", 0.03): (0.1008, 0.0878), (0.1, "N2", 0.3): (0.1003, 0.0535),
    (0.1, "N3", 0.03): (0.0772, 0.0659), (0.1, "N3", 0.3): (0.0092, -0.0693),
    (0.2, "N1", 0.03): (0.2013, 0.1865), (0.2, "N1", 0.3): (0.2050, 0.1851),
    (0.2, "N2", 0.03): (0.2009, 0.1825), (0.2, "N2", 0.3): (0.2002, 0.1492),
    (0.2, "N3", 0.03): (0.1779, 0.1613), (0.2, "N3", 0.3): (0.1096, 0.0288),
    (0.3, "N1", 0.03): (0.3016, 0.2828), (0.3, "N1", 0.3): (0.3078, 0.2803),
    (0.3, "N2", 0.03): (0.3007, 0.2790), (0.3, "N2", 0.3): (0.3008, 0.2465),
    (0.3, "N3", 0.03): (0.2781, 0.2583), (0.3, "N3", 0.3): (0.2100, 0.1275),
    (0.4, "N1", 0.03): (0.4019, 0.3808), (0.4, "N1", 0.3): (0.4120, 0.3761),
    (0.4, "N2", 0.03): (0.4004, 0.3773), (0.4, "N2", 0.3): (0.4007, 0.3451),
    (0.4, "N3", 0.03): (0.3781, 0.3568), (0.4, "N3", 0.3): (0.3098, 0.2269),
    (0.5, "N1", 0.03): (0.5026, 0.4802), (0.5, "N1", 0.3): (0.5189, 0.4712),
    (0.5, "N2", 0.03): (0.5007, 0.4772), (0.5, "N2", 0.3): (0.5006, 0.4449),
    (0.5, "N3", 0.03): (0.4783, 0.4567), (0.5, "N3", 0.3): (0.4095, 0.3268),
    (0.6, "N1", 0.03): (0.6036, 0.5805), (0.6, "N1", 0.3): (0.6257, 0.5637),
    (0.6, "N2", 0.03): (0.6005, 0.5784), (0.6, "N2", 0.3): (0.6004, 0.5459),
    (0.6, "N3", 0.03): (0.5782, 0.5577), (0.6, "N3", 0.3): (0.5091, 0.4273),
    (0.7, "N1", 0.03): (0.7042, 0.6812), (0.7, "N1", 0.3): (0.7300, 0.6505),
    (0.7, "N2", 0.03): (0.7007, 0.6809), (0.7, "N2", 0.3): (0.7006, 0.6480),
    (0.7, "N3", 0.03): (0.6778, 0.6599), (0.7, "N3", 0.3): (0.6078, 0.5282),
    (0.8, "N1", 0.03): (0.8028, 0.7814), (0.8, "N1", 0.3): (0.8193, 0.7270),
    (0.8, "N2", 0.03): (0.8013, 0.7846), (0.8, "N2", 0.3): (0.8010, 0.7509),
    (0.8, "N3", 0.03): (0.7777, 0.7632), (0.8, "N3", 0.3): (0.7071, 0.6296),
    (0.9, "N1", 0.03): (0.8970, 0.8794), (0.9, "N1", 0.3): (0.8792, 0.7888),
    (0.9, "N2", 0.03): (0.9007, 0.8894), (0.9, "N2", 0.3): (0.9007, 0.8548),
    (0.9, "N3", 0.03): (0.8767, 0.8673), (0.9, "N3", 0.3): (0.8054, 0.7313),
}

_SWEEP_3 = {
    (0.1, "N1", 0.04): (0.1024, 0.0915), (0.1, "N1", 0.4): (0.1032, 0.0787),
    (0.1, "N2", 0.04): (0.1000, 0.0744), (0.1, "N2", 0.4): (0.1000, 0.0326),
    (0.1, "N3", 0.04): (0.0720, 0.0481), (0.1, "N3", 0.4): (0.0014, -0.1045),
    (0.2, "N1", 0.04): (0.2042, 0.1854), (0.2, "N1", 0.4): (0.2056, 0.1777),
    (0.2, "N2", 0.04): (0.1999, 0.1744), (0.2, "N2", 0.4): (0.1999, 0.1326),
    (0.2, "N3", 0.04): (0.1719, 0.1481), (0.2, "N3", 0.4): (0.1007, -0.0045),
    (0.3, "N1", 0.04): (0.3069, 0.2805), (0.3, "N1", 0.4): (0.3096, 0.2758),
    (0.3, "N2", 0.04): (0.2998, 0.2744), (0.3, "N2", 0.4): (0.2998, 0.2326),
    (0.3, "N3", 0.04): (0.2717, 0.2481), (0.3, "N3", 0.4): (0.2000, 0.0955),
    (0.4, "N1", 0.04): (0.4111, 0.3763), (0.4, "N1", 0.4): (0.4155, 0.3724),
    (0.4, "N2", 0.04): (0.3997, 0.3744), (0.4, "N2", 0.4): (0.3994, 0.3326),
    (0.4, "N3", 0.04): (0.3716, 0.3481), (0.4, "N3", 0.4): (0.2992, 0.1955),
    (0.5, "N1", 0.04): (0.5180, 0.4715), (0.5, "N1", 0.4): (0.5251, 0.4660),
    (0.5, "N2", 0.04): (0.4998, 0.4744), (0.5, "N2", 0.4): (0.5004, 0.4326),
    (0.5, "N3", 0.04): (0.4717, 0.4481), (0.5, "N3", 0.4): (0.3991, 0.2955),
    (0.6, "N1", 0.04): (0.6248, 0.5640), (0.6, "N1", 0.4): (0.6332, 0.5546),
    (0.6, "N2", 0.04): (0.6006, 0.5744), (0.6, "N2", 0.4): (0.5988, 0.5326),
    (0.6, "N3", 0.04): (0.5721, 0.5481), (0.6, "N3", 0.4): (0.4985, 0.3955),
    (0.7, "N1", 0.04): (0.7291, 0.6507), (0.7, "N1", 0.4): (0.7365, 0.6351),
    (0.7, "N2", 0.04): (0.7011, 0.6744), (0.7, "N2", 0.4): (0.6999, 0.6326),
    (0.7, "N3", 0.04): (0.6724, 0.6481), (0.7, "N3", 0.4): (0.5984, 0.4955),
    (0.8, "N1", 0.04): (0.8184, 0.7272), (0.8, "N1", 0.4): (0.8217, 0.7037),
    (0.8, "N2", 0.04): (0.8012, 0.7744), (0.8, "N2", 0.4): (0.8011, 0.7326),
    (0.8, "N3", 0.04): (0.7721, 0.7481), (0.8, "N3", 0.4): (0.6982, 0.5955),
    (0.9, "N1", 0.04): (0.8783, 0.7890), (0.9, "N1", 0.4): (0.8751, 0.7574),
    (0.9, "N2", 0.04): (0.9006, 0.8744), (0.9, "N2", 0.4): (0.8992, 0.8326),
    (0.9, "N3", 0.04): (0.8722, 0.8481), (0.9, "N3", 0.4): (0.7976, 0.6955),
}

_SWEEPS = {1: _SWEEP_1, 2: _SWEEP_2, 3: _SWEEP_3}


def sweep_cells(sweep_id: int) -> tuple[tuple[float, str, float], ...]:
    """All 54 cell keys of a sweep, ordered by (nu0, noise shape, amplitude)."""
    if sweep_id not in _SWEEPS:
        raise KeyError(f"unknown sweep id {sweep_id!r}, expected one of {SWEEP_IDS}")
    return tuple(sorted(_SWEEPS[sweep_id]))


def expected_pair(sweep_id: int, nu0: float, noise: str, epsilon: float) -> tuple[float, float]:
    """Target (ratio, log) estimates for one sweep cell."""
    if sweep_id not in _SWEEPS:
        raise KeyError(f"unknown sweep id {sweep_id!r}, expected one of {SWEEP_IDS}")
    try:
        return _SWEEPS[sweep_id][(nu0, noise, epsilon)]
    except KeyError:
        raise KeyError(
            f"sweep {sweep_id} has no cell (nu0={nu0!r}, noise={noise!r}, epsilon={epsilon!r})"
        ) from None
