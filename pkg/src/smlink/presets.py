"""Canned sweep bundles for the five standard comparison figures.

All presets run BPSK at 2 bits/s/Hz: SM as 2x4, STBC-SM as 4x4 and the
V-BLAST baseline as 2x4.  Figures 2-5 sweep SNR on a 0..30 dB grid by
default; figure 6 sweeps the array size L at a fixed SNR of -5 dB.
Sweep k of a bundle uses master seed base_seed + k.
"""

from smlink.engine import SimConfig

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")

DEFAULT_GRID = tuple(float(s) for s in range(0, 31, 2))
FIG6_SNR_DB = -5.0
FIG6_ELEMENTS = tuple(range(1, 9))

DESK_MIN_ERRORS = 100
DESK_MAX_BITS = 10_000_000
PUBLICATION_MIN_ERRORS = 400
PUBLICATION_MAX_BITS = 1_000_000_000


def _curves(name: str) -> list[dict]:
    sm = dict(scheme="sm", n_t=2, n_r=4)
    stbcsm = dict(scheme="stbc-sm", n_t=4, n_r=4)
    vblast = dict(scheme="vblast", n_t=2, n_r=4)
    if name == "fig2":
        return [
            dict(**sm, variant="plain"),
            dict(**stbcsm, variant="plain"),
            dict(**vblast, variant="plain"),
            dict(**sm, variant="precoded-zf"),
            dict(**sm, variant="precoded-mmse"),
            dict(**stbcsm, variant="precoded-zf"),
            dict(**stbcsm, variant="precoded-mmse"),
        ]
    if name == "fig3":
        return [dict(**base, variant="abf", L=L)
                for base in (sm, stbcsm) for L in (1, 2, 3, 4)]
    if name == "fig4":
        return [dict(**sm, variant="hbf-zf", L=L) for L in (1, 2, 3, 4)]
    if name == "fig5":
        return [dict(**stbcsm, variant="hbf-zf", L=L) for L in (1, 2, 3, 4)]
    if name == "fig6":
        return [dict(**base, variant=variant, L=L)
                for base, variant in ((sm, "abf"), (stbcsm, "abf"),
                                      (sm, "hbf-zf"), (stbcsm, "hbf-zf"))
                for L in FIG6_ELEMENTS]
    raise ValueError(f"unknown figure {name!r}")


def figure_configs(name: str, base_seed: int = 0, publication: bool = False,
                   snr_grid=None) -> list[SimConfig]:
    """SimConfig per curve of the named figure preset."""
    if name == "fig6":
        grid = (FIG6_SNR_DB,)
    else:
        grid = DEFAULT_GRID if snr_grid is None else tuple(snr_grid)
    min_errors = PUBLICATION_MIN_ERRORS if publication else DESK_MIN_ERRORS
    max_bits = PUBLICATION_MAX_BITS if publication else DESK_MAX_BITS
    configs = []
    for k, curve in enumerate(_curves(name)):
        configs.append(SimConfig(
            snr_grid=grid, min_bit_errors=min_errors, max_bits=max_bits,
            master_seed=base_seed + k, **curve,
        ))
    return configs
