# designs.py
# Central definition of the named coupling designs.
# Site weights are in units of g; amplitudes handed to the bath are g * weight.

import numpy as np

# --- Finite footprints ---
def local_design(dimension: int):
    return {"name": "local", "label": "Local (small) emitter", "dimension": dimension,
            "kind": "profile", "sites": [{"offset": (0,) * dimension, "weight": 1.0}]}


def two_site_design(name: str, label: str, second: tuple):
    """Emitter shared equally between the origin and `second`."""
    zero = (0,) * len(second)
    return {"name": name, "label": label, "dimension": len(second), "kind": "profile",
            "sites": [{"offset": zero,   "weight": 0.5},
                      {"offset": second, "weight": 0.5}]}


def ring_design(name: str, label: str, offsets, weight: complex):
    return {"name": name, "label": label, "dimension": len(offsets[0]), "kind": "profile",
            "sites": [{"offset": tuple(o), "weight": weight} for o in offsets]}


QUASI1D = two_site_design("quasi1d", "Quasi-1D (diagonal cancelled)", (1, 1))

TRAP = ring_design("trap", "Decoherence-free (trapped)",
                   [(-1, 0), (0, -1), (0, 1), (1, 0)], 0.25)

# Alternating phases on the four diagonal neighbours give G = -g sin(kx) sin(ky)
PURIFY = {"name": "purify", "label": "Van Hove filter", "dimension": 2, "kind": "profile",
          "sites": [{"offset": (1, 1),   "weight":  0.25},
                    {"offset": (-1, -1), "weight":  0.25},
                    {"offset": (1, -1),  "weight": -0.25},
                    {"offset": (-1, 1),  "weight": -0.25}]}

# --- Three-dimensional (bcc) footprints ---
BCC_PAIR = two_site_design("bcc_pair", "bcc two-site (k1+k2=+-pi cancelled)", (1, 1, 0))

BCC_TRAP = ring_design("bcc_trap", "bcc decoherence-free (eight sites)",
                       [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
                        (0, 0, 1), (0, 0, -1), (1, 1, 1), (-1, -1, -1)], 0.125)


# --- Analytic momentum-space designs (infinite real-space support) ---
# Arguments are the integer meshes mx, my and N; (kx -+ ky)/2 = pi*(mx -+ my)/N exactly.
def chiral_weight(mx, my, n):
    half_diff = np.pi * (mx - my) / n
    half_sum  = np.pi * (mx + my) / n
    return np.cos(half_diff) * (1.0 + np.sin(half_sum))


def vtype_weight(mx, my, n):
    half_diff = np.pi * (mx - my) / n
    half_sum  = np.pi * (mx + my) / n
    return (1.0 - np.sin(half_diff)) * (1.0 - np.sin(half_sum))


CHIRAL = {"name": "chiral", "label": "Chiral (one direction)", "dimension": 2,
          "kind": "analytic", "weight": chiral_weight}

VTYPE = {"name": "vtype", "label": "V-type (two directions)", "dimension": 2,
         "kind": "analytic", "weight": vtype_weight}


# --- Full design list ---
DESIGNS = {d["name"]: d for d in (QUASI1D, TRAP, PURIFY, BCC_PAIR, BCC_TRAP, CHIRAL, VTYPE)}

DESIGN_NAMES = ("local",) + tuple(DESIGNS)

# Quadrants each analytic design emits into (k_x, k_y signs of its nonzero resonant lines)
TARGET_QUADRANTS = {
    "chiral": (1,),
    "vtype":  (2, 3),
}


def lookup(name: str, dimension: int):
    """Design record for `name` on a bath of `dimension`, or None if unknown."""
    if name == "local":
        return local_design(dimension)
    return DESIGNS.get(name)
