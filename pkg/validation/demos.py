"""
Preconfigured 2D runs: electrode placement, elastic supports and an absorbing lining.
"""
import math
from config import RunConfig, parse_run_config

MIXER2D = {
    "mesh": {"shape": "disk", "size": 1.0, "target_h": 0.08, "n_boundary": 128},
    "physics": {"model": "conductivity", "gamma": 1.0, "f": 0.0, "u_in": 1.0},
    "region": {"arcs": [[0.0, 0.3]], "anode_arcs": [[math.pi, math.pi + 0.3]]},
    "objective": {"name": "neg_energy", "ell": 0.1, "m": 0.0},
    "smoothing": {"eps_smooth": 0.1},
    "optimizer": {"problem": "mixer", "n_top": 10, "n_top_stop": 30, "max_iter": 50, "tau0": 0.1},
}

SUPPORTS2D = {
    "mesh": {"shape": "square", "size": 1.0, "target_h": 0.05, "side_labels": [0, 0, 3, 0]},
    "physics": {"model": "elasticity", "E": 1.0, "nu": 0.3, "traction": {"3": [0.0, -1.0]}},
    "region": {"arcs": [[0.3, 0.7]]},
    "objective": {"name": "u2", "ell": 0.05, "m": 0.0},
    "smoothing": {"eps_smooth": 0.1},
    "optimizer": {"problem": "elasticity-support", "n_top": 10, "n_top_stop": 20, "max_iter": 50, "tau0": 0.1},
}

# k^2 = 9 lies just below the first Neumann eigenvalue pi^2 of the unit square
CLOAK2D = {
    "mesh": {"shape": "square", "size": 1.0, "target_h": 0.05},
    "physics": {"model": "helmholtz", "gamma": 1.0, "f": 1.0, "k": 3.0, "Z": 1.0},
    "region": {"arcs": [[0.4, 0.6]]},
    "objective": {"name": "abs2", "ell": 0.05, "m": 0.0},
    "smoothing": {"eps_smooth": 0.1},
    "optimizer": {"problem": "helmholtz", "n_top": 5, "n_top_stop": 20, "max_iter": 50, "tau0": 0.1},
}

DEMO_CONFIGS = {"mixer2d": MIXER2D, "supports2d": SUPPORTS2D, "cloak2d": CLOAK2D}


def demo_config(name: str, output_directory: str = None) -> RunConfig:
    """Validated RunConfig of a named demo."""
    document = {key: dict(value) for key, value in DEMO_CONFIGS[name].items()}
    document["output"] = {"directory": output_directory} if output_directory else {}
    return parse_run_config(document)
