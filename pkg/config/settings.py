import copy
import os
import threading
from typing import Any, Dict, Optional

import yaml
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = Field(default="logs/app.log", description="Rotating log file, blank disables")
    THREADS: int = Field(default=1, description="Worker pool size for grid jobs")
    OUTPUT_DIR: str = Field(default="out", description="Default directory for CSV/JSON artefacts")
    NUMERICS_PATH: str = Field(default="numerics.yaml", description="Numerical knobs file")

    class Config:
        env_file = ".env"
        extra = "ignore"

    @field_validator("LOG_FILE", mode="before")
    @classmethod
    def validate_log_file(cls, v):
        if v == "" or v is None: return None
        return str(v)

    @field_validator("THREADS", mode="before")
    @classmethod
    def validate_threads(cls, v):
        if v == "" or v is None: return 1
        return max(1, int(v))


class NumericsConfig:
    """
    Numerical knobs loaded from numerics.yaml and merged over the defaults
    below. Engines read values at call time, so `update_setting` and
    `reload` take effect for subsequent calls.
    """
    DEFAULTS: Dict[str, Dict[str, Any]] = {
        "differencing": {
            "step_2d": 1e-3,
            "step_3d_rel": 1e-4,
            "rtol": 1e-6,
        },
        "quadrature": {
            "initial_nodes": 513,
            "max_nodes": 16385,
            "rtol": 1e-10,
            "gauss_order": 8,
            "gauss_max_nodes": 16384,
            "gauss_rtol": 1e-10,
        },
        "tolerances": {
            "zero_divisor": 1e-10,
            "degeneracy": 1e-10,
            "successor": 1e-8,
        },
        "taylor": {
            "max_degree": 4,
            "step": 1e-2,
            "rtol": 1e-3,
        },
        "similarity": {
            "grid": 64,
            "exclusion_diagonals": 1.5,
            "constant": 0.15915494309189535,
            "zero_tol": 1e-12,
        },
        "ode": {
            "step_fraction": 1e-3,
            "vanish_tol": 1e-8,
        },
    }

    def __init__(self, filepath: Optional[str] = None):
        self.filepath = filepath or os.environ.get("NUMERICS_PATH", "numerics.yaml")
        self._lock = threading.Lock()
        self._data = self._load()

    def _load(self) -> Dict[str, Any]:
        defaults = copy.deepcopy(self.DEFAULTS)

        if not os.path.exists(self.filepath):
            return defaults

        try:
            with open(self.filepath, "r") as f:
                loaded = yaml.safe_load(f) or {}
                for section in defaults:
                    if section not in loaded or not isinstance(loaded[section], dict):
                        loaded[section] = defaults[section]
                    else:
                        for key, val in defaults[section].items():
                            if key not in loaded[section]:
                                loaded[section][key] = val
                return loaded
        except Exception as e:
            print(f"Error loading numerics: {e}")
            return defaults

    def reload(self):
        with self._lock:
            self._data = self._load()

    def update_setting(self, section: str, key: str, value: Any) -> bool:
        with self._lock:
            if section not in self._data: self._data[section] = {}

            current_val = self._data[section].get(key)
            if current_val is not None:
                if isinstance(current_val, bool):
                    value = str(value).lower() in ('true', '1', 'yes', 'on')
                elif isinstance(current_val, int):
                    try: value = int(value)
                    except (TypeError, ValueError): return False
                elif isinstance(current_val, float):
                    try: value = float(value)
                    except (TypeError, ValueError): return False

            self._data[section][key] = value
            return True

    @property
    def differencing(self): return self._data.get('differencing', {})
    @property
    def quadrature(self): return self._data.get('quadrature', {})
    @property
    def tolerances(self): return self._data.get('tolerances', {})
    @property
    def taylor(self): return self._data.get('taylor', {})
    @property
    def similarity(self): return self._data.get('similarity', {})
    @property
    def ode(self): return self._data.get('ode', {})

    def snapshot(self) -> Dict[str, Any]:
        with self._lock:
            return copy.deepcopy(self._data)

    def get_parameter_description(self, section, key):
        descriptions = {
            "differencing": {
                "step_2d": "Central-difference step in the z-plane.",
                "step_3d_rel": "Relative step for 3-D fields, h = step*(1+|x|).",
                "rtol": "Richardson tolerance between h and h/2."
            },
            "quadrature": {
                "initial_nodes": "Uniform nodes per segment before doubling.",
                "max_nodes": "Node cap for cumulative quadrature.",
                "rtol": "Relative change that stops node doubling.",
                "gauss_order": "Gauss-Legendre nodes per panel.",
                "gauss_max_nodes": "Node cap for Gauss-Legendre polylines.",
                "gauss_rtol": "Relative change that stops panel doubling."
            },
            "tolerances": {
                "zero_divisor": "Relative test |q0^2+q1^2| <= tol*|q|^2.",
                "degeneracy": "Relative test |Vec(conj(F)G)| <= tol*|F||G|.",
                "successor": "Coefficient agreement for successor checks."
            },
            "taylor": {
                "max_degree": "Largest Taylor degree (nested differencing).",
                "step": "Differencing step for Taylor derivatives.",
                "rtol": "Richardson tolerance for the outermost derivative."
            },
            "similarity": {
                "grid": "Cells per side of the similarity grid.",
                "exclusion_diagonals": "Singular-cell exclusion radius in cell diagonals.",
                "constant": "Kernel constant, 1/(2*pi) by default.",
                "zero_tol": "|w| below which g switches to a+b."
            },
            "ode": {
                "step_fraction": "RK4 step as a fraction of the domain width.",
                "vanish_tol": "|f0| below which a particular solution is rejected."
            }
        }
        return descriptions.get(section, {}).get(key, "Internal parameter.")


# Singletons
settings = Settings()
numerics = NumericsConfig(settings.NUMERICS_PATH)
