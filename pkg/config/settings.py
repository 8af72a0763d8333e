# depth_ruin/config/settings.py
"""
Configuration management for the depth-ruin toolkit
"""

import configparser
import io
import logging
import os
from typing import List, Optional

from data.exceptions import ConfigError, ValidationError
from data.models import (ClaimComponent, CreepClock, LevyModel, ModelKind, PenaltyKind, PenaltySpec,
                         QuadratureConfig, RunConfig, SeverityDistribution, SeverityKind, SimConfig)
from penalty.gerber_shiu import CREEPING_KERNELS
from processes import levy_model

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = {
    'MODEL': {
        'kind': 'cramer_lundberg',
        'drift': '1.5',
        'sigma': '0.0',
        'jump_rate': '1.0',
        'claim_weights': '1.0',
        'claim_rates': '1.0',
        'require_net_profit': 'true'
    },
    'SEVERITY': {
        'kind': 'exponential',
        'value': '1.0',
        'rate': '1.0',
        'points': '',
        'weights': ''
    },
    'PENALTY': {
        'kind': 'one',
        'theta1': '0.0',
        'theta2': '0.0',
        'd': '0.0'
    },
    'CLOCK': {
        'rate': '1.0'
    },
    'NUMERICS': {
        'rel_tol': '1e-9',
        'abs_tol': '1e-12',
        'max_subdivisions': '200',
        'tail_cut_mass': '1e-12',
        'creeping_kernel': 'as_printed'
    },
    'SIMULATION': {
        'n_paths': '100000',
        'seed': '20240101',
        'horizon': '500.0',
        'euler_dt': '1e-3',
        'excursion_floor': '1e-4',
        'antithetic': 'false',
        'block_size': '8192',
        'workers': '1'
    },
    'QUERY': {
        'x': '0.0, 1.0',
        'q': '0.0, 0.05',
        'b': '3.0, 5.0',
        'y_scales': '0.5, 1.0, 2.0'
    },
    'COMPARE': {
        'z_max': '4.0',
        'b_offset': '0.0'
    },
    'RUN': {
        'fail_fast': 'true'
    },
    'LOGGING': {
        'level': 'INFO',
        'log_file': 'depth_ruin.log'
    }
}


class Settings:
    """Configuration settings manager"""

    def __init__(self, config_path: str = "config/config.ini"):
        self.config = configparser.ConfigParser()
        self.config_path = config_path
        self._load_config()
        self._load_environment_variables()

    def _load_config(self):
        """Load configuration from file on top of the defaults"""
        self.config.read_dict(DEFAULT_CONFIG)
        if os.path.exists(self.config_path):
            try:
                self.config.read(self.config_path, encoding='utf-8')
            except configparser.Error as e:
                raise ConfigError(f"cannot parse {self.config_path}: {e}") from e
        else:
            logger.info(f"No config at {self.config_path}, using defaults")

    def save(self, path: Optional[str] = None):
        """Write the fully-defaulted configuration to path (default: config_path)"""
        path = path or self.config_path
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)

        with open(path, 'w', encoding='utf-8') as f:
            self.config.write(f)

    def _load_environment_variables(self):
        """Override config with environment variables if available"""
        env_mappings = {
            'DEPTH_RUIN_SEED': ('SIMULATION', 'seed'),
            'DEPTH_RUIN_PATHS': ('SIMULATION', 'n_paths'),
            'DEPTH_RUIN_WORKERS': ('SIMULATION', 'workers')
        }

        for env_var, (section, key) in env_mappings.items():
            if env_var in os.environ:
                if section not in self.config:
                    self.config[section] = {}
                self.config[section][key] = os.environ[env_var]

    def set(self, section: str, key: str, value) -> None:
        """Override one value (used for CLI flags)"""
        if section not in self.config:
            self.config[section] = {}
        self.config[section][key] = str(value)

    def dump(self) -> str:
        """Current configuration as INI text"""
        buffer = io.StringIO()
        self.config.write(buffer)
        return buffer.getvalue()

    def get(self, section: str, key: str, fallback: str = '') -> str:
        """Get configuration value"""
        return self.config.get(section, key, fallback=fallback).strip()

    def getint(self, section: str, key: str, fallback: int = 0) -> int:
        """Get integer configuration value"""
        try:
            return self.config.getint(section, key, fallback=fallback)
        except ValueError as e:
            raise ConfigError(f"[{section}] {key}: {e}") from e

    def getfloat(self, section: str, key: str, fallback: float = 0.0) -> float:
        """Get float configuration value"""
        try:
            return self.config.getfloat(section, key, fallback=fallback)
        except ValueError as e:
            raise ConfigError(f"[{section}] {key}: {e}") from e

    def getboolean(self, section: str, key: str, fallback: bool = False) -> bool:
        """Get boolean configuration value"""
        try:
            return self.config.getboolean(section, key, fallback=fallback)
        except ValueError as e:
            raise ConfigError(f"[{section}] {key}: {e}") from e

    def getfloats(self, section: str, key: str) -> List[float]:
        """Get a comma-separated list of floats (empty list when blank)"""
        raw = self.get(section, key)
        try:
            return [float(item) for item in raw.split(',') if item.strip()]
        except ValueError as e:
            raise ConfigError(f"[{section}] {key}: {e}") from e


def _enum(enum_cls, section: str, value: str):
    try:
        return enum_cls(value.lower())
    except ValueError:
        choices = ', '.join(member.value for member in enum_cls)
        raise ConfigError(f"[{section}] kind must be one of {choices}, got {value!r}")


def build_model(settings: Settings) -> LevyModel:
    kind = _enum(ModelKind, 'MODEL', settings.get('MODEL', 'kind'))
    drift = settings.getfloat('MODEL', 'drift')
    sigma = settings.getfloat('MODEL', 'sigma')
    jump_rate = settings.getfloat('MODEL', 'jump_rate')
    require_net_profit = settings.getboolean('MODEL', 'require_net_profit', fallback=True)
    weights = settings.getfloats('MODEL', 'claim_weights')
    rates = settings.getfloats('MODEL', 'claim_rates')
    if len(weights) != len(rates):
        raise ConfigError(f"[MODEL] claim_weights ({len(weights)}) and claim_rates ({len(rates)}) differ in length")
    claims = [ClaimComponent(w, r) for w, r in zip(weights, rates)]

    if kind is ModelKind.CRAMER_LUNDBERG:
        return levy_model.cramer_lundberg(drift, jump_rate, claims, require_net_profit=require_net_profit)
    if kind is ModelKind.BROWNIAN_DRIFT:
        return levy_model.brownian_drift(drift, sigma, require_net_profit=require_net_profit)
    return levy_model.jump_diffusion(drift, sigma, jump_rate, claims, require_net_profit=require_net_profit)


def build_severity(settings: Settings) -> SeverityDistribution:
    kind = _enum(SeverityKind, 'SEVERITY', settings.get('SEVERITY', 'kind'))
    if kind is SeverityKind.POINT_MASS:
        return SeverityDistribution.point_mass(settings.getfloat('SEVERITY', 'value'))
    if kind is SeverityKind.EXPONENTIAL:
        return SeverityDistribution.exponential(settings.getfloat('SEVERITY', 'rate'))

    points = settings.getfloats('SEVERITY', 'points')
    weights = settings.getfloats('SEVERITY', 'weights')
    if not points or len(points) != len(weights):
        raise ConfigError("[SEVERITY] point_mixture needs points and weights of equal, non-zero length")
    return SeverityDistribution.mixture(zip(weights, points))


def build_penalty(settings: Settings) -> PenaltySpec:
    kind = _enum(PenaltyKind, 'PENALTY', settings.get('PENALTY', 'kind'))
    theta1 = settings.getfloat('PENALTY', 'theta1')
    theta2 = settings.getfloat('PENALTY', 'theta2')
    d = settings.getfloat('PENALTY', 'd')
    if kind is PenaltyKind.ONE:
        return PenaltySpec.one()
    if kind is PenaltyKind.EXP_DEFICIT:
        return PenaltySpec.exp_deficit(theta2)
    if kind is PenaltyKind.EXP_BOTH:
        return PenaltySpec.exp_both(theta1, theta2)
    return PenaltySpec.deficit_indicator(d)


def build_clock(settings: Settings) -> Optional[CreepClock]:
    raw = settings.get('CLOCK', 'rate')
    if not raw:
        return None
    return CreepClock(settings.getfloat('CLOCK', 'rate'))


def build_run_config(settings: Settings) -> RunConfig:
    """Validate every block through the domain constructors and assemble a RunConfig."""
    try:
        model = build_model(settings)
        severity_law = build_severity(settings)
        penalty = build_penalty(settings)
        clock = build_clock(settings)

        quadrature = QuadratureConfig(
            rel_tol=settings.getfloat('NUMERICS', 'rel_tol'),
            abs_tol=settings.getfloat('NUMERICS', 'abs_tol'),
            max_subdivisions=settings.getint('NUMERICS', 'max_subdivisions'),
            tail_cut_mass=settings.getfloat('NUMERICS', 'tail_cut_mass'))
        creeping_kernel = settings.get('NUMERICS', 'creeping_kernel')
        if creeping_kernel not in CREEPING_KERNELS:
            raise ConfigError(f"[NUMERICS] creeping_kernel must be one of {CREEPING_KERNELS}")

        sim = SimConfig(
            n_paths=settings.getint('SIMULATION', 'n_paths'),
            seed=settings.getint('SIMULATION', 'seed'),
            horizon=settings.getfloat('SIMULATION', 'horizon'),
            euler_dt=settings.getfloat('SIMULATION', 'euler_dt'),
            excursion_floor=settings.getfloat('SIMULATION', 'excursion_floor'),
            antithetic=settings.getboolean('SIMULATION', 'antithetic'),
            block_size=settings.getint('SIMULATION', 'block_size'),
            workers=settings.getint('SIMULATION', 'workers'))

        xs = settings.getfloats('QUERY', 'x')
        qs = settings.getfloats('QUERY', 'q')
        bs = settings.getfloats('QUERY', 'b')
        y_scales = settings.getfloats('QUERY', 'y_scales') or [1.0]
        if not (xs and qs and bs):
            raise ConfigError("[QUERY] x, q and b must each list at least one value")
        if model.sigma > 0 and clock is None:
            raise ConfigError("[CLOCK] rate is required for models with a Brownian component")

        return RunConfig(model=model, severity=severity_law, penalty=penalty, clock=clock,
                         quadrature=quadrature, sim=sim, xs=xs, qs=qs, bs=bs, y_scales=y_scales,
                         z_max=settings.getfloat('COMPARE', 'z_max'),
                         creeping_kernel=creeping_kernel,
                         fail_fast=settings.getboolean('RUN', 'fail_fast', fallback=True),
                         simulation_b_offset=settings.getfloat('COMPARE', 'b_offset'))
    except ConfigError:
        raise
    except ValidationError as e:
        raise ConfigError(f"invalid configuration in {settings.config_path}: {e}") from e
