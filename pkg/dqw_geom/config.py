"""Run configuration: INI file -> validated, frozen RunConfig.

Sections and keys (everything else is rejected):

    [lattice]  P, J, eps
    [theta]    expression | family (+ value, amplitude, omega, scale)
    [initial]  kind = point | gaussian | uniform | file | random,
               p, component, center, width, momentum, path, seed
    [mode]     name = simulate | geometry | connection | curvature | converge,
               n_steps, eps_list, t_probe, probe_P, lambda_star
    [output]   dir, format = csv | json, fields
"""
import configparser
import logging
import os
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

from .errors import ConfigError, LatticeError
from .lattice import Lattice, make_lattice
from .theta import FAMILIES, ThetaSpec, builtin_theta, parse_expression, parse_theta

logger = logging.getLogger(__name__)

MODES = ('simulate', 'geometry', 'connection', 'curvature', 'converge')
INITIAL_KINDS = ('point', 'gaussian', 'uniform', 'file', 'random')
FORMATS = ('csv', 'json')

SCHEMA: Dict[str, Tuple[str, ...]] = {
    'lattice': ('P', 'J', 'eps'),
    'theta': ('expression', 'family', 'value', 'amplitude', 'omega', 'scale'),
    'initial': ('kind', 'p', 'component', 'center', 'width', 'momentum', 'path', 'seed'),
    'mode': ('name', 'n_steps', 'eps_list', 't_probe', 'probe_P', 'lambda_star'),
    'output': ('dir', 'format', 'fields'),
}
FAMILY_KEYS: Dict[str, Tuple[str, ...]] = {
    'constant': ('value',),
    'sinusoidal_scale': ('amplitude', 'omega'),
    'scale_factor': ('scale',),
    'de_sitter': (),
}


@dataclass(frozen=True)
class InitialConfig:
    kind: str = 'point'
    p: int = 0
    component: str = 'L'
    center: Optional[float] = None
    width: float = 4.0
    momentum: float = 0.0
    path: Optional[str] = None
    seed: Optional[int] = None


@dataclass(frozen=True)
class ModeConfig:
    name: str = 'simulate'
    n_steps: Optional[int] = None
    eps_list: Tuple[float, ...] = (0.1, 0.05, 0.025, 0.0125)
    t_probe: float = 1.0
    probe_P: int = 8
    lambda_star: Optional[str] = None


@dataclass(frozen=True)
class OutputConfig:
    dir: str = 'out'
    format: str = 'csv'
    fields: Tuple[str, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    lattice: Lattice
    theta: ThetaSpec
    initial: InitialConfig
    mode: ModeConfig
    output: OutputConfig
    source: Optional[str] = None

    def with_mode(self, name: str) -> 'RunConfig':
        if name not in MODES:
            raise ConfigError([f"mode.name: unknown mode '{name}' (expected one of {', '.join(MODES)})"])
        return replace(self, mode=replace(self.mode, name=name))

    def with_output_dir(self, path: str) -> 'RunConfig':
        return replace(self, output=replace(self.output, dir=path))


class _Reader:
    """Typed getters over one section that record violations instead of raising."""

    def __init__(self, parser: configparser.ConfigParser, section: str, violations: List[str]):
        self.section = parser[section] if parser.has_section(section) else {}
        self.name = section
        self.violations = violations

    def _get(self, key, default, convert, kind):
        if key not in self.section:
            return default
        raw = self.section[key]
        try:
            return convert(raw)
        except ValueError:
            self.violations.append(f"{self.name}.{key}: expected {kind}, got '{raw}'")
            return default

    def get_int(self, key, default=None):
        return self._get(key, default, int, 'an integer')

    def get_float(self, key, default=None):
        return self._get(key, default, float, 'a number')

    def get_text(self, key, default=None):
        return self._get(key, default, lambda s: s.strip(), 'text')

    def get_list(self, key, default=(), convert=str):
        def split(raw):
            return tuple(convert(item.strip()) for item in raw.split(',') if item.strip())
        return self._get(key, default, split, 'a comma-separated list')


def _check_keys(parser: configparser.ConfigParser, violations: List[str]) -> None:
    for section in parser.sections():
        if section not in SCHEMA:
            violations.append(f"unknown section [{section}]")
            continue
        for key in parser[section]:
            if key not in SCHEMA[section]:
                violations.append(f"{section}.{key}: unknown key")


def _lattice(r: _Reader) -> Optional[Lattice]:
    P, J, eps = r.get_int('P'), r.get_int('J'), r.get_float('eps', 0.05)
    if P is None or J is None:
        r.violations.append('lattice: P and J are required')
        return None
    try:
        return make_lattice(P, J, eps)
    except LatticeError as exc:
        r.violations.append(f"lattice.{exc.field}: {exc}")
        return None


def _theta_source(r: _Reader) -> Optional[Tuple[str, dict]]:
    expression, family = r.get_text('expression'), r.get_text('family')
    if (expression is None) == (family is None):
        r.violations.append('theta: give exactly one of expression or family')
        return None
    if expression is not None:
        return 'expression', {'src': expression}
    if family not in FAMILIES:
        r.violations.append(f"theta.family: unknown family '{family}' (known: {', '.join(sorted(FAMILIES))})")
        return None
    params = {}
    for key in SCHEMA['theta'][2:]:
        if key not in r.section:
            continue
        if key not in FAMILY_KEYS[family]:
            r.violations.append(f"theta.{key}: not a parameter of family '{family}'")
        elif key == 'scale':
            params['expression'] = r.get_text(key)
        else:
            params[key] = r.get_float(key)
    return family, params


def _initial(r: _Reader) -> InitialConfig:
    cfg = InitialConfig(
        kind=r.get_text('kind', 'point'), p=r.get_int('p', 0), component=r.get_text('component', 'L'),
        center=r.get_float('center'), width=r.get_float('width', 4.0), momentum=r.get_float('momentum', 0.0),
        path=r.get_text('path'), seed=r.get_int('seed'),
    )
    if cfg.kind not in INITIAL_KINDS:
        r.violations.append(f"initial.kind: unknown kind '{cfg.kind}' (expected one of {', '.join(INITIAL_KINDS)})")
    if cfg.component not in ('L', 'R'):
        r.violations.append(f"initial.component: expected L or R, got '{cfg.component}'")
    if cfg.kind == 'random' and cfg.seed is None:
        r.violations.append('initial.seed: a random initial state needs an explicit seed')
    if cfg.kind == 'file' and not cfg.path:
        r.violations.append('initial.path: required for kind = file')
    elif cfg.kind == 'file' and not os.path.isfile(cfg.path):
        r.violations.append(f"initial.path: no such file '{cfg.path}'")
    if not cfg.width > 0:
        r.violations.append(f"initial.width: must be positive (got {cfg.width})")
    return cfg


def _mode(r: _Reader) -> ModeConfig:
    cfg = ModeConfig(
        name=r.get_text('name', 'simulate'), n_steps=r.get_int('n_steps'),
        eps_list=r.get_list('eps_list', ModeConfig.eps_list, float), t_probe=r.get_float('t_probe', 1.0),
        probe_P=r.get_int('probe_P', 8), lambda_star=r.get_text('lambda_star'),
    )
    if cfg.name not in MODES:
        r.violations.append(f"mode.name: unknown mode '{cfg.name}' (expected one of {', '.join(MODES)})")
    if cfg.n_steps is not None and cfg.n_steps < 0:
        r.violations.append(f"mode.n_steps: must be non-negative (got {cfg.n_steps})")
    if list(cfg.eps_list) != sorted(cfg.eps_list, reverse=True) or any(e <= 0 for e in cfg.eps_list):
        r.violations.append('mode.eps_list: needs positive, decreasing spacings')
    if cfg.probe_P % 2 != 0 or cfg.probe_P < 4:
        r.violations.append(f"mode.probe_P: must be even and at least 4 (got {cfg.probe_P})")
    return cfg


def _output(r: _Reader) -> OutputConfig:
    cfg = OutputConfig(dir=r.get_text('dir', 'out'), format=r.get_text('format', 'csv'), fields=r.get_list('fields'))
    if cfg.format not in FORMATS:
        r.violations.append(f"output.format: expected csv or json, got '{cfg.format}'")
    return cfg


def load_config(path: str) -> RunConfig:
    """Read and validate a run configuration; every schema violation is reported at once."""
    if not os.path.isfile(path):
        raise ConfigError([f"{path}: no such file"])
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path, encoding='utf-8')
    except configparser.Error as exc:
        raise ConfigError([f"{path}: {exc}"]) from None

    violations: List[str] = []
    _check_keys(parser, violations)
    for section in ('lattice', 'theta'):
        if not parser.has_section(section):
            violations.append(f"missing section [{section}]")
    lat = _lattice(_Reader(parser, 'lattice', violations))
    theta_source = _theta_source(_Reader(parser, 'theta', violations))
    initial = _initial(_Reader(parser, 'initial', violations))
    mode = _mode(_Reader(parser, 'mode', violations))
    output = _output(_Reader(parser, 'output', violations))
    if violations:
        raise ConfigError(violations)

    # θ syntax errors carry their own offsets; domain errors wait for evaluation.
    family, params = theta_source
    theta = parse_theta(params['src']) if family == 'expression' else builtin_theta(family, **params)
    if mode.lambda_star is not None:
        parse_expression(mode.lambda_star)
    logger.debug("loaded %s: %s, theta %s, mode %s", path, lat.describe(), theta.source, mode.name)
    return RunConfig(lattice=lat, theta=theta, initial=initial, mode=mode, output=output, source=path)
