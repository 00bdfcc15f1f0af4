"""Run configuration: a sectioned key-value file with strictly validated keys.

Unknown sections or keys are hard errors — reproducibility over flexibility.
The built-in default configuration drives the full reproduction suite.
"""

import configparser
import io
import math
import re

from .core import GenfunError, GenNumber
from .asymptotics import EpsilonGrid

DEFAULT_CONFIG_TEXT = """\
[mollifier]
kind = bump
radius = 1.0

[grid]
eps0 = 0.125
ratio = 0.5
count = 10

[suite]
count = 6
seed = 1

[tolerances]
identity = 1e-11
sweep = 1e-9
association = 1e-8

[reproduce]
mollifiers = bump, cosine_power, truncated_gaussian
power_identity_max = 6

[output]
dir = out
figures = true

[qft:rabi]
dimension = 2
omega = 0.0
potential = 0, 1
coupling = 1.0
couplings = 0.3, 0.7, 1.0, 1.3
times = 0.2, 0.6, 1.1, 1.6, 2.0
initial = 0
final = 1
expect_rabi = true

[qft:rabi_series]
dimension = 2
omega = 0.0
potential = 0, 1
coupling = 0.1
time = 1.0
initial = 0
final = 1
dyson_orders = 4
dyson_steps = 2000
expect_order4_match = true

[qft:quartic_strong]
dimension = 20
omega = 1.0
potential = 0, 0, 0, 0, 1
coupling = 0.8
time = 1.0
initial = 0
final = 2
dyson_orders = 12
dyson_steps = 10000
expect_divergence = true

[qft:quartic_truncation]
dimension = 8
omega = 1.0
potential = 0, 0, 0, 0, 1
coupling = 0.2
time = 1.0
initial = 0
final = 2
dims = 8, 12, 16, 20, 24, 28

[qft:phase_sweep]
dimension = 8
omega = 1.0
potential = 0, 1
coupling = 0.4
counterterm = log(1/eps)
time = 1.0
initial = 0
final = 1
sweep = true
expect_constant_in_eps = true

[qft:growing_coupling]
dimension = 12
omega = 1.0
potential = 0, 0, 0, 0, 1
coupling = 0.05*log(1/eps)
time = 1.0
initial = 0
final = 2
sweep = true
"""

_MOLLIFIER_KEYS = {"kind", "radius", "skew", "exponent", "sigma"}
_GRID_KEYS = {"eps0", "ratio", "count"}
_SUITE_KEYS = {"count", "seed"}
_TOL_KEYS = {"identity", "sweep", "association"}
_REPRODUCE_KEYS = {"mollifiers", "power_identity_max"}
_OUTPUT_KEYS = {"dir", "figures"}
_QFT_KEYS = {
    "dimension", "omega", "potential", "coupling", "couplings", "counterterm",
    "time", "times", "initial", "final", "epsilon", "sweep", "dims",
    "dyson_orders", "dyson_steps",
    "expect_rabi", "expect_divergence", "expect_order4_match",
    "expect_constant_in_eps",
}


class ConfigError(GenfunError):
    """Invalid configuration file or command-line parameters."""


def coupling_from_string(text):
    """Parse a coupling/counterterm specification into a GenNumber.

    Accepted forms: a float literal, ``[A*]log(1/eps)``, ``[A*]eps^P``.
    """
    text = text.strip()
    try:
        return GenNumber.constant(float(text))
    except ValueError:
        pass
    m = re.fullmatch(r"(?:([-+0-9.eE]+)\s*\*\s*)?log\(1/eps\)", text)
    if m:
        amp = float(m.group(1)) if m.group(1) else 1.0
        return GenNumber(lambda e: amp * math.log(1.0 / e),
                         f"{amp:g}*log(1/eps)")
    m = re.fullmatch(r"(?:([-+0-9.eE]+)\s*\*\s*)?eps\^([-+0-9.eE]+)", text)
    if m:
        amp = float(m.group(1)) if m.group(1) else 1.0
        power = float(m.group(2))
        return GenNumber(lambda e: amp * e ** power, f"{amp:g}*eps^{power:g}")
    raise ConfigError(
        f"cannot parse coupling {text!r}; expected a float, "
        "'A*log(1/eps)' or 'A*eps^P'"
    )


def _floats(text):
    return tuple(float(p) for p in text.split(","))


def _ints(text):
    return tuple(int(p) for p in text.split(","))


class MollifierConfig:
    __slots__ = ("kind", "params")

    def __init__(self, kind, params):
        self.kind = kind
        self.params = dict(params)

    def build(self):
        from .embedding import make_mollifier

        return make_mollifier(self.kind, **self.params)


class QftBlock:
    """One problem block of the qft command."""

    __slots__ = (
        "name", "dimension", "omega", "potential", "coupling", "coupling_text",
        "couplings", "counterterm", "time", "times", "initial", "final",
        "epsilon", "sweep", "dims", "dyson_orders", "dyson_steps",
        "expect_rabi", "expect_divergence", "expect_order4_match",
        "expect_constant_in_eps",
    )

    def __init__(self, name, section):
        unknown = set(section) - _QFT_KEYS
        if unknown:
            raise ConfigError(f"unknown keys in [qft:{name}]: {sorted(unknown)}")
        self.name = name
        try:
            self.dimension = int(section["dimension"])
            self.omega = float(section["omega"])
            self.potential = _floats(section["potential"])
            self.coupling_text = section.get("coupling", "1.0")
            self.coupling = coupling_from_string(self.coupling_text)
            self.couplings = (_floats(section["couplings"])
                              if "couplings" in section else None)
            self.counterterm = (coupling_from_string(section["counterterm"])
                                if "counterterm" in section else None)
            self.time = float(section.get("time", 1.0))
            self.times = _floats(section["times"]) if "times" in section else None
            self.initial = int(section["initial"])
            self.final = int(section["final"])
            self.epsilon = float(section.get("epsilon", 2.0 ** -6))
            self.sweep = section.get("sweep", "false").lower() == "true"
            self.dims = _ints(section["dims"]) if "dims" in section else None
            self.dyson_orders = (int(section["dyson_orders"])
                                 if "dyson_orders" in section else None)
            self.dyson_steps = int(section.get("dyson_steps", 10000))
            self.expect_rabi = section.get("expect_rabi", "false").lower() == "true"
            self.expect_divergence = (
                section.get("expect_divergence", "false").lower() == "true")
            self.expect_order4_match = (
                section.get("expect_order4_match", "false").lower() == "true")
            self.expect_constant_in_eps = (
                section.get("expect_constant_in_eps", "false").lower() == "true")
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"invalid [qft:{name}] block: {exc}") from exc


class RunConfig:
    """Validated configuration for all CLI commands."""

    __slots__ = (
        "mollifier", "reproduce_mollifiers", "power_identity_max", "grid",
        "suite_count", "suite_seed", "tol_identity", "tol_sweep",
        "tol_association", "out_dir", "figures", "qft_blocks",
    )

    def __init__(self):
        # Populated by load_config; attribute defaults keep construction simple.
        self.qft_blocks = []


def _mollifier_config(kind, raw_params):
    params = {}
    for key, value in raw_params.items():
        if key == "kind":
            continue
        if key == "exponent":
            params[key] = int(value)
        else:
            params[key] = float(value)
    return MollifierConfig(kind, params)


def load_config(text):
    """Parse and validate configuration text into a :class:`RunConfig`."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc

    known_plain = {"mollifier", "grid", "suite", "tolerances", "reproduce", "output"}
    cfg = RunConfig()
    for name in parser.sections():
        if name in known_plain:
            continue
        if name.startswith("qft:"):
            continue
        raise ConfigError(f"unknown section [{name}]")

    def section(name, allowed):
        if not parser.has_section(name):
            return {}
        items = dict(parser.items(name))
        unknown = set(items) - allowed
        if unknown:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
        return items

    try:
        mol = section("mollifier", _MOLLIFIER_KEYS)
        cfg.mollifier = _mollifier_config(mol.get("kind", "bump"), mol)

        grid = section("grid", _GRID_KEYS)
        cfg.grid = EpsilonGrid(
            eps0=float(grid.get("eps0", 0.125)),
            ratio=float(grid.get("ratio", 0.5)),
            count=int(grid.get("count", 10)),
        )

        suite = section("suite", _SUITE_KEYS)
        cfg.suite_count = int(suite.get("count", 6))
        cfg.suite_seed = int(suite.get("seed", 1))

        tols = section("tolerances", _TOL_KEYS)
        cfg.tol_identity = float(tols.get("identity", 1e-11))
        cfg.tol_sweep = float(tols.get("sweep", 1e-9))
        cfg.tol_association = float(tols.get("association", 1e-8))

        rep = section("reproduce", _REPRODUCE_KEYS)
        kinds = [k.strip() for k in
                 rep.get("mollifiers", "bump, cosine_power, truncated_gaussian").split(",")]
        cfg.reproduce_mollifiers = tuple(MollifierConfig(k, {}) for k in kinds)
        cfg.power_identity_max = int(rep.get("power_identity_max", 6))

        out = section("output", _OUTPUT_KEYS)
        cfg.out_dir = out.get("dir", "out")
        cfg.figures = out.get("figures", "true").lower() == "true"
    except ValueError as exc:
        raise ConfigError(f"invalid configuration value: {exc}") from exc

    for name in parser.sections():
        if name.startswith("qft:"):
            cfg.qft_blocks.append(QftBlock(name[4:], dict(parser.items(name))))
    return cfg


def default_config():
    return load_config(DEFAULT_CONFIG_TEXT)


def apply_overrides(cfg, args):
    """Apply --out/--seed/--grid/--mollifier command-line overrides."""
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    if getattr(args, "seed", None) is not None:
        cfg.suite_seed = args.seed
    if getattr(args, "grid", None):
        parts = args.grid.split(",")
        if len(parts) != 3:
            raise ConfigError("--grid expects eps0,ratio,count")
        try:
            cfg.grid = EpsilonGrid(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise ConfigError(f"invalid --grid: {exc}") from exc
    if getattr(args, "mollifier", None):
        cfg.mollifier = parse_mollifier_flag(args.mollifier)
    if getattr(args, "no_figures", False):
        cfg.figures = False
    return cfg


def parse_mollifier_flag(text):
    """Parse ``kind[:key=value,...]`` from the --mollifier flag."""
    kind, _, rest = text.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"malformed mollifier parameter {item!r}")
            params[key.strip()] = value.strip()
    return _mollifier_config(kind.strip(), params)
