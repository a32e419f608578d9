"""Scenario files: one TOML document holding every model input.

Sections: ``[simulation]``, ``[resources]``, ``[inventory]``, ``[durations]``,
``[network]``, ``[policy]``, ``[generator]``, ``[schedule]`` and
``[optimizer]``.  Any key left out takes the built-in default, so an empty
file is a valid scenario.  Relative paths resolve against the scenario file's
directory, then against the packaged data directory.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .domain import BASELINE_INVENTORY, HospitalModel, Resources
from .durations import DEFAULT_TABLE, SERVICES, DurationTable, canonical_service
from .network import GuidedPathNetwork
from .policy import PolicyKind, PolicyParams, hhmm, parse_hhmm
from .schedule import WEEKDAYS, GeneratorConfig, ScheduleRecord, format_schedule, generate_schedule, load_schedule, weekday_means
from .stochastic import DistributionError

DATA_DIR = Path(__file__).parent / "data"
DEFAULT_SCENARIO = DATA_DIR / "default_scenario.toml"


class ConfigError(ValueError):
    """Invalid scenario configuration."""


@dataclass(frozen=True)
class SimulationSettings:
    seed: int = 20180911
    replications: int = 30
    agvs: int = 6
    policy: PolicyKind = PolicyKind.CURRENT
    warmup_days: int = 1
    days: int = 7
    drain_days: int = 2


@dataclass(frozen=True)
class OptimizerSettings:
    delta: float = 3.0  # target mean delay, minutes per surgery
    alpha: float = 0.05
    replications: int = 30
    exhaustive: bool = False


_RESOURCE_KEYS = {  # scenario key -> Resources field
    "ors": "n_ors", "case_carts": "carts", "loaders": "loaders", "loader_delay": "loader_delay",
    "cart_washers": "cart_washers", "cart_wash_min": "cart_wash", "instrument_wash_min": "instrument_wash",
    "handling_min": "handling", "ccsa_to_or_min": "ccsa_to_or", "transfer_by_agv": "transfer_by_agv",
    "transfer_lead_min": "transfer_lead", "cssd_to_md_min": "cssd_to_md", "min_duration_min": "min_duration",
    "stall_timeout_min": "stall_timeout",
}
_POLICY_TIMES = ("current_batch", "twobatch_evening", "twobatch_morning", "morning_cutoff")


def _check_keys(section: str, data: dict, allowed) -> None:
    extra = sorted(set(data) - set(allowed))
    if extra:
        raise ConfigError(f"[{section}] unknown keys {extra}")


def _resolve(base: Path | None, name: str) -> Path:
    p = Path(name)
    if p.is_absolute():
        return p
    if base is not None and (base / p).exists():
        return base / p
    return DATA_DIR / p


@dataclass
class Scenario:
    sim: SimulationSettings = field(default_factory=SimulationSettings)
    resources: Resources = field(default_factory=Resources)
    inventory: dict[str, int] = field(default_factory=lambda: dict(BASELINE_INVENTORY))
    durations: DurationTable = field(default_factory=DurationTable)
    network_path: Path = DATA_DIR / "default_network.toml"
    policy_params: PolicyParams = field(default_factory=PolicyParams)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    schedule_path: Path | None = None
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    source: str = "<defaults>"
    _network: GuidedPathNetwork | None = field(default=None, repr=False)
    _schedule: list[ScheduleRecord] | None = field(default=None, repr=False)

    # -- loading ------------------------------------------------------------
    @classmethod
    def load(cls, path: str | Path | None = None) -> "Scenario":
        path = Path(path) if path is not None else DEFAULT_SCENARIO
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read scenario {path}: {e.strerror}") from None
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from None
        return cls.from_dict(data, base=path.parent, source=str(path))

    @classmethod
    def from_dict(cls, data: dict, base: Path | None = None, source: str = "<dict>") -> "Scenario":
        _check_keys("scenario", data, ("simulation", "resources", "inventory", "durations", "network", "policy",
                                       "generator", "schedule", "optimizer"))
        try:
            return cls._build(data, base, source)
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError, DistributionError) as e:
            raise ConfigError(f"{source}: {e}") from None

    @classmethod
    def _build(cls, data: dict, base: Path | None, source: str) -> "Scenario":
        s = data.get("simulation", {})
        _check_keys("simulation", s, [f.name for f in dataclasses.fields(SimulationSettings)])
        sim = SimulationSettings(**{**s, "policy": PolicyKind.parse(s.get("policy", "current"))})
        if sim.replications < 1 or sim.agvs < 1:
            raise ConfigError("replications and agvs must be at least 1")
        if sim.warmup_days < 0 or sim.days < 1 or sim.drain_days < 0:
            raise ConfigError("need warmup_days >= 0, days >= 1, drain_days >= 0")

        r = data.get("resources", {})
        _check_keys("resources", r, _RESOURCE_KEYS)
        resources = Resources(**{_RESOURCE_KEYS[k]: v for k, v in r.items()})
        resources.validate()

        inv = dict(BASELINE_INVENTORY)
        for k, v in data.get("inventory", {}).items():
            inv[canonical_service(k)] = int(v)
        if any(v < 1 for v in inv.values()):
            raise ConfigError("every inventory level must be at least 1")

        table = {k: list(v) for k, v in DEFAULT_TABLE.items()}
        for k, rows in data.get("durations", {}).items():
            table[canonical_service(k)] = [tuple(row) for row in rows]
        durations = DurationTable(table)

        n = data.get("network", {})
        _check_keys("network", n, ("file",))
        network_path = _resolve(base, n.get("file", "default_network.toml"))

        p = data.get("policy", {})
        _check_keys("policy", p, (*_POLICY_TIMES, "jit_interval_min"))
        kw = {k: parse_hhmm(p[k]) for k in _POLICY_TIMES if k in p}
        if "jit_interval_min" in p:
            kw["jit_interval"] = float(p["jit_interval_min"])
        params = PolicyParams(**kw)

        g = data.get("generator", {})
        _check_keys("generator", g, ("seed", "first_weekday", "window", "grid_min", "turnover_min", "means"))
        means = weekday_means()
        for k, v in g.get("means", {}).items():
            means[canonical_service(k)] = tuple(float(x) for x in v)
        first = g.get("first_weekday", "Monday")
        if first not in WEEKDAYS:
            raise ConfigError(f"first_weekday must be one of {WEEKDAYS}")
        window = tuple(parse_hhmm(x) for x in g.get("window", ("06:00", "15:00")))
        gen = GeneratorConfig(means=means, window=window, days=sim.warmup_days + sim.days,
                              seed=int(g.get("seed", sim.seed)), first_weekday=WEEKDAYS.index(first),
                              grid=float(g.get("grid_min", 15.0)), n_ors=resources.n_ors,
                              turnover=float(g.get("turnover_min", 0.0)), durations=durations)
        gen.validate()

        sch = data.get("schedule", {})
        _check_keys("schedule", sch, ("file",))
        schedule_path = _resolve(base, sch["file"]) if "file" in sch else None

        o = data.get("optimizer", {})
        _check_keys("optimizer", o, ("delta_min", "alpha", "replications", "exhaustive"))
        opt = OptimizerSettings(float(o.get("delta_min", 3.0)), float(o.get("alpha", 0.05)),
                                int(o.get("replications", 30)), bool(o.get("exhaustive", False)))
        if opt.delta < 0 or not 0 < opt.alpha < 1 or opt.replications < 2:
            raise ConfigError("optimizer needs delta_min >= 0, 0 < alpha < 1, replications >= 2")
        return cls(sim, resources, inv, durations, network_path, params, gen, schedule_path, opt, source)

    def with_overrides(self, **kw) -> "Scenario":
        """Copy with simulation settings replaced (policy, agvs, seed, ...)."""
        sim = dataclasses.replace(self.sim, **{k: v for k, v in kw.items() if v is not None})
        return dataclasses.replace(self, sim=sim, _network=self._network, _schedule=self._schedule)

    # -- derived inputs -------------------------------------------------------
    @property
    def network(self) -> GuidedPathNetwork:
        if self._network is None:
            self._network = GuidedPathNetwork.load(self.network_path)
        return self._network

    @property
    def schedule(self) -> list[ScheduleRecord]:
        if self._schedule is None:
            if self.schedule_path is not None:
                self._schedule = load_schedule(self.schedule_path)
            else:
                self._schedule = generate_schedule(self.generator)
        return self._schedule

    def inventory_vector(self) -> tuple[int, ...]:
        return tuple(self.inventory[s] for s in SERVICES)

    def build_model(self, policy: PolicyKind | None = None, agvs: int | None = None,
                    inventory: dict[str, int] | None = None, **kw) -> HospitalModel:
        return HospitalModel(self.schedule, self.network, policy or self.sim.policy, agvs or self.sim.agvs,
                             dict(inventory or self.inventory), self.resources, self.policy_params,
                             self.durations, self.sim.warmup_days, self.sim.drain_days, **kw)

    # -- identity -------------------------------------------------------------
    def canonical(self) -> dict:
        """Resolved configuration as plain data (used for hashing and metadata)."""
        res = dataclasses.asdict(self.resources)
        return {
            "simulation": {**dataclasses.asdict(self.sim), "policy": self.sim.policy.value},
            "resources": res,
            "inventory": {s: self.inventory[s] for s in SERVICES},
            "durations": self.durations.expressions(),
            "policy": {**{k: hhmm(getattr(self.policy_params, k)) for k in _POLICY_TIMES},
                       "jit_interval_min": self.policy_params.jit_interval},
            "optimizer": dataclasses.asdict(self.optimizer),
        }

    def config_hash(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self.canonical(), sort_keys=True).encode())
        h.update(self.network_path.read_bytes())
        h.update(format_schedule(self.schedule).encode())
        return h.hexdigest()[:16]
