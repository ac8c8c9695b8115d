"""Session configuration files (TOML)."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from qdcavity.adversary import CHANNELS, AttackKind, AttackModel
from qdcavity.cavity import BellState, EncodingOp
from qdcavity.protocol import BASIS_POLICIES, MessageBits, ProtocolConfig

DEFAULT_SEED = 20141103

_BELL_ALIASES = {
    "phiplus": BellState.PHI_PLUS, "phi+": BellState.PHI_PLUS, "φ+": BellState.PHI_PLUS,
    "phiminus": BellState.PHI_MINUS, "phi-": BellState.PHI_MINUS, "φ-": BellState.PHI_MINUS,
    "psiplus": BellState.PSI_PLUS, "psi+": BellState.PSI_PLUS, "ψ+": BellState.PSI_PLUS,
    "psiminus": BellState.PSI_MINUS, "psi-": BellState.PSI_MINUS, "ψ-": BellState.PSI_MINUS,
}

KNOWN_KEYS = {
    "n_message_pairs", "initial_states", "first_check_samples", "second_check_samples",
    "error_threshold", "seed", "attack", "alice_bits", "bob_bits", "first_check_basis",
    "decoy_basis", "randomize_initials",
}
ATTACK_KEYS = {"kind", "theta", "channel"}


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class SessionSpec:
    config: ProtocolConfig
    attack: AttackModel
    bits: MessageBits | None
    seed: int


def parse_bell(value: Any, key: str) -> BellState:
    if isinstance(value, str):
        found = _BELL_ALIASES.get(value.strip().lower())
        if found is not None:
            return found
    raise ConfigError(key, f"unknown Bell state {value!r}")


def _int(raw, key, minimum=0):
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(key, f"expected an integer >= {minimum}, got {v!r}")
    return v


def _bits_list(raw, key, n):
    v = raw[key]
    if not isinstance(v, list) or len(v) != n:
        raise ConfigError(key, f"expected a list of {n} two-bit strings")
    out = []
    for k, b in enumerate(v):
        try:
            out.append(EncodingOp(str(b)))
        except ValueError:
            raise ConfigError(f"{key}[{k}]", f"expected one of 00/01/10/11, got {b!r}") from None
    return out


def parse_attack(raw: Any) -> AttackModel:
    if raw is None:
        return AttackModel()
    if isinstance(raw, str):
        raw = {"kind": raw}
    if not isinstance(raw, dict):
        raise ConfigError("attack", "expected a table or a kind string")
    for k in raw:
        if k not in ATTACK_KEYS:
            raise ConfigError(f"attack.{k}", "unknown key")
    try:
        kind = AttackKind(str(raw.get("kind", "none")).lower())
    except ValueError:
        raise ConfigError("attack.kind", f"unknown attack {raw.get('kind')!r}") from None
    theta = raw.get("theta", 0.0)
    if isinstance(theta, bool) or not isinstance(theta, (int, float)) or not 0 <= theta <= math.pi / 2 + 1e-15:
        raise ConfigError("attack.theta", f"expected radians in [0, pi/2], got {theta!r}")
    channel = raw.get("channel", "first")
    if channel not in CHANNELS:
        raise ConfigError("attack.channel", f"expected one of {CHANNELS}, got {channel!r}")
    return AttackModel(kind, float(theta), channel)


def parse_config(raw: dict, seed_override: int | None = None) -> SessionSpec:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a table")
    for k in raw:
        if k not in KNOWN_KEYS:
            raise ConfigError(k, "unknown key")
    n = _int(raw, "n_message_pairs", 1) if "n_message_pairs" in raw else 1
    randomize = bool(raw.get("randomize_initials", False))
    initials = raw.get("initial_states")
    if initials is None:
        states = None
    elif isinstance(initials, str) and initials.lower() == "random":
        states, randomize = None, True
    elif isinstance(initials, list):
        if len(initials) != n:
            raise ConfigError("initial_states", f"expected {n} entries, got {len(initials)}")
        states = [parse_bell(v, f"initial_states[{k}]") for k, v in enumerate(initials)]
    else:
        raise ConfigError("initial_states", "expected a list of Bell state names or 'random'")
    first = _int(raw, "first_check_samples") if "first_check_samples" in raw else None
    second = _int(raw, "second_check_samples") if "second_check_samples" in raw else None
    thr = raw.get("error_threshold", 0.0)
    if isinstance(thr, bool) or not isinstance(thr, (int, float)) or not 0 <= thr <= 1:
        raise ConfigError("error_threshold", f"expected a number in [0, 1], got {thr!r}")
    for key in ("first_check_basis", "decoy_basis"):
        if raw.get(key, "random") not in BASIS_POLICIES:
            raise ConfigError(key, f"expected one of {BASIS_POLICIES}")
    if seed_override is not None:
        seed = seed_override
    elif "seed" in raw:
        seed = _int(raw, "seed")
    else:
        seed = DEFAULT_SEED
    bits = None
    if "alice_bits" in raw or "bob_bits" in raw:
        if not ("alice_bits" in raw and "bob_bits" in raw):
            raise ConfigError("alice_bits" if "alice_bits" not in raw else "bob_bits", "both message lists are required")
        bits = MessageBits(_bits_list(raw, "alice_bits", n), _bits_list(raw, "bob_bits", n))
    cfg = ProtocolConfig(
        n_message_pairs=n,
        initial_states=states,
        first_check_samples=first,
        second_check_samples=second,
        error_threshold=float(thr),
        rng_seed=seed,
        first_check_basis=raw.get("first_check_basis", "random"),
        decoy_basis=raw.get("decoy_basis", "random"),
        randomize_initials=randomize,
    )
    return SessionSpec(cfg, parse_attack(raw.get("attack")), bits, seed)


def load_config(path: str | Path, seed_override: int | None = None) -> SessionSpec:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(str(path), "file not found") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(path), f"invalid TOML: {exc}") from None
    return parse_config(raw, seed_override)
