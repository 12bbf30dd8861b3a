"""Minting a copy-protected medium.

Each classical bit is hidden in a data qubit rotated by a secret angle, and
the angle itself is shipped as a key string of phase states
|t>, |2t>, ..., |2^(l-1) t> that lets a reader apply the rotation without
ever learning ``t``. A single-qubit hash state summarizes the whole key.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qsim

TWO_PI = 2 * np.pi
DEFAULT_KEY_LENGTH = 4
MAX_KEY_LENGTH = 32


def reduce_angle(theta):
    """Map angles into [0, 2*pi)."""
    theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    return np.where(theta >= TWO_PI, 0.0, theta)


def phase_key_state(theta) -> np.ndarray:
    """(e^{i t/2}|0> + e^{-i t/2}|1>)/sqrt(2), i.e. rotation_z(t)|+>."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise qsim.InvalidParameterError("angle must be finite")
    phase = np.exp(0.5j * theta) / np.sqrt(2)
    return np.stack([phase, np.conj(phase)], axis=-1)


def amplitude_angle_state(theta) -> np.ndarray:
    """cos t|0> + sin t|1>."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise qsim.InvalidParameterError("angle must be finite")
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1).astype(complex)


def encode_data_qubit(bit, theta) -> np.ndarray:
    """rotation_z(-t) H |bit>.

    Undoing it takes rotation_z(t) followed by H, after which a
    computational-basis measurement returns ``bit`` with certainty.
    """
    bit = np.asarray(bit)
    if not np.all((bit == 0) | (bit == 1)):
        raise qsim.InvalidParameterError(f"bits must be 0 or 1, got {bit!r}")
    frame = np.where(bit[..., None] == 0, qsim.PLUS, qsim.MINUS)
    return qsim.apply(frame, qsim.rotation_z(-np.asarray(theta, dtype=float)), [0])


def key_angles(theta, l: int) -> np.ndarray:
    """Angles 2^(j-1) t mod 2*pi for slots j = 1..l, on a trailing axis."""
    if not 1 <= l <= MAX_KEY_LENGTH:
        raise qsim.InvalidParameterError(f"key length must be in 1..{MAX_KEY_LENGTH}, got {l}")
    # doubling is exact in binary floating point; only the reduction rounds
    scale = 2.0 ** np.arange(l)
    return reduce_angle(np.asarray(theta, dtype=float)[..., None] * scale)


def make_key_string(theta, l: int) -> np.ndarray:
    """Key string for angle ``theta``: shape ``(..., l, 2)``."""
    return phase_key_state(key_angles(theta, l))


@dataclass(frozen=True)
class IssuerSecrets:
    bits: tuple[int, ...]
    thetas: np.ndarray
    l: int
    hash_input_state: np.ndarray = field(default_factory=lambda: qsim.PLUS.copy())

    def __post_init__(self):
        if len(self.bits) != len(self.thetas):
            raise ValueError("bits and thetas differ in length")
        thetas = np.asarray(self.thetas, dtype=float)
        if np.any((thetas < 0) | (thetas >= TWO_PI)):
            raise ValueError("secret angles must lie in [0, 2*pi)")

    @property
    def n(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class QuantumMedium:
    """The publicly distributed disk.

    Holds state descriptions only; the angles that produced them stay with the
    Issuer. Because it is a description, every consumer works on a freshly
    prepared copy of each state.
    """

    data: np.ndarray  # (n, 2)
    keys: np.ndarray  # (n, l, 2)
    hash_state: np.ndarray  # (2,)
    hash_input: np.ndarray  # (2,)

    def __post_init__(self):
        n = self.data.shape[0]
        if self.data.shape != (n, 2) or self.keys.ndim != 3 or self.keys.shape[::2] != (n, 2):
            raise qsim.DimensionError(
                f"inconsistent medium shapes: data {self.data.shape}, keys {self.keys.shape}"
            )
        if n < 1 or self.keys.shape[1] < 1:
            raise qsim.DimensionError("medium needs at least one position and one key slot")
        for name in ("data", "keys", "hash_state", "hash_input"):
            qsim.check_state(getattr(self, name))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def l(self) -> int:
        return self.keys.shape[1]

    def replace(self, **changes) -> "QuantumMedium":
        fields = dict(data=self.data, keys=self.keys, hash_state=self.hash_state,
                      hash_input=self.hash_input)
        fields.update(changes)
        return QuantumMedium(**{k: np.asarray(v, dtype=complex) for k, v in fields.items()})


def make_hash_state(secrets: IssuerSecrets) -> np.ndarray:
    """R_{t1} R_{t2} ... R_{tn} |d>, built from the Issuer's angle record."""
    out = np.asarray(secrets.hash_input_state, dtype=complex)
    for theta in secrets.thetas:
        out = qsim.apply(out, qsim.rotation_z(theta), [0])
    return out


def mint_medium(
    bits,
    l: int = DEFAULT_KEY_LENGTH,
    rng: np.random.Generator | None = None,
    *,
    thetas=None,
    hash_input=None,
) -> tuple[QuantumMedium, IssuerSecrets]:
    """Encrypt ``bits`` under fresh uniform angles and assemble the medium.

    ``thetas`` overrides the random draw (useful for degenerate test media).
    """
    bits = tuple(int(b) for b in bits)
    if not bits:
        raise qsim.InvalidParameterError("cannot mint an empty bit string")
    if thetas is None:
        if rng is None:
            raise ValueError("either rng or thetas is required")
        thetas = rng.uniform(0.0, TWO_PI, size=len(bits))
    thetas = reduce_angle(thetas)
    if thetas.shape != (len(bits),):
        raise qsim.DimensionError("need one angle per bit")
    hash_input = qsim.PLUS if hash_input is None else qsim.check_state(hash_input)
    if hash_input.shape != (2,):
        raise qsim.DimensionError("hash input must be a single qubit")

    secrets = IssuerSecrets(bits, thetas, l, hash_input.copy())
    medium = QuantumMedium(
        data=encode_data_qubit(np.array(bits), thetas),
        keys=make_key_string(thetas, l),
        hash_state=make_hash_state(secrets),
        hash_input=hash_input.copy(),
    )
    return medium, secrets
