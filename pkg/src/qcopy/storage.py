"""JSON files for media, Issuer secrets and verdicts.

Amplitudes are written as ``[re, im]`` pairs. Python's float repr is the
shortest decimal that reads back to the same double, so a load/dump cycle is
bit-exact.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import qsim
from .issuer import IssuerSecrets, QuantumMedium

FORMAT_VERSION = 1


class MediumFormatError(ValueError):
    """A medium or secrets document is malformed or fails validation."""


def _amps(state) -> list:
    state = np.asarray(state, dtype=complex)
    return [[float(a.real), float(a.imag)] for a in state]


def _state(obj, what: str) -> np.ndarray:
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MediumFormatError(f"{what}: amplitudes must be [re, im] number pairs") from exc
    if arr.shape != (2, 2):
        raise MediumFormatError(f"{what}: expected two [re, im] amplitudes, got shape {arr.shape}")
    state = arr[:, 0] + 1j * arr[:, 1]
    try:
        return qsim.check_state(state)
    except ValueError as exc:
        raise MediumFormatError(f"{what}: {exc}") from exc


def _check_version(doc, what: str):
    if not isinstance(doc, dict):
        raise MediumFormatError(f"{what} must be a JSON object")
    if doc.get("version") != FORMAT_VERSION:
        raise MediumFormatError(f"unsupported {what} version {doc.get('version')!r}")


def medium_to_dict(medium: QuantumMedium) -> dict:
    return {
        "version": FORMAT_VERSION,
        "n": medium.n,
        "l": medium.l,
        "data": [_amps(d) for d in medium.data],
        "keys": [[_amps(slot) for slot in key] for key in medium.keys],
        "hash": _amps(medium.hash_state),
        "hash_input": _amps(medium.hash_input),
    }


def medium_from_dict(doc) -> QuantumMedium:
    _check_version(doc, "medium")
    try:
        n, l = int(doc["n"]), int(doc["l"])
        data, keys = doc["data"], doc["keys"]
        hash_state, hash_input = doc["hash"], doc["hash_input"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MediumFormatError(f"medium is missing a field: {exc}") from exc
    if n < 1 or l < 1 or len(data) != n or len(keys) != n:
        raise MediumFormatError("medium 'n' does not match its data/keys")
    if any(not isinstance(k, list) or len(k) != l for k in keys):
        raise MediumFormatError("every key string must hold exactly 'l' slots")
    return QuantumMedium(
        data=np.array([_state(d, f"data[{i}]") for i, d in enumerate(data)]),
        keys=np.array([[_state(s, f"keys[{i}][{j}]") for j, s in enumerate(k)]
                       for i, k in enumerate(keys)]),
        hash_state=_state(hash_state, "hash"),
        hash_input=_state(hash_input, "hash_input"),
    )


def secrets_to_dict(secrets: IssuerSecrets) -> dict:
    return {
        "version": FORMAT_VERSION,
        "bits": list(secrets.bits),
        "thetas": [float(t) for t in secrets.thetas],
        "hash_input": _amps(secrets.hash_input_state),
    }


def secrets_from_dict(doc, medium: QuantumMedium) -> IssuerSecrets:
    """Rebuild the Issuer's record; ``l`` comes from the matching medium.

    The verification qubit is read from the secrets document (|+> if absent),
    never from the medium, which may be a pirate's copy.
    """
    _check_version(doc, "secrets")
    try:
        bits = tuple(int(b) for b in doc["bits"])
        thetas = np.array(doc["thetas"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise MediumFormatError(f"bad secrets document: {exc}") from exc
    if any(b not in (0, 1) for b in bits) or thetas.shape != (len(bits),):
        raise MediumFormatError("secrets need one 0/1 bit and one angle per position")
    hash_input = _state(doc["hash_input"], "hash_input") if "hash_input" in doc else qsim.PLUS
    if len(bits) != medium.n:
        raise MediumFormatError(f"secrets cover {len(bits)} positions, medium has {medium.n}")
    try:
        return IssuerSecrets(bits, thetas, medium.l, hash_input.copy())
    except ValueError as exc:
        raise MediumFormatError(str(exc)) from exc


def dumps(doc) -> str:
    return json.dumps(doc, indent=1) + "\n"


def save_medium(medium: QuantumMedium, path) -> None:
    Path(path).write_text(dumps(medium_to_dict(medium)))


def load_medium(path) -> QuantumMedium:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MediumFormatError(f"{path}: not valid JSON ({exc})") from exc
    return medium_from_dict(doc)


def save_secrets(secrets: IssuerSecrets, path) -> None:
    Path(path).write_text(dumps(secrets_to_dict(secrets)))


def load_secrets(path, medium: QuantumMedium) -> IssuerSecrets:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MediumFormatError(f"{path}: not valid JSON ({exc})") from exc
    return secrets_from_dict(doc, medium)
