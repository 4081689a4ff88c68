"""
framework/constants_store.py

Calibrated generic constants, one file per dimension.
Cache: framework/data/constants_n{n}.json
If the file exists, it is loaded from disk, no re-calibration needed.
Use --refresh in run.py (or the calibrate command) to recompute.

Every artifact carries the sha256 of the file it used.
"""

import hashlib
import json
from pathlib import Path
from typing import Optional

from framework.bound_engine import CONSTANT_NAMES, Constant, GenericConstants, Provenance
from framework.calibration import CONSTANT_FOR_LEMMA, SAMPLERS, calibrate_constant
from framework.errors import ConfigError

DATA_DIR = Path(__file__).parent / "data"


def constants_path(n: int, constants_dir: Optional[Path] = None) -> Path:
    return Path(constants_dir or DATA_DIR) / f"constants_n{n}.json"


def file_hash(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def calibrate_all(n: int, trials: int, seed: int, verbose: bool = True) -> tuple[GenericConstants, dict]:
    """
    Calibrate every constant that has a lemma in dimension n. Constants whose
    lemma never applies in this dimension are kept at 1 and marked unused.
    """
    values, unused = {}, []
    for lemma_id, name in CONSTANT_FOR_LEMMA.items():
        applies, _ = SAMPLERS[lemma_id]
        if not applies(n):
            values[name] = Constant(1.0, Provenance.EXPLICIT)
            unused.append(name)
            continue
        if verbose:
            print(f"  [Calibrate] n={n} {lemma_id:<16} ({trials} trials, seed {seed})")
        values[name] = Constant(calibrate_constant(lemma_id, trials, seed, n), Provenance.CALIBRATED)
        if verbose:
            print(f"              {name} = {values[name].value:.6g}")
    meta = {"n": n, "trials": trials, "seed": seed, "unused": unused}
    if n >= 3:
        meta["kernel_constant"] = calibrate_constant(f"kernel_n{n}", trials, seed)
        meta["log_derivative_constant"] = calibrate_constant(f"log_derivative_n{n}", trials, seed)
    return GenericConstants(**{name: values[name] for name in CONSTANT_NAMES}), meta


def save_constants(constants: GenericConstants, meta: dict, path: Path) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"meta": meta, "constants": constants.to_dict()}
    path.write_text(json.dumps(payload, indent=4, sort_keys=True), encoding="utf-8")
    return file_hash(path)


def read_constants(path: Path) -> GenericConstants:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"constants file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    return GenericConstants.from_dict(data.get("constants", data))


def get_constants(
    n: int,
    trials: int = 40,
    seed: int = 20240607,
    constants_dir: Optional[Path] = None,
    refresh: bool = False,
    override: Optional[Path] = None,
) -> tuple[GenericConstants, str]:
    """
    Get the generic constants for dimension n.
    An explicit override file wins; otherwise the cache is used or filled.

    Returns:
        (GenericConstants, sha256 of the file they came from)
    """
    if override is not None:
        print(f"  [Constants] Using {override}")
        return read_constants(override), file_hash(override)

    cache_path = constants_path(n, constants_dir)
    if cache_path.exists() and not refresh:
        print(f"  [Cache] Loading {cache_path.name}")
        return read_constants(cache_path), file_hash(cache_path)

    print(f"  [Constants] Calibrating constants for n={n}...")
    constants, meta = calibrate_all(n, trials, seed)
    digest = save_constants(constants, meta, cache_path)
    print(f"  [Saved] {cache_path} (sha256 {digest[:12]})")
    return constants, digest
