import os
from typing import Tuple

from dotenv import load_dotenv

if os.getenv("ENV") != "production":
    load_dotenv(override=True)


def _parse_primes(raw: str) -> Tuple[int, ...]:
    return tuple(int(part) for part in raw.split(",") if part.strip())


DEFAULT_SEED = int(os.getenv("HOLONOMY_SEED", "0"))

# split search
SPLIT_ATTEMPTS = int(os.getenv("HOLONOMY_SPLIT_ATTEMPTS", "32"))
MODULE_ATTEMPTS = int(os.getenv("HOLONOMY_MODULE_ATTEMPTS", "64"))
INVOLUTION_SEARCH_LIMIT = int(os.getenv("HOLONOMY_INVOLUTION_LIMIT", str(3 ** 8)))
COEFFICIENT_RANGE = int(os.getenv("HOLONOMY_COEFFICIENT_RANGE", "3"))

# oracle
ORACLE_PRIMES = _parse_primes(os.getenv("HOLONOMY_ORACLE_PRIMES", "5,7,11"))
ORACLE_SEARCH_BOUND = int(os.getenv("HOLONOMY_ORACLE_BOUND", str(10 ** 7)))
ORACLE_SUBSPACE_BOUND = int(os.getenv("HOLONOMY_ORACLE_SUBSPACE_BOUND", str(10 ** 5)))
ORACLE_WITNESS_CAP = int(os.getenv("HOLONOMY_ORACLE_WITNESS_CAP", "16"))

FACTOR_WORD_LENGTH = int(os.getenv("HOLONOMY_FACTOR_WORD_LENGTH", "3"))

LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING")
