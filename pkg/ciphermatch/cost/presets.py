from ciphermatch.core.errors import ParameterError
from ciphermatch.models.workload import GIB, Workload

DNA_QUERY_BITS: tuple[int, ...] = (16, 32, 64, 128, 256)
DNA_DB_BYTES = 128 * GIB

DBSEARCH_DB_GIB: tuple[int, ...] = (8, 16, 32, 64, 128)
DBSEARCH_QUERIES = 1000
DBSEARCH_QUERY_BITS = 16


def dna_workloads() -> list[Workload]:
    """One query against a 128 GiB encrypted genome, 16 to 256 query bits."""
    return [Workload(DNA_DB_BYTES, bits, 1) for bits in DNA_QUERY_BITS]


def dbsearch_workloads() -> list[Workload]:
    """A thousand 16-bit queries over encrypted databases of 8 to 128 GiB."""
    return [Workload(size * GIB, DBSEARCH_QUERY_BITS, DBSEARCH_QUERIES) for size in DBSEARCH_DB_GIB]


PRESETS = {
    "dna": dna_workloads,
    "dbsearch": dbsearch_workloads,
}


def preset_workloads(name: str) -> list[Workload]:
    try:
        return PRESETS[name]()
    except KeyError as e:
        raise ParameterError(f"unknown workload preset {name!r}, expected one of {', '.join(PRESETS)}") from e
