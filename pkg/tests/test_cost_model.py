import json

import pytest

from ciphermatch.core.errors import FormatError, MissingInputError, ParameterError
from ciphermatch.cost.config import CostConfig, DramConfig, NandTimingParams, SsdTopology, load_cost_config
from ciphermatch.cost.cost_model import (
    PUBLISHED_T_BIT_ADD_NS,
    SWEEP_COLUMNS,
    SystemId,
    cost,
    e_bit_add,
    e_bop_add,
    enumerate_ifp_latency,
    ifp_passes,
    overlap_report,
    published_ledger,
    sweep,
    t_bit_add,
    t_bop_add,
)
from ciphermatch.cost.presets import dbsearch_workloads, dna_workloads, preset_workloads
from ciphermatch.models.workload import GIB, Workload


def latency(system: SystemId, workload: Workload, config: CostConfig | None = None) -> float:
    return cost(system, workload, config).total_latency_ns


def test_step_latency_and_energy():
    nand = NandTimingParams()

    assert t_bop_add(nand) == pytest.approx(22_740.0)
    assert t_bit_add(nand) == pytest.approx(29_340.0)
    assert e_bop_add(nand, 4096) == pytest.approx(21_020.0)
    assert e_bit_add(nand, 4096) == pytest.approx(36_512.0)


def test_ledger_reports_published_values():
    ledger = published_ledger()

    assert ledger["t_bit_add_ns"]["published"] == PUBLISHED_T_BIT_ADD_NS
    assert ledger["t_bit_add_ns"]["computed"] == pytest.approx(29_340.0)
    assert ledger["and_or_per_step"]["computed"] == 3.0


def test_controller_work_hides_under_flash_reads():
    report = overlap_report()

    assert report["transposition"]["overlapped"]
    assert report["index_gen"]["overlapped"]


def test_parallel_bitlines_of_the_default_drive():
    assert SsdTopology().parallel_bitlines == 8 * 8 * 2 * 32768
    assert ifp_passes(128 * GIB // 4, SsdTopology()) == 8192


def test_ifp_compute_for_a_16_bit_dna_query():
    w = Workload(128 * GIB, 16)
    breakdown = cost(SystemId.CM_IFP, w)

    assert breakdown.phases["compute"].latency_ns == pytest.approx(16 * 8192 * 32 * 29_340.0)
    assert breakdown.phases["storage_read"].latency_ns == 0


@pytest.mark.parametrize("workload", dna_workloads() + dbsearch_workloads(), ids=lambda w: f"{w.encrypted_db_bytes // GIB}G-{w.query_bits}b-{w.num_queries}q")
def test_in_flash_beats_software_and_in_ssd_dram(workload):
    ifp = latency(SystemId.CM_IFP, workload)

    assert ifp < latency(SystemId.CM_SW, workload)
    assert ifp < latency(SystemId.CM_PUM_SSD, workload)


@pytest.mark.parametrize("workload", dna_workloads() + dbsearch_workloads(), ids=lambda w: f"{w.encrypted_db_bytes // GIB}G-{w.query_bits}b-{w.num_queries}q")
def test_in_flash_uses_the_least_energy(workload):
    energy = {system: cost(system, workload).total_energy_nj for system in SystemId}

    assert min(energy, key=energy.get) is SystemId.CM_IFP
    assert max(energy, key=energy.get) is SystemId.CM_SW


def test_in_ssd_dram_saves_energy_over_host_dram_on_dna():
    for w in dna_workloads():
        assert cost(SystemId.CM_PUM_SSD, w).total_energy_nj < cost(SystemId.CM_PUM, w).total_energy_nj


def test_dram_background_power_is_charged_over_compute_time():
    w = Workload(GIB, 16)
    quiet = CostConfig(dram=DramConfig(background_power_w=0.0))
    loud = CostConfig(dram=DramConfig(background_power_w=2.0))

    compute = cost(SystemId.CM_PUM, w, loud).phases["compute"]
    extra = compute.energy_nj - cost(SystemId.CM_PUM, w, quiet).phases["compute"].energy_nj

    assert extra == pytest.approx(2.0 * compute.latency_ns)


def test_in_flash_speedup_shrinks_with_query_size():
    table = sweep(dna_workloads(), [SystemId.CM_IFP])
    speedups = table["speedup_vs_cmsw"].tolist()

    assert all(later <= earlier for earlier, later in zip(speedups, speedups[1:]))


def test_dna_crossover_between_flash_and_dram():
    short, long = Workload(128 * GIB, 16), Workload(128 * GIB, 256)

    assert latency(SystemId.CM_IFP, short) < latency(SystemId.CM_PUM, short)
    assert latency(SystemId.CM_PUM, long) < latency(SystemId.CM_IFP, long)


def test_dbsearch_flash_wins_once_the_database_leaves_dram():
    for w in dbsearch_workloads():
        if w.encrypted_db_bytes > 32 * GIB:
            assert latency(SystemId.CM_IFP, w) < latency(SystemId.CM_PUM, w)


def test_software_reloads_a_database_larger_than_dram():
    resident = cost(SystemId.CM_SW, Workload(16 * GIB, 16, num_queries=10))
    streamed = cost(SystemId.CM_SW, Workload(64 * GIB, 16, num_queries=10))

    per_load = 16 * GIB / 9.6e9 * 1e9
    assert resident.phases["storage_read"].latency_ns == pytest.approx(per_load)
    assert streamed.phases["storage_read"].latency_ns == pytest.approx(4 * 10 * per_load)


def test_empty_workload_costs_nothing():
    breakdown = cost(SystemId.CM_IFP, Workload(0, 16))

    assert breakdown.total_latency_ns == 0
    assert breakdown.total_energy_nj == 0


def test_unknown_system_is_rejected():
    with pytest.raises(ParameterError):
        cost("CM-GPU", Workload(GIB, 16))


def test_breakdown_lists_every_phase():
    data = cost(SystemId.CM_SW, Workload(GIB, 16)).as_dict()

    assert set(data["phases"]) == {"storage_read", "io_transfer", "dram_transfer", "compute", "index_gen"}
    assert data["latency_ns"] == pytest.approx(sum(p["latency_ns"] for p in data["phases"].values()))
    assert data["assumptions"]


def test_enumeration_agrees_with_closed_form_on_a_small_drive():
    config = CostConfig(ssd=SsdTopology(channels=2, dies_per_channel=1, planes_per_die=2, page_bytes=64))
    for words in (1, 511, 512, 513, 2048, 5000):
        w = Workload(words * 4, 16, num_queries=3)
        assert enumerate_ifp_latency(w, config) == pytest.approx(cost(SystemId.CM_IFP, w, config).phases["compute"].latency_ns)


def test_sweep_table_layout():
    table = sweep(dna_workloads(), list(SystemId))

    assert list(table.columns) == SWEEP_COLUMNS
    assert len(table) == 5 * 4
    assert (table[table["system"] == "CM-SW"]["speedup_vs_cmsw"] == 1.0).all()


def test_presets():
    assert [w.query_bits for w in preset_workloads("dna")] == [16, 32, 64, 128, 256]
    assert [w.encrypted_db_bytes // GIB for w in preset_workloads("dbsearch")] == [8, 16, 32, 64, 128]

    with pytest.raises(ParameterError):
        preset_workloads("video")


def test_pum_parallelism_follows_active_banks():
    assert DramConfig().parallel_bits == 4 * 65536
    assert DramConfig(active_banks=4).parallel_bits == 4 * 4 * 65536


def test_config_loading(tmp_path):
    path = tmp_path / "cost.json"
    path.write_text(json.dumps({"nand": {"t_read": 10_000.0}}), encoding="utf-8")

    config = load_cost_config(path)
    assert config.nand.t_read == 10_000.0
    assert config.nand.t_dma == 3_300.0

    with pytest.raises(MissingInputError):
        load_cost_config(tmp_path / "missing.json")

    path.write_text(json.dumps({"nand": {"t_read": -1}}), encoding="utf-8")
    with pytest.raises(FormatError):
        load_cost_config(path)

    path.write_text("{", encoding="utf-8")
    with pytest.raises(FormatError):
        load_cost_config(path)


def test_shipped_config_matches_the_defaults():
    assert load_cost_config() == CostConfig()
