"""The compiled kernel must be bit-identical to the pure-Python reference."""

import pytest

from ponedge._kernel import available_backends
from ponedge.simulation import RunParams, run_simulation
from ponedge.workload import scenario_preset

needs_cython = pytest.mark.skipif(
    "cython" not in available_backends(),
    reason="compiled kernel not built in this environment",
)

CASES = [
    ("smart-city", "genio", 43_000.0),
    ("smart-city", "baseline", 300_000.0),
    ("e-health", "genio", 620_000.0),
    ("smart-building", "baseline", 440_000.0),
    ("aigc", "baseline", 700_000.0),  # heavy fair-share contention on the WAN
]


@needs_cython
@pytest.mark.parametrize("scenario,topology,mips", CASES)
def test_backends_bit_identical(scenario, topology, mips):
    params = RunParams(scenario=scenario_preset(scenario), topology=topology,
                       cpu_mips=mips, seed=5, duration_s=120.0)
    py = run_simulation(params, backend="python", collect_trace=True)
    cy = run_simulation(params, backend="cython", collect_trace=True)
    assert py.trace_hash == cy.trace_hash
    assert py.records == cy.records
    assert py.processed_events == cy.processed_events
    assert py.summary == cy.summary


@needs_cython
def test_backend_env_selection(monkeypatch):
    from ponedge._kernel import resolve_backend
    assert resolve_backend("auto") == "cython"
    monkeypatch.setenv("PONEDGE_BACKEND", "python")
    assert resolve_backend("auto") == "python"
    monkeypatch.setenv("PONEDGE_BACKEND", "qpu")
    with pytest.raises(ValueError):
        resolve_backend("auto")
