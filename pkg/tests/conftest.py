"""Shared fixtures: repo data files and commonly built objects."""

from __future__ import annotations

from pathlib import Path

import pytest

from ivis_sim.code_table import load_table
from ivis_sim.ecm import fresh_state, load_profile
from ivis_sim.procedures import load_procedure
from ivis_sim.service import load_scenario

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def profile():
    return load_profile(DATA_DIR / "profiles" / "default.profile")


@pytest.fixture(scope="session")
def table():
    return load_table(DATA_DIR / "tables" / "reference_codes.tbl")


@pytest.fixture(scope="session")
def procedure_a():
    return load_procedure(DATA_DIR / "procedures" / "procedure_a.proc")


@pytest.fixture(scope="session")
def procedure_b():
    return load_procedure(DATA_DIR / "procedures" / "procedure_b.proc")


@pytest.fixture
def fresh_vehicle(profile):
    return fresh_state(profile)


@pytest.fixture
def icode_scenario(data_dir):
    return load_scenario(data_dir / "scenarios" / "oil_due_icode.scn")


@pytest.fixture
def procedure_a_scenario(data_dir):
    return load_scenario(data_dir / "scenarios" / "oil_due_procedure_a.scn")


@pytest.fixture
def procedure_b_scenario(data_dir):
    return load_scenario(data_dir / "scenarios" / "oil_due_procedure_b.scn")
