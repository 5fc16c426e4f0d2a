# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Shared test fixtures

import logging

import numpy as np
import pytest

import mmloc


@pytest.fixture(autouse=True)
def clean_state():
    mmloc.Factory.clear_factory()
    yield
    mmloc.Factory.clear_factory()
    mmloc.Log.set_logfile(None)
    mmloc.Log.set_level(logging.INFO)
    mmloc.Log.set_flush_level(1000)


@pytest.fixture
def scenario() -> mmloc.Scenario:
    return mmloc.six_rrh_preset()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def random_scenario(rng: np.random.Generator, n_rrh: int = 6) -> mmloc.Scenario:
    """
    RRHs on a 1 km square near the ground and a UE at least 20 m from each of them,
    never straight above or below one.
    """
    while True:
        rrhs = np.column_stack([rng.uniform(-500, 500, n_rrh), rng.uniform(-500, 500, n_rrh), rng.uniform(0, 30, n_rrh)])
        u = np.array([rng.uniform(-300, 300), rng.uniform(-300, 300), rng.uniform(-60, 60)])
        v = rng.uniform(-15, 15, 3)
        diff = u - rrhs
        r = np.linalg.norm(diff, axis=1)
        horiz = np.linalg.norm(diff[:, :2], axis=1)
        if np.min(r) > 20.0 and np.min(horiz / r) > 0.05:
            return mmloc.Scenario(rrhs=rrhs, ue_pos=u, ue_vel=v)


def small_network(n_in: int, n_out: int, hidden: tuple[int, ...] = (8,), seed: int = 0, scale: float = 1.0, kind: str = "residual") -> mmloc.MlpParams:
    """
    Untrained network with a normalisation spanning [-scale, scale] on every feature.
    """
    params = mmloc.MlpParams.initialize([n_in, *hidden, n_out], seed=seed, kind=kind)
    norm = mmloc.NormalizationSpec(
        in_min=np.full(n_in, -1e3),
        in_max=np.full(n_in, 1e3),
        out_min=np.full(n_out, -scale),
        out_max=np.full(n_out, scale),
    )
    return params.with_values(list(params.weights), list(params.biases), norm=norm)
